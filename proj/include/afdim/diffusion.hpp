#pragma once

#include <vector>

#include "afdim/channel.hpp"
#include "afdim/rng.hpp"
#include "afdim/signal.hpp"

namespace afdim {

// One forward step x' = alpha x + sqrt(1 - alpha^2) z, with beta = 1 - alpha^2.
struct VpStep {
    double alpha = 0.0;
    double beta = 1.0;
};

// alpha^2 = snr / (1 + snr), beta = 1 / (1 + snr). Throws on negative snr.
VpStep alpha_from_snr(double snr_in);

// Inverse of alpha_from_snr on [0, 1).
double snr_from_alpha(double alpha);

struct CollapsedChannel {
    double alpha_bar = 1.0;  // cumulative amplitude, product of per-step alphas
    double gamma = 0.0;      // alpha_bar^2 / (1 - alpha_bar^2)
};

CollapsedChannel collapse(const std::vector<VpStep>& steps);

struct ForwardSample {
    SymbolBlock block;             // sqrt(abar) x0 + sqrt(1 - abar) z
    std::vector<cplx> noise;       // the injected z (training target)
};

// abar is in the variance domain: output = sqrt(abar) x0 + sqrt(1 - abar) z.
ForwardSample forward_jump(const SymbolBlock& x0, double abar, Rng& rng);

// Cumulative signal fractions in the variance domain: abar[0] = 1,
// abar[t] = abar_T^{t/T} with abar_T = snr_eq / (1 + snr_eq).
struct ReverseSchedule {
    int steps = 0;               // T
    std::vector<double> abar;    // size T + 1
    std::vector<double> sigma;   // sqrt(1 - abar[t])
    std::vector<double> lambda;  // log(abar[t] / (1 - abar[t]))
};

ReverseSchedule schedule_from_stats(const SufficientStats& stats, int steps);

// sqrt(abar_T) * (x_H / mu); distributed as sqrt(abar_T) x0 + sqrt(1-abar_T) z.
SymbolBlock init_reverse_state(const SymbolBlock& x_h, const SufficientStats& stats);

}  // namespace afdim
