#pragma once

#include <functional>
#include <string>
#include <vector>

#include "afdim/signal.hpp"

namespace afdim {

// Nodes/weights for the physicists' Gauss-Hermite rule (weight e^{-x^2}).
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussHermite gauss_hermite(int order);

// mmse of estimating X0 ~ prior from Y = sqrt(gamma) X0 + Z, Z ~ CN(0, 1),
// via the exact finite-sum posterior mean and 2-D Gauss-Hermite over Z.
// Deterministic. Order 80 keeps the tail-dominated high-snr region accurate
// (order 40 is ~1e-4 off near gamma = 10 for QPSK); orders up to 150 are
// supported.
double mmse_discrete(const Constellation& c, double gamma, int gh_order = 80);

// d * ln(1 + snr_eff), nats.
double mi_gaussian(double snr_eff, int d = 1);

// I(gamma_hi) = integral_0^gamma_hi mmse(gamma) dgamma (complex-channel
// convention, no 1/2), adaptive Gauss-Kronrod to the given relative tolerance.
double mi_from_mmse(const std::function<double(double)>& mmse, double gamma_hi,
                    double rel_tol = 1e-6);

double mi_via_immse(const Constellation& c, double gamma_hi, int gh_order = 80,
                    double rel_tol = 1e-6);

// dI/dgamma at 0+, from mi_via_immse at gamma in {1e-4, 2e-4}. Equals the
// prior second moment (so 1.0 for unit-power constellations).
double mi_small_snr_slope(const Constellation& c);

struct MmseCurve {
    std::vector<double> gammas;       // increasing, >= 0
    std::vector<double> mmse_values;  // in [0, 1] for unit-power priors
    std::string prior_id;             // e.g. "qam16" or "gaussian"
};

MmseCurve build_mmse_curve(const Constellation& c, const std::vector<double>& gammas,
                           int gh_order = 80);

}  // namespace afdim
