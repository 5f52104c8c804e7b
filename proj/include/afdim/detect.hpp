#pragma once

#include "afdim/channel.hpp"
#include "afdim/denoise.hpp"
#include "afdim/signal.hpp"

namespace afdim {

enum class DenoiserKind { exact_bayes, learned };

struct DetectorConfig {
    int reverse_steps = 1;  // T
    DenoiserKind denoiser = DenoiserKind::exact_bayes;
    const Constellation* constellation = nullptr;
    const MlpDenoiser* model = nullptr;  // required for DenoiserKind::learned
};

// Deterministic reverse recursion driven by the schedule built from the
// chain's sufficient statistics. Returns soft estimates; hard decisions
// happen in compute_errors, never here.
SymbolBlock ddim_decode(const SymbolBlock& x_h, const SufficientStats& stats,
                        const DetectorConfig& cfg);

// Symbol-wise argmin_s |x - mu s|^2; ML = MAP under uniform priors.
SymbolBlock ml_decode(const SymbolBlock& x_h, const SufficientStats& stats,
                      const Constellation& c);

}  // namespace afdim
