#pragma once

#include <complex>
#include <vector>

#include "afdim/rng.hpp"
#include "afdim/signal.hpp"

namespace afdim {

enum class FadingModel { unit_gain, rician };

// Per-hop link parameters. Distances in meters; the draw is uniform over
// [d_min, d_max] (set d_min == d_max for a fixed distance).
struct HopConfig {
    FadingModel fading = FadingModel::unit_gain;
    double rician_k_db = 0.0;
    double d_min = 1.0;
    double d_max = 1.0;
    double path_loss_exponent = 0.0;
    double ref_loss_db_at_1m = 0.0;
    double noise_variance = 1.0;
    double power_cap = 1.0;

    void validate() const;  // throws std::invalid_argument
};

struct HopRealization {
    cplx h;                 // drawn coefficient, path loss included
    double g = 0.0;         // relay amplification gain
    double noise_variance = 0.0;
    double input_power = 0.0;
    double snr_in = 0.0;    // |h|^2 * input_power / noise_variance
};

// End-to-end sufficient statistics of a relay chain: X_H = mu * X_0 + sqrt(v) * Z.
struct SufficientStats {
    cplx mu{1.0, 0.0};
    double v = 0.0;

    double snr_eq(double source_power = 1.0) const { return std::norm(mu) * source_power / v; }
};

// h = sqrt(PL(d)) * f, PL in linear power scale, E|f|^2 = 1 for both models.
cplx draw_hop(const HopConfig& cfg, Rng& rng);

// Fixed gain meeting the power cap with equality from second-order statistics:
// g^2 (|h|^2 P_in + sigma^2) = cap.
double relay_gain(cplx h, double input_power, double noise_variance, double power_cap);

struct ChainOutput {
    SymbolBlock block;                  // received block X_H
    SufficientStats stats;              // exact (genie) mu, v
    std::vector<HopRealization> hops;
};

// Per hop: Y = h X + W with W ~ CN(0, sigma^2 I), then X' = g Y. Source power
// is taken as 1 (blocks are drawn from unit-power constellations). v is
// floored at 1e-300 so snr_eq stays finite on noiseless chains.
ChainOutput propagate_chain(const SymbolBlock& block, const std::vector<HopConfig>& hops,
                            Rng& rng);

struct QuantRanges {
    double mu_abs_max = 2.0;  // Re/Im mu quantized uniformly over [-max, max]
    double v_min = 1e-9;      // v quantized uniformly in log over [v_min, v_max]
    double v_max = 4.0;
};

// Nearest-level uniform quantization of the three real scalars; values are
// clamped to the configured ranges. Bit widths must be >= 2.
SufficientStats quantize_stats(const SufficientStats& stats, int bits_re, int bits_im,
                               int bits_v, const QuantRanges& ranges = {});

}  // namespace afdim
