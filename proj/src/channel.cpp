#include "afdim/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace afdim {

namespace {

bool finite(double x) { return std::isfinite(x); }

double quantize_uniform(double x, double lo, double hi, int bits) {
    const double levels = std::ldexp(1.0, bits) - 1.0;  // 2^bits - 1 steps endpoints included
    const double step = (hi - lo) / levels;
    const double clamped = std::min(std::max(x, lo), hi);
    return lo + std::round((clamped - lo) / step) * step;
}

}  // namespace

void HopConfig::validate() const {
    if (!(finite(d_min) && finite(d_max) && finite(path_loss_exponent) &&
          finite(ref_loss_db_at_1m) && finite(noise_variance) && finite(power_cap) &&
          finite(rician_k_db)))
        throw std::invalid_argument("hop config has non-finite parameter");
    if (d_min <= 0.0 || d_max < d_min) throw std::invalid_argument("hop distance range invalid");
    if (path_loss_exponent < 0.0) throw std::invalid_argument("path loss exponent must be >= 0");
    if (noise_variance <= 0.0) throw std::invalid_argument("noise variance must be > 0");
    if (power_cap <= 0.0) throw std::invalid_argument("power cap must be > 0");
}

cplx draw_hop(const HopConfig& cfg, Rng& rng) {
    const double d = (cfg.d_max > cfg.d_min) ? rng.uniform_range(cfg.d_min, cfg.d_max) : cfg.d_min;
    const double pl = std::pow(10.0, -cfg.ref_loss_db_at_1m / 10.0) *
                      std::pow(d, -cfg.path_loss_exponent);

    cplx fade(1.0, 0.0);
    if (cfg.fading == FadingModel::rician) {
        const double k = std::pow(10.0, cfg.rician_k_db / 10.0);
        fade = std::sqrt(k / (k + 1.0)) + std::sqrt(1.0 / (k + 1.0)) * rng.cgaussian();
    }
    return std::sqrt(pl) * fade;
}

double relay_gain(cplx h, double input_power, double noise_variance, double power_cap) {
    return std::sqrt(power_cap / (std::norm(h) * input_power + noise_variance));
}

ChainOutput propagate_chain(const SymbolBlock& block, const std::vector<HopConfig>& hops,
                            Rng& rng) {
    if (hops.empty()) throw std::invalid_argument("propagate_chain: empty hop list");

    ChainOutput out;
    out.block.side = block.side;
    out.block.samples = block.samples;
    out.hops.reserve(hops.size());

    cplx mu(1.0, 0.0);
    double v = 0.0;
    double input_power = 1.0;  // unit-power source
    for (const HopConfig& cfg : hops) {
        cfg.validate();
        HopRealization hop;
        hop.h = draw_hop(cfg, rng);
        hop.noise_variance = cfg.noise_variance;
        hop.input_power = input_power;
        hop.g = relay_gain(hop.h, input_power, cfg.noise_variance, cfg.power_cap);
        hop.snr_in = std::norm(hop.h) * input_power / cfg.noise_variance;

        const double sigma = std::sqrt(cfg.noise_variance);
        for (cplx& x : out.block.samples) x = hop.g * (hop.h * x + sigma * rng.cgaussian());

        mu *= hop.g * hop.h;
        v = hop.g * hop.g * (std::norm(hop.h) * v + cfg.noise_variance);
        input_power = cfg.power_cap;  // the gain meets the cap with equality
        out.hops.push_back(hop);
    }

    out.stats.mu = mu;
    out.stats.v = std::max(v, 1e-300);
    return out;
}

SufficientStats quantize_stats(const SufficientStats& stats, int bits_re, int bits_im,
                               int bits_v, const QuantRanges& ranges) {
    if (bits_re < 2 || bits_im < 2 || bits_v < 2)
        throw std::invalid_argument("quantize_stats: bit widths must be >= 2");
    if (!(ranges.mu_abs_max > 0.0 && ranges.v_min > 0.0 && ranges.v_max > ranges.v_min))
        throw std::invalid_argument("quantize_stats: invalid ranges");

    SufficientStats q;
    q.mu = cplx(quantize_uniform(stats.mu.real(), -ranges.mu_abs_max, ranges.mu_abs_max, bits_re),
                quantize_uniform(stats.mu.imag(), -ranges.mu_abs_max, ranges.mu_abs_max, bits_im));
    q.v = std::exp(quantize_uniform(std::log(stats.v), std::log(ranges.v_min),
                                    std::log(ranges.v_max), bits_v));
    return q;
}

}  // namespace afdim
