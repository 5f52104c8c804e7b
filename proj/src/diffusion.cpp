#include "afdim/diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace afdim {

namespace {

double log_snr(double abar) {
    const double num = std::max(abar, 1e-300);
    const double den = std::max(1.0 - abar, 1e-300);
    return std::log(num / den);
}

}  // namespace

VpStep alpha_from_snr(double snr_in) {
    if (!(snr_in >= 0.0) || !std::isfinite(snr_in))
        throw std::invalid_argument("alpha_from_snr: snr must be finite and >= 0");
    VpStep s;
    s.alpha = std::sqrt(snr_in / (1.0 + snr_in));
    s.beta = 1.0 / (1.0 + snr_in);
    return s;
}

double snr_from_alpha(double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("snr_from_alpha: alpha must be in [0, 1)");
    const double a2 = alpha * alpha;
    return a2 / (1.0 - a2);
}

CollapsedChannel collapse(const std::vector<VpStep>& steps) {
    if (steps.empty()) throw std::invalid_argument("collapse: empty schedule");
    double ab = 1.0;
    for (const VpStep& s : steps) ab *= s.alpha;
    CollapsedChannel c;
    c.alpha_bar = ab;
    c.gamma = ab * ab / (1.0 - ab * ab);
    return c;
}

ForwardSample forward_jump(const SymbolBlock& x0, double abar, Rng& rng) {
    if (!(abar > 0.0 && abar <= 1.0))
        throw std::invalid_argument("forward_jump: abar must be in (0, 1]");
    const double amp = std::sqrt(abar);
    const double sig = std::sqrt(1.0 - abar);

    ForwardSample out;
    out.block.side = x0.side;
    out.block.samples.resize(x0.samples.size());
    out.noise.resize(x0.samples.size());
    for (std::size_t i = 0; i < x0.samples.size(); ++i) {
        out.noise[i] = rng.cgaussian();
        out.block.samples[i] = amp * x0.samples[i] + sig * out.noise[i];
    }
    return out;
}

ReverseSchedule schedule_from_stats(const SufficientStats& stats, int steps) {
    if (steps < 1) throw std::invalid_argument("schedule_from_stats: steps must be >= 1");
    if (!(stats.v > 0.0)) throw std::invalid_argument("schedule_from_stats: v must be > 0");

    const double snr = stats.snr_eq();
    const double abar_end = snr / (1.0 + snr);

    ReverseSchedule sch;
    sch.steps = steps;
    sch.abar.resize(steps + 1);
    sch.sigma.resize(steps + 1);
    sch.lambda.resize(steps + 1);
    sch.abar[0] = 1.0;
    sch.abar[steps] = abar_end;  // endpoint depends only on snr_eq, never on T
    for (int t = 1; t < steps; ++t)
        sch.abar[t] = std::pow(abar_end, static_cast<double>(t) / steps);
    for (int t = 0; t <= steps; ++t) {
        sch.sigma[t] = std::sqrt(1.0 - sch.abar[t]);
        sch.lambda[t] = log_snr(sch.abar[t]);
    }
    return sch;
}

SymbolBlock init_reverse_state(const SymbolBlock& x_h, const SufficientStats& stats) {
    if (stats.mu == cplx(0.0, 0.0))
        throw std::invalid_argument("init_reverse_state: mu must be nonzero");
    const double snr = stats.snr_eq();
    const double amp = std::sqrt(snr / (1.0 + snr));

    SymbolBlock out;
    out.side = x_h.side;
    out.samples.resize(x_h.samples.size());
    for (std::size_t i = 0; i < x_h.samples.size(); ++i)
        out.samples[i] = amp * (x_h.samples[i] / stats.mu);
    return out;
}

}  // namespace afdim
