#include "afdim/detect.hpp"

#include <cmath>
#include <stdexcept>

#include "afdim/diffusion.hpp"

namespace afdim {

SymbolBlock ddim_decode(const SymbolBlock& x_h, const SufficientStats& stats,
                        const DetectorConfig& cfg) {
    if (cfg.constellation == nullptr)
        throw std::invalid_argument("ddim_decode: missing constellation");
    if (cfg.denoiser == DenoiserKind::learned && cfg.model == nullptr)
        throw std::invalid_argument("ddim_decode: learned denoiser without a model");
    if (cfg.reverse_steps < 1) throw std::invalid_argument("ddim_decode: steps must be >= 1");

    const Constellation& c = *cfg.constellation;
    const ReverseSchedule sch = schedule_from_stats(stats, cfg.reverse_steps);
    SymbolBlock out = init_reverse_state(x_h, stats);
    out.symbol_indices.clear();

    for (cplx& x : out.samples) {
        for (int t = sch.steps; t >= 1; --t) {
            DenoiserQuery q;
            q.x_t = x;
            q.abar_t = sch.abar[t];
            q.sigma_t = sch.sigma[t];
            q.t = t;
            q.lambda_t = sch.lambda[t];
            q.mu = stats.mu;
            q.v = stats.v;

            const double amp = std::sqrt(sch.abar[t]);
            cplx x0_hat, eps;
            if (sch.sigma[t] <= 0.0) {  // noiseless step; nothing to denoise
                x0_hat = x / amp;
                eps = cplx(0.0, 0.0);
            } else if (cfg.denoiser == DenoiserKind::exact_bayes) {
                x0_hat = bayes_x0(q, c);
                eps = (x - amp * x0_hat) / sch.sigma[t];
            } else {
                eps = cfg.model->epsilon(q);
                x0_hat = (x - sch.sigma[t] * eps) / amp;
            }
            // abar[0] = 1 and sigma[0] = 0: the final step lands on x0_hat
            x = (t == 1) ? x0_hat : std::sqrt(sch.abar[t - 1]) * x0_hat + sch.sigma[t - 1] * eps;
        }
    }
    return out;
}

SymbolBlock ml_decode(const SymbolBlock& x_h, const SufficientStats& stats,
                      const Constellation& c) {
    if (stats.mu == cplx(0.0, 0.0)) throw std::invalid_argument("ml_decode: mu must be nonzero");

    SymbolBlock out;
    out.side = x_h.side;
    out.samples.resize(x_h.samples.size());
    out.symbol_indices.resize(x_h.samples.size());
    for (std::size_t i = 0; i < x_h.samples.size(); ++i) {
        int best = 0;
        double best_d = std::norm(x_h.samples[i] - stats.mu * c.points[0]);
        for (int s = 1; s < c.order; ++s) {
            const double d = std::norm(x_h.samples[i] - stats.mu * c.points[s]);
            if (d < best_d) {
                best_d = d;
                best = s;
            }
        }
        out.symbol_indices[i] = best;
        out.samples[i] = c.points[best];
    }
    return out;
}

}  // namespace afdim
