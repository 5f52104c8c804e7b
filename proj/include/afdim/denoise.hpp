#pragma once

#include <complex>
#include <string>
#include <vector>

#include "afdim/channel.hpp"
#include "afdim/rng.hpp"
#include "afdim/signal.hpp"

namespace afdim {

// One reverse-step query on the VP manifold: x_t = sqrt(abar_t) x0 + sigma_t eps.
struct DenoiserQuery {
    cplx x_t{0.0, 0.0};
    double abar_t = 1.0;
    double sigma_t = 0.0;   // sqrt(1 - abar_t)
    int t = 0;
    double lambda_t = 0.0;  // log(abar_t / (1 - abar_t))
    cplx mu{1.0, 0.0};      // chain stats; inform schedule/equalization only
    double v = 0.0;
};

// Exact posterior mean sum_s w_s s with w_s proportional to
// prior_s exp(-|x_t - sqrt(abar) s|^2 / (1 - abar)), max-log stabilized.
// abar -> 1 off the constellation degenerates to the nearest point.
cplx bayes_x0(const DenoiserQuery& q, const Constellation& c);

// eps = (x_t - sqrt(abar) x0_hat) / sigma; requires sigma > 0.
cplx bayes_epsilon(const DenoiserQuery& q, const Constellation& c);

struct TrainingSample {
    cplx x_t{0.0, 0.0};       // equalized VP state
    int t = 0;                // hop index the symbol was stopped at
    double abar_t = 0.0;
    cplx target_eps{0.0, 0.0};
    cplx mu{1.0, 0.0};        // partial-chain stats
    double v = 0.0;
};

// Distribution over relay chains used for training-data synthesis. Per sample
// a destination snr_eq target is drawn uniformly in dB, a chain is calibrated
// to it with an even per-hop split, and the symbol is stopped at a uniform
// random hop.
struct ChainSpace {
    bool rician = false;
    int hops = 10;
    double snr_eq_db_min = 0.0;
    double snr_eq_db_max = 20.0;
    double rician_k_db = 15.0;
    double d_min = 1.0, d_max = 2.0;
    double path_loss_exponent = 2.0;
    double ref_loss_db_at_1m = 10.0;
    double power_cap = 1.0;
};

// Samples satisfy x_t == sqrt(abar) x0 + sqrt(1-abar) target_eps bit-exactly.
std::vector<TrainingSample> generate_training_set(const ChainSpace& space,
                                                  const Constellation& c, int count, Rng& rng);

// Per-symbol eps-prediction network: inputs (Re x, Im x), a 16-dim sinusoidal
// embedding of the step index and the log-snr; two SiLU hidden layers.
class MlpDenoiser {
  public:
    static constexpr int kTimeEmbedDim = 16;  // 8 (sin, cos) pairs
    static constexpr int kInputDim = 2 + kTimeEmbedDim + 1;
    static constexpr int kOutputDim = 2;

    MlpDenoiser(int hidden_width, Rng& init_rng);

    cplx epsilon(const DenoiserQuery& q) const;  // deterministic forward pass

    struct TrainReport {
        std::vector<double> epoch_loss;
    };

    // AdamW on mean |eps_theta - Z|^2 (beta1 0.9, beta2 0.999, weight decay
    // 0.01). Throws on a non-finite loss.
    TrainReport train(const std::vector<TrainingSample>& data, int epochs, int batch_size,
                      double lr, Rng& rng);

    // loss (and gradient w.r.t. the flat parameter vector) on one batch
    double batch_loss(const std::vector<TrainingSample>& batch) const;
    double batch_loss_grad(const std::vector<TrainingSample>& batch,
                           std::vector<double>& grad) const;

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    int hidden_width() const { return hidden_; }

    // mean training log-snr per hop index; when present, queries embed the
    // hop index with the nearest table entry instead of the raw step index
    const std::vector<double>& lambda_table() const { return lambda_table_; }
    void set_lambda_table(std::vector<double> table) { lambda_table_ = std::move(table); }

    void save(const std::string& path) const;
    static MlpDenoiser load(const std::string& path);

  private:
    struct Workspace {
        std::vector<double> a1, h1, a2, h2;  // pre/post activations per layer
    };

    MlpDenoiser() = default;
    void features(const DenoiserQuery& q, double* out) const;
    void forward(const double* in, Workspace& ws, double out[2]) const;

    int hidden_ = 0;
    std::vector<double> params_;       // w1, b1, w2, b2, w3, b3 (row-major)
    std::vector<double> lambda_table_;  // index k -> mean lambda at hop k+1
};

cplx mlp_epsilon(const MlpDenoiser& d, const DenoiserQuery& q);

// Even per-hop snr split hitting a destination snr_eq target after `hops`
// hops. Shared by the harness and training-data synthesis.
double per_hop_snr_for_target(double snr_eq_target, int hops);
std::vector<HopConfig> make_chain_configs(const ChainSpace& space, double snr_eq_target);
std::vector<HopConfig> make_chain_configs_per_hop(const ChainSpace& space, double per_hop_snr);

}  // namespace afdim
