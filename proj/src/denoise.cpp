#include "afdim/denoise.hpp"
#include <array>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "afdim/diffusion.hpp"

namespace afdim {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double silu(double x) { return x * sigmoid(x); }
double silu_deriv(double x) {
    const double s = sigmoid(x);
    return s * (1.0 + x * (1.0 - s));
}

double mean_inverse_distance_power(double d_min, double d_max, double exponent) {
    if (d_max <= d_min) return std::pow(d_min, -exponent);
    if (exponent == 1.0) return std::log(d_max / d_min) / (d_max - d_min);
    return (std::pow(d_max, 1.0 - exponent) - std::pow(d_min, 1.0 - exponent)) /
           ((1.0 - exponent) * (d_max - d_min));
}

}  // namespace

cplx bayes_x0(const DenoiserQuery& q, const Constellation& c) {
    if (!(q.abar_t > 0.0 && q.abar_t <= 1.0))
        throw std::invalid_argument("bayes_x0: abar must be in (0, 1]");
    const double noise_var = 1.0 - q.abar_t;
    if (noise_var < 1e-15)  // zero-noise limit: snap to the closest point
        return c.points[nearest_point(c, q.x_t)];

    const double amp = std::sqrt(q.abar_t);
    double max_e = -1e300;
    for (int s = 0; s < c.order; ++s) {
        const double e = std::log(std::max(c.prior[s], 1e-300)) -
                         std::norm(q.x_t - amp * c.points[s]) / noise_var;
        if (e > max_e) max_e = e;
    }
    double wsum = 0.0;
    cplx num(0.0, 0.0);
    for (int s = 0; s < c.order; ++s) {
        const double w = std::exp(std::log(std::max(c.prior[s], 1e-300)) -
                                  std::norm(q.x_t - amp * c.points[s]) / noise_var - max_e);
        wsum += w;
        num += w * c.points[s];
    }
    return num / wsum;
}

cplx bayes_epsilon(const DenoiserQuery& q, const Constellation& c) {
    if (!(q.sigma_t > 0.0)) throw std::invalid_argument("bayes_epsilon: sigma must be > 0");
    const cplx x0 = bayes_x0(q, c);
    return (q.x_t - std::sqrt(q.abar_t) * x0) / q.sigma_t;
}

double per_hop_snr_for_target(double snr_eq_target, int hops) {
    if (!(snr_eq_target > 0.0) || hops < 1)
        throw std::invalid_argument("per_hop_snr_for_target: need snr > 0 and hops >= 1");
    const double a_total = snr_eq_target / (1.0 + snr_eq_target);
    const double a_hop = std::pow(a_total, 1.0 / hops);
    return a_hop / (1.0 - a_hop);
}

std::vector<HopConfig> make_chain_configs(const ChainSpace& space, double snr_eq_target) {
    return make_chain_configs_per_hop(space, per_hop_snr_for_target(snr_eq_target, space.hops));
}

std::vector<HopConfig> make_chain_configs_per_hop(const ChainSpace& space, double per_hop_snr) {
    if (!(per_hop_snr > 0.0))
        throw std::invalid_argument("make_chain_configs_per_hop: snr must be > 0");
    const double s = per_hop_snr;
    std::vector<HopConfig> cfgs(space.hops);
    for (int t = 0; t < space.hops; ++t) {
        HopConfig& cfg = cfgs[t];
        cfg.power_cap = space.power_cap;
        const double input_power = (t == 0) ? 1.0 : space.power_cap;
        if (space.rician) {
            cfg.fading = FadingModel::rician;
            cfg.rician_k_db = space.rician_k_db;
            cfg.d_min = space.d_min;
            cfg.d_max = space.d_max;
            cfg.path_loss_exponent = space.path_loss_exponent;
            cfg.ref_loss_db_at_1m = space.ref_loss_db_at_1m;
            const double mean_gain =
                std::pow(10.0, -space.ref_loss_db_at_1m / 10.0) *
                mean_inverse_distance_power(space.d_min, space.d_max, space.path_loss_exponent);
            cfg.noise_variance = mean_gain * input_power / s;
        } else {
            cfg.fading = FadingModel::unit_gain;
            cfg.d_min = cfg.d_max = 1.0;
            cfg.path_loss_exponent = 0.0;
            cfg.ref_loss_db_at_1m = 0.0;
            cfg.noise_variance = input_power / s;
        }
    }
    return cfgs;
}

std::vector<TrainingSample> generate_training_set(const ChainSpace& space,
                                                  const Constellation& c, int count, Rng& rng) {
    if (count < 1) throw std::invalid_argument("generate_training_set: count must be >= 1");

    const std::uint64_t master = rng.next_u64();
    std::vector<TrainingSample> data;
    data.reserve(count);
    for (int i = 0; i < count; ++i) {
        Rng r(derive_seed(master, static_cast<std::uint64_t>(i)));
        const double target_db = r.uniform_range(space.snr_eq_db_min, space.snr_eq_db_max);
        std::vector<HopConfig> cfgs = make_chain_configs(space, std::pow(10.0, target_db / 10.0));

        const int t = r.uniform_int(1, space.hops);
        cfgs.resize(t);  // stop at hop t; its stats are the partial-chain stats

        const SymbolBlock x0 = draw_block(c, 1, r);
        const ChainOutput out = propagate_chain(x0, cfgs, r);
        const SymbolBlock state = init_reverse_state(out.block, out.stats);

        const double snr = out.stats.snr_eq();
        const double abar = snr / (1.0 + snr);
        const double amp = std::sqrt(abar);
        const double sig = std::sqrt(1.0 - abar);

        TrainingSample ts;
        ts.t = t;
        ts.abar_t = abar;
        ts.mu = out.stats.mu;
        ts.v = out.stats.v;
        ts.target_eps = (sig > 1e-150) ? (state.samples[0] - amp * x0.samples[0]) / sig
                                       : cplx(0.0, 0.0);
        // reconstruct so the stored triple satisfies the manifold identity bit-exactly
        ts.x_t = amp * x0.samples[0] + sig * ts.target_eps;
        data.push_back(ts);
    }
    return data;
}

MlpDenoiser::MlpDenoiser(int hidden_width, Rng& init_rng) : hidden_(hidden_width) {
    if (hidden_width < 1) throw std::invalid_argument("MlpDenoiser: hidden width must be >= 1");
    const int h = hidden_;
    params_.assign(static_cast<std::size_t>(h) * kInputDim + h +
                       static_cast<std::size_t>(h) * h + h + kOutputDim * h + kOutputDim,
                   0.0);
    // First layer: ridge units with log-uniform steepness over the I/Q plane
    // (the posterior-mean transitions sharpen as 1/sigma, so useful slopes
    // span decades and plain small-scale init cannot reach them within a
    // short training budget). Remaining layers He, output layer near zero.
    double* w1 = params_.data();
    double* b1 = w1 + static_cast<std::size_t>(h) * kInputDim;
    for (int i = 0; i < h; ++i) {
        double* row = w1 + static_cast<std::size_t>(i) * kInputDim;
        // half the units axis-aligned (the posterior mean separates per axis)
        const double theta = (i % 2 == 0) ? (i % 4 == 0 ? 0.0 : M_PI_2)
                                          : init_rng.uniform_range(0.0, 2.0 * M_PI);
        const double scale = std::pow(10.0, init_rng.uniform_range(-0.3, 1.8));
        row[0] = scale * std::cos(theta);
        row[1] = scale * std::sin(theta);
        for (int j = 2; j < kInputDim - 1; ++j) row[j] = 1.5 * init_rng.gaussian();
        // every other unit is gated to a log-snr window so downstream layers
        // can select snr-conditioned responses without growing large weights
        row[kInputDim - 1] = (i % 2 == 1)
                                 ? (init_rng.uniform() < 0.5 ? -1.0 : 1.0) *
                                       init_rng.uniform_range(6.0, 14.0)
                                 : 1.5 * init_rng.gaussian();
        // unscaled offsets: steep units land their ramps near decision boundaries
        b1[i] = init_rng.uniform_range(-1.3, 1.3);
    }
    std::size_t off = static_cast<std::size_t>(h) * kInputDim + h;
    const double sd2 = std::sqrt(2.0 / h);
    for (int i = 0; i < h * h; ++i) params_[off + i] = sd2 * init_rng.gaussian();
}

void MlpDenoiser::features(const DenoiserQuery& q, double* out) const {
    int t = q.t;
    if (!lambda_table_.empty()) {
        // embed the training hop index whose mean log-snr is closest
        std::size_t best = 0;
        double best_d = std::abs(lambda_table_[0] - q.lambda_t);
        for (std::size_t k = 1; k < lambda_table_.size(); ++k) {
            const double d = std::abs(lambda_table_[k] - q.lambda_t);
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        t = static_cast<int>(best) + 1;
    }
    // geometric wavelengths 1 .. 1e4
    static const auto freqs = [] {
        std::array<double, kTimeEmbedDim / 2> f{};
        for (int k = 0; k < kTimeEmbedDim / 2; ++k)
            f[k] = std::pow(10.0, -4.0 * k / (kTimeEmbedDim / 2 - 1));
        return f;
    }();
    out[0] = q.x_t.real();
    out[1] = q.x_t.imag();
    for (int k = 0; k < kTimeEmbedDim / 2; ++k) {
        const double arg = t * freqs[k];
        out[2 + 2 * k] = std::sin(arg);
        out[3 + 2 * k] = std::cos(arg);
    }
    out[2 + kTimeEmbedDim] = (q.lambda_t - 3.0) / 3.0;
}

void MlpDenoiser::forward(const double* in, Workspace& ws, double out[2]) const {
    const int h = hidden_;
    const double* w1 = params_.data();
    const double* b1 = w1 + static_cast<std::size_t>(h) * kInputDim;
    const double* w2 = b1 + h;
    const double* b2 = w2 + static_cast<std::size_t>(h) * h;
    const double* w3 = b2 + h;
    const double* b3 = w3 + static_cast<std::size_t>(kOutputDim) * h;

    ws.a1.resize(h);
    ws.h1.resize(h);
    ws.a2.resize(h);
    ws.h2.resize(h);
    for (int i = 0; i < h; ++i) {
        double acc = b1[i];
        const double* row = w1 + static_cast<std::size_t>(i) * kInputDim;
        for (int j = 0; j < kInputDim; ++j) acc += row[j] * in[j];
        ws.a1[i] = acc;
        ws.h1[i] = silu(acc);
    }
    for (int i = 0; i < h; ++i) {
        double acc = b2[i];
        const double* row = w2 + static_cast<std::size_t>(i) * h;
        for (int j = 0; j < h; ++j) acc += row[j] * ws.h1[j];
        ws.a2[i] = acc;
        ws.h2[i] = silu(acc);
    }
    for (int o = 0; o < kOutputDim; ++o) {
        double acc = b3[o];
        const double* row = w3 + static_cast<std::size_t>(o) * h;
        for (int j = 0; j < h; ++j) acc += row[j] * ws.h2[j];
        out[o] = acc;
    }
}

cplx MlpDenoiser::epsilon(const DenoiserQuery& q) const {
    thread_local Workspace ws;
    double in[kInputDim];
    features(q, in);
    double out[2];
    forward(in, ws, out);
    return {out[0], out[1]};
}

cplx mlp_epsilon(const MlpDenoiser& d, const DenoiserQuery& q) { return d.epsilon(q); }

double MlpDenoiser::batch_loss(const std::vector<TrainingSample>& batch) const {
    double loss = 0.0;
    Workspace ws;
    for (const TrainingSample& ts : batch) {
        DenoiserQuery q;
        q.x_t = ts.x_t;
        q.abar_t = ts.abar_t;
        q.sigma_t = std::sqrt(1.0 - ts.abar_t);
        q.t = ts.t;
        q.lambda_t = std::log(std::max(ts.abar_t, 1e-300) / std::max(1.0 - ts.abar_t, 1e-300));
        double in[kInputDim];
        features(q, in);
        double out[2];
        forward(in, ws, out);
        const double dr = out[0] - ts.target_eps.real();
        const double di = out[1] - ts.target_eps.imag();
        loss += dr * dr + di * di;
    }
    return loss / static_cast<double>(batch.size());
}

double MlpDenoiser::batch_loss_grad(const std::vector<TrainingSample>& batch,
                                    std::vector<double>& grad) const {
    const int h = hidden_;
    grad.assign(params_.size(), 0.0);

    const double* w2 = params_.data() + static_cast<std::size_t>(h) * kInputDim + h;
    const double* w3 = w2 + static_cast<std::size_t>(h) * h + h;
    double* g_w1 = grad.data();
    double* g_b1 = g_w1 + static_cast<std::size_t>(h) * kInputDim;
    double* g_w2 = g_b1 + h;
    double* g_b2 = g_w2 + static_cast<std::size_t>(h) * h;
    double* g_w3 = g_b2 + h;
    double* g_b3 = g_w3 + static_cast<std::size_t>(kOutputDim) * h;

    double loss = 0.0;
    Workspace ws;
    std::vector<double> d1(h), d2(h);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const TrainingSample& ts : batch) {
        DenoiserQuery q;
        q.x_t = ts.x_t;
        q.abar_t = ts.abar_t;
        q.sigma_t = std::sqrt(1.0 - ts.abar_t);
        q.t = ts.t;
        q.lambda_t = std::log(std::max(ts.abar_t, 1e-300) / std::max(1.0 - ts.abar_t, 1e-300));
        double in[kInputDim];
        features(q, in);
        double out[2];
        forward(in, ws, out);

        const double dy[2] = {2.0 * inv_n * (out[0] - ts.target_eps.real()),
                              2.0 * inv_n * (out[1] - ts.target_eps.imag())};
        const double dr = out[0] - ts.target_eps.real();
        const double di = out[1] - ts.target_eps.imag();
        loss += (dr * dr + di * di) * inv_n;

        // output layer
        for (int o = 0; o < kOutputDim; ++o) {
            g_b3[o] += dy[o];
            double* row = g_w3 + static_cast<std::size_t>(o) * h;
            for (int j = 0; j < h; ++j) row[j] += dy[o] * ws.h2[j];
        }
        // back through layer 2
        for (int j = 0; j < h; ++j) {
            double acc = 0.0;
            for (int o = 0; o < kOutputDim; ++o)
                acc += dy[o] * w3[static_cast<std::size_t>(o) * h + j];
            d2[j] = acc * silu_deriv(ws.a2[j]);
        }
        for (int i = 0; i < h; ++i) {
            g_b2[i] += d2[i];
            double* row = g_w2 + static_cast<std::size_t>(i) * h;
            for (int j = 0; j < h; ++j) row[j] += d2[i] * ws.h1[j];
        }
        // back through layer 1
        for (int j = 0; j < h; ++j) {
            double acc = 0.0;
            for (int i = 0; i < h; ++i) acc += d2[i] * w2[static_cast<std::size_t>(i) * h + j];
            d1[j] = acc * silu_deriv(ws.a1[j]);
        }
        for (int i = 0; i < h; ++i) {
            g_b1[i] += d1[i];
            double* row = g_w1 + static_cast<std::size_t>(i) * kInputDim;
            for (int j = 0; j < kInputDim; ++j) row[j] += d1[i] * in[j];
        }
    }
    return loss;
}

MlpDenoiser::TrainReport MlpDenoiser::train(const std::vector<TrainingSample>& data, int epochs,
                                            int batch_size, double lr, Rng& rng) {
    if (data.empty()) throw std::invalid_argument("train: empty training set");
    if (epochs < 1 || batch_size < 1 || !(lr > 0.0))
        throw std::invalid_argument("train: invalid hyperparameters");

    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kWeightDecay = 0.01, kEps = 1e-8;
    std::vector<double> m(params_.size(), 0.0), v(params_.size(), 0.0), grad;
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    // mean log-snr per hop index, used to align reverse-schedule queries
    {
        int max_t = 0;
        for (const TrainingSample& ts : data) max_t = std::max(max_t, ts.t);
        std::vector<double> sum(max_t, 0.0);
        std::vector<int> cnt(max_t, 0);
        for (const TrainingSample& ts : data) {
            sum[ts.t - 1] += std::log(std::max(ts.abar_t, 1e-300) /
                                      std::max(1.0 - ts.abar_t, 1e-300));
            cnt[ts.t - 1] += 1;
        }
        lambda_table_.assign(max_t, 0.0);
        for (int k = 0; k < max_t; ++k)
            lambda_table_[k] = (cnt[k] > 0) ? sum[k] / cnt[k] : 0.0;
    }

    TrainReport report;
    const long long total_steps =
        static_cast<long long>(epochs) *
        ((static_cast<long long>(data.size()) + batch_size - 1) / batch_size);
    long long step = 0;
    std::vector<TrainingSample> batch;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_int(0, static_cast<int>(i) - 1)]);

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < data.size(); start += batch_size) {
            batch.clear();
            for (std::size_t i = start; i < std::min(start + batch_size, data.size()); ++i)
                batch.push_back(data[order[i]]);

            const double loss = batch_loss_grad(batch, grad);
            if (!std::isfinite(loss))
                throw std::runtime_error("train: non-finite loss at step " +
                                         std::to_string(step));
            epoch_loss += loss;
            ++batches;
            ++step;

            const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
            const double lr_t = lr * (1.0 - 0.9 * std::min(1.0, frac));  // linear decay to lr/10
            const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
            for (std::size_t p = 0; p < params_.size(); ++p) {
                m[p] = kBeta1 * m[p] + (1.0 - kBeta1) * grad[p];
                v[p] = kBeta2 * v[p] + (1.0 - kBeta2) * grad[p] * grad[p];
                const double mhat = m[p] / bc1;
                const double vhat = v[p] / bc2;
                params_[p] -= lr_t * (mhat / (std::sqrt(vhat) + kEps) + kWeightDecay * params_[p]);
            }
        }
        report.epoch_loss.push_back(epoch_loss / static_cast<double>(batches));
    }
    return report;
}

void MlpDenoiser::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    f << "afdim-mlp v1\n";
    f << "hidden " << hidden_ << "\n";
    f << "params " << params_.size() << "\n";
    char buf[32];
    for (double p : params_) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", p);
        f << buf;
    }
    f << "lambda_table " << lambda_table_.size() << "\n";
    for (double l : lambda_table_) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", l);
        f << buf;
    }
    if (!f) throw std::runtime_error("checkpoint write failed: " + path);
}

MlpDenoiser MlpDenoiser::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string magic, version, key;
    f >> magic >> version;
    if (magic != "afdim-mlp" || version != "v1")
        throw std::runtime_error("unrecognized checkpoint format in " + path);

    MlpDenoiser d;
    std::size_t n = 0;
    f >> key >> d.hidden_;
    if (key != "hidden" || d.hidden_ < 1) throw std::runtime_error("bad checkpoint header");
    f >> key >> n;
    if (key != "params") throw std::runtime_error("bad checkpoint header");
    d.params_.resize(n);
    for (std::size_t i = 0; i < n; ++i) f >> d.params_[i];
    f >> key >> n;
    if (key != "lambda_table") throw std::runtime_error("bad checkpoint header");
    d.lambda_table_.resize(n);
    for (std::size_t i = 0; i < n; ++i) f >> d.lambda_table_[i];
    if (!f) throw std::runtime_error("truncated checkpoint: " + path);

    const int h = d.hidden_;
    const std::size_t expected = static_cast<std::size_t>(h) * kInputDim + h +
                                 static_cast<std::size_t>(h) * h + h + kOutputDim * h +
                                 kOutputDim;
    if (d.params_.size() != expected)
        throw std::runtime_error("checkpoint parameter count mismatch");
    return d;
}

}  // namespace afdim
