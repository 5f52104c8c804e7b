#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "afdim/channel.hpp"
#include "afdim/denoise.hpp"

namespace afdim {

enum class Regime { awgn_only, rician };
enum class SnrAxis { snr_eq, per_hop };

struct RicianParams {
    double k_db = 15.0;
    double d_min = 1.0, d_max = 2.0;
    double path_loss_exponent = 2.0;
    double ref_loss_db_at_1m = 10.0;
};

struct QuantSettings {
    bool enabled = false;
    int bits_re = 32, bits_im = 32, bits_v = 32;
    QuantRanges ranges;
};

struct TrainingSettings {
    int samples = 10000;
    int epochs = 5;
    int batch = 64;
    double lr = 1e-3;
    int hidden_width = 128;
    double snr_db_min = 0.0, snr_db_max = 20.0;
    std::string model_path;  // when set, loaded instead of training
};

struct ExperimentConfig {
    Regime regime = Regime::awgn_only;
    std::vector<int> modulation_orders{4};
    std::vector<int> block_sides{64};      // N; L = N^2
    std::vector<int> hop_counts{10};
    std::vector<double> snr_db{10.0};
    SnrAxis snr_axis = SnrAxis::snr_eq;    // what the snr_db list calibrates
    int trials = 400;
    std::uint64_t seed = 1;
    std::vector<std::string> detectors{"ml", "ddim-bayes"};
    int reverse_steps = 0;                 // 0 -> T = H
    QuantSettings quant;
    RicianParams rician;
    double power_cap = 1.0;
    TrainingSettings training;
    std::string out_dir = "results";
    int threads = 1;

    void validate() const;  // throws std::invalid_argument
};

struct ResultRow {
    std::string regime;
    int modulation = 0, block_side = 0, hops = 0;
    double snr_db = 0.0;
    std::string detector;
    double mse = 0.0, ser = 0.0, ber = 0.0, mean_snr_eq = 0.0;
    long long trials = 0;
    double wall_time_ms = 0.0;  // decode time; kept out of the CSV so bytes
                                // are a pure function of (config, seed)
    bool skipped = false;
    std::string note;
};

// One row per (grid point x detector); deterministic given (config, seed).
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

// payload fraction N^2 k / (N^2 k + b_csi), k = log2(M)
double utilization(int block_side, int modulation, int b_csi);

struct UtilizationRow {
    int block_side = 0, modulation = 0, b_csi = 0;
    double eta = 0.0;
    bool meets_target = false;
    bool flagged = false;  // a design point that misses the target
};

// Design points the table checks against the target: N >= 20 for M = 16 and
// N >= 12 for M = 256. Rows at a design point that fall short are flagged
// rather than rounded up.
std::vector<UtilizationRow> utilization_table(const std::vector<int>& block_sides,
                                              const std::vector<int>& modulations,
                                              const std::vector<int>& b_csi_values,
                                              double target = 0.95);

std::string csv_string(const std::vector<ResultRow>& rows);
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> parse_csv_string(const std::string& text);
std::vector<ResultRow> parse_csv(const std::string& path);

// One file per (metric, varying axis, series); gnuplot-style two columns.
void emit_plotdata(const std::vector<ResultRow>& rows, const std::string& dir);

ExperimentConfig load_config(const std::string& path);  // JSON

// Trains (or loads) the eps-prediction model the config describes for the
// given modulation order and hop count. Exposed for the `train` subcommand.
MlpDenoiser train_denoiser(const ExperimentConfig& cfg, int modulation, int hops,
                           std::vector<double>* epoch_loss = nullptr);

}  // namespace afdim
