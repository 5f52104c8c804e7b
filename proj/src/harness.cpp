#include "afdim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "afdim/detect.hpp"
#include "afdim/signal.hpp"

namespace afdim {

namespace {

constexpr std::uint64_t kTrainTag = 0x747261696eULL;  // rng-stream domain separator

std::string regime_name(Regime r) { return r == Regime::awgn_only ? "awgn_only" : "rician"; }

std::string fmt9(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

std::string sanitize_note(std::string s) {
    for (char& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    return s;
}

struct GridPoint {
    int modulation, block_side, hops;
    double snr_db;
};

ChainSpace chain_space_for(const ExperimentConfig& cfg, int hops) {
    ChainSpace space;
    space.rician = cfg.regime == Regime::rician;
    space.hops = hops;
    space.snr_eq_db_min = cfg.training.snr_db_min;
    space.snr_eq_db_max = cfg.training.snr_db_max;
    space.rician_k_db = cfg.rician.k_db;
    space.d_min = cfg.rician.d_min;
    space.d_max = cfg.rician.d_max;
    space.path_loss_exponent = cfg.rician.path_loss_exponent;
    space.ref_loss_db_at_1m = cfg.rician.ref_loss_db_at_1m;
    space.power_cap = cfg.power_cap;
    return space;
}

struct Accumulator {
    double se = 0.0;
    long long sym_errors = 0, bit_errors = 0, symbols = 0;
    double decode_ns = 0.0;

    void add(const ErrorReport& r, int bits_per_symbol) {
        se += r.mse * static_cast<double>(r.trials);
        sym_errors += std::llround(r.ser * static_cast<double>(r.trials));
        bit_errors += std::llround(r.ber * static_cast<double>(r.trials) * bits_per_symbol);
        symbols += r.trials;
    }
};

}  // namespace

void ExperimentConfig::validate() const {
    if (modulation_orders.empty() || block_sides.empty() || hop_counts.empty() || snr_db.empty())
        throw std::invalid_argument("config: sweep lists must be non-empty");
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (detectors.empty()) throw std::invalid_argument("config: no detectors configured");
    for (const std::string& d : detectors)
        if (d != "ml" && d != "ddim-bayes" && d != "ddim-learned")
            throw std::invalid_argument("config: unknown detector '" + d + "'");
    for (int m : modulation_orders) build_constellation(m);  // validates the order
    for (int n : block_sides)
        if (n < 1) throw std::invalid_argument("config: block side must be >= 1");
    for (int h : hop_counts)
        if (h < 1) throw std::invalid_argument("config: hop count must be >= 1");
    if (reverse_steps < 0) throw std::invalid_argument("config: reverse steps must be >= 0");
    if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
    if (!(power_cap > 0.0)) throw std::invalid_argument("config: power cap must be > 0");
}

MlpDenoiser train_denoiser(const ExperimentConfig& cfg, int modulation, int hops,
                           std::vector<double>* epoch_loss) {
    if (!cfg.training.model_path.empty()) return MlpDenoiser::load(cfg.training.model_path);

    const Constellation c = build_constellation(modulation);
    const ChainSpace space = chain_space_for(cfg, hops);
    Rng rng(derive_seed(cfg.seed, kTrainTag,
                        static_cast<std::uint64_t>(modulation) * 1000 + hops));
    const std::vector<TrainingSample> data =
        generate_training_set(space, c, cfg.training.samples, rng);

    MlpDenoiser model(cfg.training.hidden_width, rng);
    const MlpDenoiser::TrainReport report =
        model.train(data, cfg.training.epochs, cfg.training.batch, cfg.training.lr, rng);
    if (epoch_loss) *epoch_loss = report.epoch_loss;
    return model;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();

    std::vector<GridPoint> grid;
    for (int m : cfg.modulation_orders)
        for (int n : cfg.block_sides)
            for (int h : cfg.hop_counts)
                for (double snr : cfg.snr_db) grid.push_back({m, n, h, snr});

    // models are trained up front; the sweep only reads them
    const bool wants_learned =
        std::find(cfg.detectors.begin(), cfg.detectors.end(), "ddim-learned") !=
        cfg.detectors.end();
    std::map<std::pair<int, int>, MlpDenoiser> models;
    if (wants_learned)
        for (int m : cfg.modulation_orders)
            for (int h : cfg.hop_counts)
                if (!models.count({m, h})) models.emplace(std::make_pair(m, h),
                                                          train_denoiser(cfg, m, h));

    auto run_point = [&](std::size_t g) -> std::vector<ResultRow> {
        const GridPoint& gp = grid[g];
        std::vector<ResultRow> rows(cfg.detectors.size());
        for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
            ResultRow& row = rows[d];
            row.regime = regime_name(cfg.regime);
            row.modulation = gp.modulation;
            row.block_side = gp.block_side;
            row.hops = gp.hops;
            row.snr_db = gp.snr_db;
            row.detector = cfg.detectors[d];
            row.trials = cfg.trials;
        }
        try {
            const Constellation c = build_constellation(gp.modulation);
            const ChainSpace space = chain_space_for(cfg, gp.hops);
            const double target = std::pow(10.0, gp.snr_db / 10.0);
            if (!std::isfinite(target) || !(target > 0.0))
                throw std::runtime_error("snr target out of range");
            const std::vector<HopConfig> configs =
                cfg.snr_axis == SnrAxis::snr_eq ? make_chain_configs(space, target)
                                                : make_chain_configs_per_hop(space, target);

            const int steps = cfg.reverse_steps > 0 ? cfg.reverse_steps : gp.hops;
            const MlpDenoiser* model = nullptr;
            if (wants_learned) model = &models.at({gp.modulation, gp.hops});

            std::vector<Accumulator> acc(cfg.detectors.size());
            double snr_eq_sum = 0.0;
            for (int trial = 0; trial < cfg.trials; ++trial) {
                Rng rng(derive_seed(cfg.seed, g, static_cast<std::uint64_t>(trial)));
                const SymbolBlock block = draw_block(c, gp.block_side, rng);
                const ChainOutput out = propagate_chain(block, configs, rng);
                snr_eq_sum += out.stats.snr_eq();
                SufficientStats stats = out.stats;
                if (cfg.quant.enabled)
                    stats = quantize_stats(stats, cfg.quant.bits_re, cfg.quant.bits_im,
                                           cfg.quant.bits_v, cfg.quant.ranges);

                for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
                    const auto t0 = std::chrono::steady_clock::now();
                    SymbolBlock est;
                    if (cfg.detectors[d] == "ml") {
                        est = ml_decode(out.block, stats, c);
                    } else {
                        DetectorConfig dc;
                        dc.reverse_steps = steps;
                        dc.constellation = &c;
                        if (cfg.detectors[d] == "ddim-learned") {
                            dc.denoiser = DenoiserKind::learned;
                            dc.model = model;
                        }
                        est = ddim_decode(out.block, stats, dc);
                    }
                    const auto t1 = std::chrono::steady_clock::now();
                    acc[d].decode_ns +=
                        std::chrono::duration<double, std::nano>(t1 - t0).count();
                    acc[d].add(compute_errors(block, est, c), c.bits_per_symbol());
                }
            }
            for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
                ResultRow& row = rows[d];
                const Accumulator& a = acc[d];
                row.mse = a.se / static_cast<double>(a.symbols);
                row.ser = static_cast<double>(a.sym_errors) / static_cast<double>(a.symbols);
                row.ber = static_cast<double>(a.bit_errors) /
                          (static_cast<double>(a.symbols) * c.bits_per_symbol());
                row.mean_snr_eq = snr_eq_sum / cfg.trials;
                row.wall_time_ms = a.decode_ns / 1e6;
            }
        } catch (const std::exception& e) {
            for (ResultRow& row : rows) {
                row.skipped = true;
                row.note = sanitize_note(e.what());
            }
        }
        return rows;
    };

    std::vector<std::vector<ResultRow>> per_point(grid.size());
    const int n_threads = std::min<std::size_t>(cfg.threads, grid.size());
    if (n_threads <= 1) {
        for (std::size_t g = 0; g < grid.size(); ++g) per_point[g] = run_point(g);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t g = next.fetch_add(1);
                if (g >= grid.size()) break;
                per_point[g] = run_point(g);
            }
        };
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads - 1; ++i) pool.emplace_back(worker);
        worker();
        for (std::thread& t : pool) t.join();
    }

    std::vector<ResultRow> rows;  // merged in grid order, never completion order
    for (const auto& pr : per_point) rows.insert(rows.end(), pr.begin(), pr.end());
    return rows;
}

double utilization(int block_side, int modulation, int b_csi) {
    if (block_side < 1 || modulation < 2 || b_csi < 0)
        throw std::invalid_argument("utilization: invalid arguments");
    int k = 0;
    while ((1 << k) < modulation) ++k;
    if ((1 << k) != modulation)
        throw std::invalid_argument("utilization: modulation must be a power of two");
    const double payload = static_cast<double>(block_side) * block_side * k;
    return payload / (payload + b_csi);
}

std::vector<UtilizationRow> utilization_table(const std::vector<int>& block_sides,
                                              const std::vector<int>& modulations,
                                              const std::vector<int>& b_csi_values,
                                              double target) {
    // design points: the smallest block side expected to reach the target
    const std::map<int, int> design_points{{16, 20}, {256, 12}};
    std::vector<UtilizationRow> table;
    for (int m : modulations)
        for (int n : block_sides)
            for (int b : b_csi_values) {
                UtilizationRow row;
                row.block_side = n;
                row.modulation = m;
                row.b_csi = b;
                row.eta = utilization(n, m, b);
                row.meets_target = row.eta >= target;
                auto it = design_points.find(m);
                row.flagged = it != design_points.end() && it->second == n && !row.meets_target;
                table.push_back(row);
            }
    return table;
}

std::string csv_string(const std::vector<ResultRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("csv_string: no rows");
    std::ostringstream os;
    os << "regime,M,N,H,snr_db,detector,mse,ser,ber,mean_snr_eq,trials,status,note\n";
    for (const ResultRow& r : rows) {
        os << r.regime << ',' << r.modulation << ',' << r.block_side << ',' << r.hops << ','
           << fmt9(r.snr_db) << ',' << r.detector << ',' << fmt9(r.mse) << ',' << fmt9(r.ser)
           << ',' << fmt9(r.ber) << ',' << fmt9(r.mean_snr_eq) << ',' << r.trials << ','
           << (r.skipped ? "skipped" : "ok") << ',' << sanitize_note(r.note) << '\n';
    }
    return os.str();
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    const std::string text = csv_string(rows);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<ResultRow> parse_csv_string(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) ||
        line != "regime,M,N,H,snr_db,detector,mse,ser,ber,mean_snr_eq,trials,status,note")
        throw std::runtime_error("csv: unrecognized header");

    std::vector<ResultRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (int i = 0; i < 12; ++i) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) throw std::runtime_error("csv: short row");
            f.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        f.push_back(line.substr(start));  // note (last field, may be empty)

        ResultRow r;
        r.regime = f[0];
        r.modulation = std::stoi(f[1]);
        r.block_side = std::stoi(f[2]);
        r.hops = std::stoi(f[3]);
        r.snr_db = std::stod(f[4]);
        r.detector = f[5];
        r.mse = std::stod(f[6]);
        r.ser = std::stod(f[7]);
        r.ber = std::stod(f[8]);
        r.mean_snr_eq = std::stod(f[9]);
        r.trials = std::stoll(f[10]);
        r.skipped = f[11] == "skipped";
        r.note = f[12];
        rows.push_back(r);
    }
    return rows;
}

std::vector<ResultRow> parse_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_csv_string(ss.str());
}

void emit_plotdata(const std::vector<ResultRow>& rows, const std::string& dir) {
    if (rows.empty()) throw std::invalid_argument("emit_plotdata: no rows");
    std::filesystem::create_directories(dir);

    struct AxisDef {
        const char* name;
        std::function<double(const ResultRow&)> get;
    };
    const std::vector<AxisDef> axes{
        {"snr", [](const ResultRow& r) { return r.snr_db; }},
        {"M", [](const ResultRow& r) { return r.modulation; }},
        {"N", [](const ResultRow& r) { return r.block_side; }},
        {"H", [](const ResultRow& r) { return r.hops; }},
    };
    const std::vector<std::pair<const char*, std::function<double(const ResultRow&)>>> metrics{
        {"mse", [](const ResultRow& r) { return r.mse; }},
        {"ser", [](const ResultRow& r) { return r.ser; }},
        {"ber", [](const ResultRow& r) { return r.ber; }},
    };

    std::vector<const ResultRow*> ok;
    for (const ResultRow& r : rows)
        if (!r.skipped) ok.push_back(&r);
    if (ok.empty()) return;

    for (std::size_t a = 0; a < axes.size(); ++a) {
        std::vector<double> values;
        for (const ResultRow* r : ok) values.push_back(axes[a].get(*r));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        const bool only_axis_with_one_value = a == 0;  // snr files emitted even when flat
        if (values.size() < 2 && !only_axis_with_one_value) continue;

        for (const auto& [mname, mget] : metrics) {
            // series key: the fixed axes plus the detector
            std::map<std::string, std::vector<std::pair<double, double>>> series;
            for (const ResultRow* r : ok) {
                std::ostringstream key;
                for (std::size_t b = 0; b < axes.size(); ++b)
                    if (b != a) key << '_' << axes[b].name << fmt9(axes[b].get(*r));
                key << '_' << r->detector;
                series[key.str()].push_back({axes[a].get(*r), mget(*r)});
            }
            for (auto& [key, pts] : series) {
                std::sort(pts.begin(), pts.end());
                const std::string path =
                    dir + "/plot_" + mname + "_vs_" + axes[a].name + key + ".dat";
                std::ofstream f(path, std::ios::binary);
                if (!f) throw std::runtime_error("cannot open for writing: " + path);
                f << "# " << axes[a].name << ' ' << mname << '\n';
                for (const auto& [x, y] : pts) f << fmt9(x) << ' ' << fmt9(y) << '\n';
            }
        }
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j;
    f >> j;

    ExperimentConfig cfg;
    const std::string regime = j.value("regime", "awgn_only");
    if (regime == "awgn_only")
        cfg.regime = Regime::awgn_only;
    else if (regime == "rician")
        cfg.regime = Regime::rician;
    else
        throw std::runtime_error("config: unknown regime '" + regime + "'");

    if (j.contains("M")) cfg.modulation_orders = j["M"].get<std::vector<int>>();
    if (j.contains("N")) cfg.block_sides = j["N"].get<std::vector<int>>();
    if (j.contains("H")) cfg.hop_counts = j["H"].get<std::vector<int>>();
    if (j.contains("snr_db")) cfg.snr_db = j["snr_db"].get<std::vector<double>>();

    const std::string axis = j.value("snr_axis", "snr_eq");
    if (axis == "snr_eq")
        cfg.snr_axis = SnrAxis::snr_eq;
    else if (axis == "per_hop")
        cfg.snr_axis = SnrAxis::per_hop;
    else
        throw std::runtime_error("config: unknown snr_axis '" + axis + "'");

    cfg.trials = j.value("trials", cfg.trials);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("detectors")) cfg.detectors = j["detectors"].get<std::vector<std::string>>();
    cfg.reverse_steps = j.value("steps", cfg.reverse_steps);
    cfg.power_cap = j.value("power_cap", cfg.power_cap);
    cfg.out_dir = j.value("out", cfg.out_dir);
    cfg.threads = j.value("threads", cfg.threads);

    if (j.contains("quantization")) {
        const auto& q = j["quantization"];
        cfg.quant.enabled = q.value("enabled", true);
        cfg.quant.bits_re = q.value("bits_re", cfg.quant.bits_re);
        cfg.quant.bits_im = q.value("bits_im", cfg.quant.bits_im);
        cfg.quant.bits_v = q.value("bits_v", cfg.quant.bits_v);
        cfg.quant.ranges.mu_abs_max = q.value("mu_range", cfg.quant.ranges.mu_abs_max);
        cfg.quant.ranges.v_min = q.value("v_min", cfg.quant.ranges.v_min);
        cfg.quant.ranges.v_max = q.value("v_max", cfg.quant.ranges.v_max);
    }
    if (j.contains("rician")) {
        const auto& r = j["rician"];
        cfg.rician.k_db = r.value("k_db", cfg.rician.k_db);
        cfg.rician.d_min = r.value("d_min", cfg.rician.d_min);
        cfg.rician.d_max = r.value("d_max", cfg.rician.d_max);
        cfg.rician.path_loss_exponent =
            r.value("path_loss_exponent", cfg.rician.path_loss_exponent);
        cfg.rician.ref_loss_db_at_1m = r.value("ref_loss_db_at_1m", cfg.rician.ref_loss_db_at_1m);
    }
    if (j.contains("training")) {
        const auto& t = j["training"];
        cfg.training.samples = t.value("samples", cfg.training.samples);
        cfg.training.epochs = t.value("epochs", cfg.training.epochs);
        cfg.training.batch = t.value("batch", cfg.training.batch);
        cfg.training.lr = t.value("lr", cfg.training.lr);
        cfg.training.hidden_width = t.value("hidden_width", cfg.training.hidden_width);
        cfg.training.snr_db_min = t.value("snr_db_min", cfg.training.snr_db_min);
        cfg.training.snr_db_max = t.value("snr_db_max", cfg.training.snr_db_max);
        cfg.training.model_path = t.value("model", cfg.training.model_path);
    }
    cfg.validate();
    return cfg;
}

}  // namespace afdim
