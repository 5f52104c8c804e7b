#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "afdim/harness.hpp"
#include "afdim/infotheory.hpp"
#include "afdim/poweralloc.hpp"

namespace {

int cmd_simulate(const std::string& config_path, std::uint64_t seed, bool seed_set,
                 const std::string& out_dir, const std::vector<std::string>& detectors,
                 int steps, int threads) {
    afdim::ExperimentConfig cfg = afdim::load_config(config_path);
    if (seed_set) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!detectors.empty()) cfg.detectors = detectors;
    if (steps >= 0) cfg.reverse_steps = steps;
    if (threads > 0) cfg.threads = threads;
    cfg.validate();

    const std::vector<afdim::ResultRow> rows = afdim::run_experiment(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    const std::string csv_path = cfg.out_dir + "/results.csv";
    afdim::emit_csv(rows, csv_path);
    afdim::emit_plotdata(rows, cfg.out_dir);

    long long skipped = 0;
    for (const auto& r : rows) skipped += r.skipped ? 1 : 0;
    std::printf("wrote %zu rows to %s (%lld skipped)\n", rows.size(), csv_path.c_str(), skipped);
    return 0;
}

int cmd_train(const std::string& config_path, std::uint64_t seed, bool seed_set,
              const std::string& out_path) {
    afdim::ExperimentConfig cfg = afdim::load_config(config_path);
    if (seed_set) cfg.seed = seed;
    cfg.training.model_path.clear();  // always train here

    std::vector<double> losses;
    const afdim::MlpDenoiser model =
        afdim::train_denoiser(cfg, cfg.modulation_orders.front(), cfg.hop_counts.front(),
                              &losses);
    for (std::size_t e = 0; e < losses.size(); ++e)
        std::printf("epoch %zu loss %.6g\n", e + 1, losses[e]);
    model.save(out_path);
    std::printf("saved model to %s\n", out_path.c_str());
    return 0;
}

int cmd_alloc(const std::string& config_path, std::vector<double> c, double p_total,
              std::vector<double> p_max) {
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw std::runtime_error("cannot open: " + config_path);
        nlohmann::json j;
        f >> j;
        c = j.at("c").get<std::vector<double>>();
        p_total = j.at("p_total").get<double>();
        if (j.contains("p_max")) p_max = j["p_max"].get<std::vector<double>>();
    }
    if (c.empty()) throw std::runtime_error("alloc: provide --config or --c/--p-total");

    const afdim::AllocationProblem prob(c, p_total, p_max);
    const afdim::AllocationResult res = afdim::solve(prob);
    std::printf("relay  c            p\n");
    for (std::size_t t = 0; t < res.p.size(); ++t)
        std::printf("%5zu  %-11.6g  %.9g\n", t, c[t], res.p[t]);
    double sum = 0.0;
    for (double p : res.p) sum += p;
    std::printf("sum p        %.9g (budget %.9g)\n", sum, p_total);
    std::printf("multiplier   %.9g\n", res.mu);
    std::printf("objective    %.9g\n", res.objective);
    std::printf("kkt residual %.3g\n", res.kkt_residual);
    if (prob.budget_exceeds_caps) std::printf("note: budget exceeds the caps; all relays saturated\n");
    return 0;
}

int cmd_mi(int modulation, bool gaussian, double gamma_db_max, int points,
           const std::string& out_path) {
    std::ostringstream os;
    os << "gamma,gamma_db,mmse,mi_nats,mi_bits\n";
    for (int i = 0; i < points; ++i) {
        const double db = -10.0 + (gamma_db_max + 10.0) * i / (points - 1);
        const double gamma = std::pow(10.0, db / 10.0);
        double mmse, mi;
        if (gaussian) {
            mmse = 1.0 / (1.0 + gamma);
            mi = afdim::mi_gaussian(gamma);
        } else {
            const afdim::Constellation c = afdim::build_constellation(modulation);
            mmse = afdim::mmse_discrete(c, gamma);
            mi = afdim::mi_via_immse(c, gamma);
        }
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g\n", gamma, db, mmse, mi,
                      mi / std::log(2.0));
        os << buf;
    }
    if (out_path.empty()) {
        std::fputs(os.str().c_str(), stdout);
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open for writing: " + out_path);
        f << os.str();
        std::printf("wrote %s\n", out_path.c_str());
    }
    return 0;
}

int cmd_util(const std::vector<int>& block_sides, const std::vector<int>& modulations,
             const std::vector<int>& bits) {
    const auto table = afdim::utilization_table(block_sides, modulations, bits);
    std::printf("   M    N  B_CSI      eta  >=0.95\n");
    for (const auto& row : table) {
        std::printf("%4d %4d  %5d  %.6f  %s%s\n", row.modulation, row.block_side, row.b_csi,
                    row.eta, row.meets_target ? "yes" : "no ",
                    row.flagged ? "  <-- design point misses the target" : "");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-hop AF relay simulation and diffusion-based detection toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir, out_path, model_out = "model.txt";
    std::uint64_t seed = 0;
    std::vector<std::string> detectors;
    int steps = -1, threads = 0;

    auto* sim = app.add_subcommand("simulate", "run a configured sweep and emit CSV/plot data");
    sim->add_option("--config", config_path, "experiment config (JSON)")->required();
    auto* sim_seed = sim->add_option("--seed", seed, "override the config seed");
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--detector", detectors, "detector(s): ml, ddim-bayes, ddim-learned");
    sim->add_option("--steps", steps, "reverse steps T (0 uses T = H)");
    sim->add_option("--threads", threads, "worker threads across grid points");

    auto* trn = app.add_subcommand("train", "train the eps-prediction denoiser");
    trn->add_option("--config", config_path, "experiment config (JSON)")->required();
    auto* trn_seed = trn->add_option("--seed", seed, "override the config seed");
    trn->add_option("--out", model_out, "checkpoint path");

    std::vector<double> alloc_c, alloc_pmax;
    double alloc_ptotal = 0.0;
    auto* alc = app.add_subcommand("alloc", "solve the relay power allocation");
    alc->add_option("--config", config_path, "problem JSON: {\"c\":[...],\"p_total\":x,\"p_max\":[...]}");
    alc->add_option("--c", alloc_c, "channel-to-noise ratios");
    alc->add_option("--p-total", alloc_ptotal, "total power budget");
    alc->add_option("--p-max", alloc_pmax, "per-relay caps");

    int mi_m = 4, mi_points = 41;
    bool mi_gauss = false;
    double mi_gamma_db_max = 30.0;
    auto* mi = app.add_subcommand("mi", "mmse / mutual-information curves");
    mi->add_option("--M", mi_m, "QAM order");
    mi->add_flag("--gaussian", mi_gauss, "Gaussian prior closed form instead of QAM");
    mi->add_option("--gamma-db-max", mi_gamma_db_max, "top of the gamma grid, dB");
    mi->add_option("--points", mi_points, "grid points")->check(CLI::Range(2, 100000));
    mi->add_option("--out", out_path, "CSV path (stdout when omitted)");

    std::vector<int> util_n{8, 12, 16, 20, 24, 32, 48, 64}, util_m{4, 16, 64, 256},
        util_b{80, 96};
    auto* utl = app.add_subcommand("util", "payload utilization table");
    utl->add_option("--N", util_n, "block sides");
    utl->add_option("--M", util_m, "QAM orders");
    utl->add_option("--B", util_b, "stats signaling bits");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(config_path, seed, !sim_seed->empty(), out_dir, detectors, steps,
                                threads);
        if (trn->parsed()) return cmd_train(config_path, seed, !trn_seed->empty(), model_out);
        if (alc->parsed()) return cmd_alloc(config_path, alloc_c, alloc_ptotal, alloc_pmax);
        if (mi->parsed()) return cmd_mi(mi_m, mi_gauss, mi_gamma_db_max, mi_points, out_path);
        if (utl->parsed()) return cmd_util(util_n, util_m, util_b);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
