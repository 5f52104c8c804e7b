#include <doctest.h>

#include <cmath>
#include <complex>

#include "afdim/channel.hpp"
#include "afdim/signal.hpp"
#include "testutil.hpp"

using namespace afdim;

namespace {

HopConfig awgn_hop(double noise_variance, double cap = 1.0) {
    HopConfig cfg;
    cfg.fading = FadingModel::unit_gain;
    cfg.noise_variance = noise_variance;
    cfg.power_cap = cap;
    return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("channel");

TEST_CASE("draw_hop unit gain without path loss") {
    Rng rng(1);
    const HopConfig cfg = awgn_hop(1.0);
    CHECK(draw_hop(cfg, rng) == cplx(1.0, 0.0));
}

TEST_CASE("path loss reference attenuation") {
    Rng rng(1);
    HopConfig cfg = awgn_hop(1.0);
    cfg.d_min = cfg.d_max = 1.0;
    cfg.path_loss_exponent = 2.0;
    cfg.ref_loss_db_at_1m = 10.0;
    const cplx h = draw_hop(cfg, rng);
    CHECK(std::norm(h) == doctest::Approx(0.1).epsilon(1e-12));

    cfg.d_min = cfg.d_max = 2.0;  // 2 m at exponent 2: another factor 4
    CHECK(std::norm(draw_hop(cfg, rng)) == doctest::Approx(0.025).epsilon(1e-12));
}

TEST_CASE("rician fades have unit mean power") {
    Rng rng(77);
    HopConfig cfg = awgn_hop(1.0);
    cfg.fading = FadingModel::rician;
    cfg.rician_k_db = 15.0;  // K = 10^1.5 ~ 31.62 linear
    const int n = 100000;
    double p = 0.0;
    for (int i = 0; i < n; ++i) p += std::norm(draw_hop(cfg, rng));
    p /= n;
    // var|f|^2 = (1 + 2K) / (1 + K)^2 for a unit-power Rician fade
    const double k = std::pow(10.0, 1.5);
    const double sigma = std::sqrt((1.0 + 2.0 * k) / ((1.0 + k) * (1.0 + k)) / n);
    CHECK(std::abs(p - 1.0) < 3.0 * sigma);
}

TEST_CASE("relay gain meets the cap with equality") {
    CHECK(relay_gain(cplx(1.0, 0.0), 1.0, 1.0, 2.0) == doctest::Approx(1.0));
    CHECK(relay_gain(cplx(2.0, 0.0), 1.0, 1e-12, 1.0) == doctest::Approx(0.5).epsilon(1e-6));

    // Monte-Carlo output power against the cap
    Rng rng(9);
    const Constellation c = build_constellation(4);
    const HopConfig cfg = awgn_hop(0.7, 1.3);
    const int n = 100000;
    double p = 0.0;
    SymbolBlock blk = draw_block(c, 316, rng);  // ~1e5 samples
    const ChainOutput out = propagate_chain(blk, {cfg}, rng);
    for (const cplx& x : out.block.samples) p += std::norm(x);
    p /= static_cast<double>(out.block.samples.size());
    const double sigma = 1.3 * std::sqrt(2.0 / n);  // |x|^2 has ~2 var units here
    CHECK(std::abs(p - 1.3) < 3.0 * sigma);
}

TEST_CASE("noiseless hop is the identity with floored v") {
    Rng rng(2);
    const Constellation c = build_constellation(4);
    const SymbolBlock blk = draw_block(c, 4, rng);
    HopConfig cfg = awgn_hop(1e-30, 1.0 + 1e-30);
    const ChainOutput out = propagate_chain(blk, {cfg}, rng);
    CHECK(out.stats.v >= 1e-300);
    CHECK(std::abs(out.stats.mu - cplx(1.0, 0.0)) < 1e-9);
    for (std::size_t i = 0; i < blk.samples.size(); ++i)
        CHECK(std::abs(out.block.samples[i] - blk.samples[i]) < 1e-9);
    CHECK_THROWS_AS(propagate_chain(blk, {}, rng), std::invalid_argument);
}

TEST_CASE("two deterministic hops: exact stats and sample covariance") {
    // h = 1, sigma^2 = 1, cap = 1 gives g = 1/sqrt(2) per hop
    Rng rng(3);
    const Constellation c = build_constellation(4);
    const std::vector<HopConfig> hops(2, awgn_hop(1.0));

    const SymbolBlock blk = draw_block(c, 316, rng);
    const ChainOutput out = propagate_chain(blk, hops, rng);
    CHECK(out.hops[0].g == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(out.stats.mu.real() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(out.stats.v == doctest::Approx(0.75).epsilon(1e-12));

    // residual X_H - mu X_0 should have mean 0 and variance v
    std::vector<double> re, im;
    for (std::size_t i = 0; i < blk.samples.size(); ++i) {
        const cplx r = out.block.samples[i] - out.stats.mu * blk.samples[i];
        re.push_back(r.real());
        im.push_back(r.imag());
    }
    const auto mre = testutil::moments(re);
    const auto mim = testutil::moments(im);
    CHECK(std::abs(mre.mean) < 4.0 * mre.se_mean());
    CHECK(std::abs(mim.mean) < 4.0 * mim.se_mean());
    const double var = mre.var + mim.var;
    const double var_se = out.stats.v * std::sqrt(2.0 / re.size());
    CHECK(std::abs(var - out.stats.v) < 3.0 * var_se);
}

TEST_CASE("ten-hop chain: residual variance consistency and normality") {
    Rng rng(4);
    const Constellation c = build_constellation(16);
    const std::vector<HopConfig> hops(10, awgn_hop(0.05));
    const SymbolBlock blk = draw_block(c, 316, rng);
    const ChainOutput out = propagate_chain(blk, hops, rng);

    std::vector<double> comps;
    double power = 0.0;
    cplx second(0.0, 0.0);
    const double scale = std::sqrt(out.stats.v / 2.0);
    for (std::size_t i = 0; i < blk.samples.size(); ++i) {
        const cplx r = out.block.samples[i] - out.stats.mu * blk.samples[i];
        power += std::norm(r);
        second += r * r;
        comps.push_back(r.real() / scale);
        comps.push_back(r.imag() / scale);
    }
    power /= static_cast<double>(blk.samples.size());
    CHECK(power / out.stats.v > 0.97);
    CHECK(power / out.stats.v < 1.03);

    // circular symmetry: E[r^2] ~ 0
    second /= static_cast<double>(blk.samples.size());
    CHECK(std::abs(second) < 5.0 * out.stats.v / std::sqrt(blk.samples.size()));

    // standardized components pass a KS normality check at 1%
    const double d = testutil::ks_statistic_normal(comps);
    CHECK(d < testutil::ks_critical_1pct(comps.size()));
}

TEST_CASE("per-hop snr matches its definition") {
    Rng rng(6);
    const Constellation c = build_constellation(4);
    std::vector<HopConfig> hops;
    for (int t = 0; t < 5; ++t) {
        HopConfig cfg;
        cfg.fading = FadingModel::rician;
        cfg.rician_k_db = 15.0;
        cfg.d_min = 1.0;
        cfg.d_max = 2.0;
        cfg.path_loss_exponent = 2.0;
        cfg.ref_loss_db_at_1m = 10.0;
        cfg.noise_variance = 0.01 * (t + 1);
        hops.push_back(cfg);
    }
    const SymbolBlock blk = draw_block(c, 4, rng);
    const ChainOutput out = propagate_chain(blk, hops, rng);
    double input_power = 1.0;
    for (std::size_t t = 0; t < hops.size(); ++t) {
        const HopRealization& hop = out.hops[t];
        CHECK(hop.input_power == input_power);
        CHECK(hop.snr_in ==
              std::norm(hop.h) * hop.input_power / hop.noise_variance);  // exact recompute
        input_power = hops[t].power_cap;
    }
}

TEST_CASE("quantize_stats fixed points and fine-grained accuracy") {
    QuantRanges ranges;
    const double step = 2.0 * ranges.mu_abs_max / 7.0;  // 3 bits: 2^3 - 1 steps
    SufficientStats s;
    s.mu = cplx(-ranges.mu_abs_max + 5.0 * step, -ranges.mu_abs_max + 2.0 * step);
    s.v = 1.0;

    const SufficientStats q2 = quantize_stats(s, 3, 3, 8, ranges);
    CHECK(q2.mu.real() == doctest::Approx(s.mu.real()).epsilon(1e-14));
    CHECK(q2.mu.imag() == doctest::Approx(s.mu.imag()).epsilon(1e-14));

    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        SufficientStats t;
        t.mu = cplx(rng.uniform_range(-1.0, 1.0), rng.uniform_range(-1.0, 1.0));
        t.v = std::pow(10.0, rng.uniform_range(-6.0, 0.5));
        const SufficientStats q = quantize_stats(t, 32, 32, 32, ranges);
        CHECK(std::abs(q.mu.real() - t.mu.real()) < 1e-6);
        CHECK(std::abs(q.mu.imag() - t.mu.imag()) < 1e-6);
        CHECK(std::abs(std::log(q.v) - std::log(t.v)) < 1e-6);
    }
    CHECK_THROWS_AS(quantize_stats(s, 1, 8, 8, ranges), std::invalid_argument);
}

TEST_CASE("hop config validation") {
    HopConfig cfg = awgn_hop(1.0);
    cfg.noise_variance = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = awgn_hop(1.0);
    cfg.d_max = 0.5;  // below d_min
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_SUITE_END();
