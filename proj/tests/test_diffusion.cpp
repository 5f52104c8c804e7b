#include <doctest.h>

#include <cmath>

#include "afdim/diffusion.hpp"
#include "afdim/signal.hpp"
#include "testutil.hpp"

using namespace afdim;

TEST_SUITE_BEGIN("diffusion");

TEST_CASE("alpha_from_snr arithmetic") {
    const VpStep zero = alpha_from_snr(0.0);
    CHECK(zero.alpha == 0.0);
    CHECK(zero.beta == 1.0);

    const VpStep one = alpha_from_snr(1.0);
    CHECK(one.alpha == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

    const VpStep three = alpha_from_snr(3.0);
    CHECK(three.alpha * three.alpha == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(three.alpha * three.alpha + three.beta == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(alpha_from_snr(-0.1), std::invalid_argument);
}

TEST_CASE("alpha/snr round trip on [0, 1)") {
    Rng rng(12);
    for (int i = 0; i < 1000; ++i) {
        const double alpha = rng.uniform() * 0.999;
        const double back = alpha_from_snr(snr_from_alpha(alpha)).alpha;
        CHECK(std::abs(back - alpha) < 1e-12);
    }
}

TEST_CASE("collapse products and permutation invariance") {
    const CollapsedChannel single = collapse({{0.9, 1.0 - 0.81}});
    CHECK(single.alpha_bar == doctest::Approx(0.9));
    CHECK(single.gamma == doctest::Approx(0.81 / 0.19).epsilon(1e-12));

    const CollapsedChannel pair = collapse({{0.9, 0.19}, {0.8, 0.36}});
    CHECK(pair.alpha_bar == doctest::Approx(0.72).epsilon(1e-15));

    const CollapsedChannel swapped = collapse({{0.8, 0.36}, {0.9, 0.19}});
    CHECK(pair.alpha_bar == swapped.alpha_bar);
    CHECK(pair.gamma == swapped.gamma);
}

TEST_CASE("forward_jump endpoints and variance bookkeeping") {
    Rng rng(7);
    const Constellation c = build_constellation(4);
    const SymbolBlock x0 = draw_block(c, 64, rng);

    const ForwardSample clean = forward_jump(x0, 1.0, rng);
    for (std::size_t i = 0; i < x0.samples.size(); ++i)
        CHECK(clean.block.samples[i] == x0.samples[i]);
    CHECK(clean.noise.size() == x0.samples.size());

    const ForwardSample half = forward_jump(x0, 0.5, rng);
    double p = 0.0;
    for (const cplx& x : half.block.samples) p += std::norm(x);
    p /= static_cast<double>(half.block.samples.size());
    // E|x_t|^2 = 0.5 E|x0|^2 + 0.5 = 1 for unit-power sources
    CHECK(std::abs(p - 1.0) < 5.0 * std::sqrt(2.0 / half.block.samples.size()));

    CHECK_THROWS_AS(forward_jump(x0, 0.0, rng), std::invalid_argument);
}

TEST_CASE("sequential recursion matches the matched single jump") {
    Rng rng(21);
    const Constellation c = build_constellation(4);
    const SymbolBlock x0 = draw_block(c, 140, rng);  // ~2e4 samples
    const int hops = 7;

    std::vector<VpStep> steps;
    double amp = 1.0;
    for (int t = 0; t < hops; ++t) {
        steps.push_back(alpha_from_snr(rng.uniform_range(0.5, 20.0)));
        amp *= steps.back().alpha;
    }
    CHECK(std::sqrt(amp * amp) == amp);  // the jump reproduces the mean factor exactly

    // sequential chain
    SymbolBlock seq = x0;
    for (const VpStep& s : steps)
        for (cplx& x : seq.samples)
            x = s.alpha * x + std::sqrt(1.0 - s.alpha * s.alpha) * rng.cgaussian();

    const ForwardSample jump = forward_jump(x0, amp * amp, rng);

    // residuals of both routes: same mean (zero), same variance within MC error
    std::vector<double> r_seq, r_jump;
    for (std::size_t i = 0; i < x0.samples.size(); ++i) {
        const cplx a = seq.samples[i] - amp * x0.samples[i];
        const cplx b = jump.block.samples[i] - amp * x0.samples[i];
        r_seq.push_back(a.real());
        r_seq.push_back(a.imag());
        r_jump.push_back(b.real());
        r_jump.push_back(b.imag());
    }
    const auto ms = testutil::moments(r_seq);
    const auto mj = testutil::moments(r_jump);
    CHECK(std::abs(ms.mean) < 4.0 * ms.se_mean());
    CHECK(std::abs(mj.mean) < 4.0 * mj.se_mean());
    const double se_var = ms.var * std::sqrt(2.0 / r_seq.size()) * std::sqrt(2.0);
    CHECK(std::abs(ms.var - mj.var) < 3.0 * se_var);

    // normality of the sequential route's standardized residual
    const double sd = std::sqrt((1.0 - amp * amp) / 2.0);
    for (double& v : r_seq) v /= sd;
    CHECK(testutil::ks_statistic_normal(r_seq) < testutil::ks_critical_1pct(r_seq.size()));
}

TEST_CASE("schedule_from_stats values") {
    SufficientStats stats;
    stats.mu = cplx(1.0, 0.0);
    stats.v = 1.0;  // snr_eq = 1

    const ReverseSchedule one = schedule_from_stats(stats, 1);
    CHECK(one.abar[0] == 1.0);
    CHECK(one.abar[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(one.sigma[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));

    const ReverseSchedule two = schedule_from_stats(stats, 2);
    CHECK(two.abar[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(two.abar[2] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(two.lambda[2] == doctest::Approx(0.0).epsilon(1e-12));  // log(snr_eq)

    // strictly decreasing
    for (int t = 1; t <= two.steps; ++t) CHECK(two.abar[t] < two.abar[t - 1]);

    CHECK_THROWS_AS(schedule_from_stats(stats, 0), std::invalid_argument);
}

TEST_CASE("schedule endpoint depends only on snr_eq") {
    SufficientStats a, b;
    a.mu = cplx(0.3, -0.4);  // |mu|^2 = 0.25
    a.v = 0.05;              // snr_eq = 5
    b.mu = cplx(0.5, 0.0);
    b.v = 0.05 * (0.25 / 0.25);
    b.v = 0.25 / 5.0;        // same snr_eq = 5

    const ReverseSchedule s10 = schedule_from_stats(a, 10);
    const ReverseSchedule s100 = schedule_from_stats(a, 100);
    CHECK(s10.abar[10] == s100.abar[100]);  // bit-exact endpoint
    CHECK(s10.abar[10] == schedule_from_stats(b, 25).abar[25]);
}

TEST_CASE("init_reverse_state lies on the schedule manifold") {
    Rng rng(33);
    const Constellation c = build_constellation(4);
    const SymbolBlock x0 = draw_block(c, 316, rng);

    SufficientStats stats;
    stats.mu = cplx(0.3, 0.2);
    stats.v = std::norm(stats.mu);  // snr_eq = 1

    // synthesize x_H = mu x0 + sqrt(v) z
    SymbolBlock xh = x0;
    for (cplx& x : xh.samples) x = stats.mu * x + std::sqrt(stats.v) * rng.cgaussian();

    const SymbolBlock state = init_reverse_state(xh, stats);
    const double amp = std::sqrt(0.5);
    std::vector<double> resid;
    for (std::size_t i = 0; i < x0.samples.size(); ++i) {
        const cplx r = state.samples[i] - amp * x0.samples[i];
        resid.push_back(r.real());
        resid.push_back(r.imag());
    }
    const auto m = testutil::moments(resid);
    CHECK(std::abs(m.mean) < 4.0 * m.se_mean());
    const double se_var = 0.25 * std::sqrt(2.0 / resid.size());
    CHECK(std::abs(m.var - 0.25) < 3.0 * se_var);  // noise fraction 1 - abar = 0.5, per axis 0.25

    SufficientStats zero;
    zero.mu = cplx(0.0, 0.0);
    zero.v = 1.0;
    CHECK_THROWS_AS(init_reverse_state(xh, zero), std::invalid_argument);
}

TEST_CASE("equalization removes a common phase rotation") {
    Rng rng(35);
    const Constellation c = build_constellation(16);
    const SymbolBlock x0 = draw_block(c, 8, rng);
    SufficientStats stats;
    stats.mu = cplx(0.4, -0.1);
    stats.v = 0.02;

    SymbolBlock xh = x0;
    for (cplx& x : xh.samples) x = stats.mu * x + std::sqrt(stats.v) * rng.cgaussian();
    const SymbolBlock base = init_reverse_state(xh, stats);

    const cplx rot = std::polar(1.0, 1.234);
    SymbolBlock xh_rot = xh;
    for (cplx& x : xh_rot.samples) x *= rot;
    SufficientStats stats_rot = stats;
    stats_rot.mu *= rot;
    const SymbolBlock rotated = init_reverse_state(xh_rot, stats_rot);

    for (std::size_t i = 0; i < base.samples.size(); ++i)
        CHECK(std::abs(base.samples[i] - rotated.samples[i]) < 1e-12);
}

TEST_SUITE_END();
