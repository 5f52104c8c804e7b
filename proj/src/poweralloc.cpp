#include "afdim/poweralloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace afdim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double marginal(double c, double p) { return 1.0 / (p * (1.0 + c * p)); }

double clamped_sum(const AllocationProblem& prob, double mu, std::vector<double>* p_out) {
    double sum = 0.0;
    for (std::size_t t = 0; t < prob.c.size(); ++t) {
        const double p = std::min(p_of_mu(prob.c[t], mu), prob.p_max[t]);
        if (p_out) (*p_out)[t] = p;
        sum += p;
    }
    return sum;
}

}  // namespace

AllocationProblem::AllocationProblem(std::vector<double> c_in, double total,
                                     std::vector<double> p_max_in)
    : c(std::move(c_in)), p_total(total), p_max(std::move(p_max_in)) {
    if (c.empty()) throw std::invalid_argument("allocation problem: empty c");
    for (double ct : c)
        if (!(ct > 0.0) || !std::isfinite(ct))
            throw std::invalid_argument("allocation problem: c_t must be finite and > 0");
    if (!(p_total > 0.0)) throw std::invalid_argument("allocation problem: p_total must be > 0");
    if (p_max.empty()) p_max.assign(c.size(), kInf);
    if (p_max.size() != c.size())
        throw std::invalid_argument("allocation problem: c / p_max length mismatch");
    for (double pm : p_max)
        if (!(pm > 0.0)) throw std::invalid_argument("allocation problem: p_max_t must be > 0");

    double cap_sum = 0.0;
    for (double pm : p_max) cap_sum += pm;  // +inf propagates
    budget_exceeds_caps = std::isfinite(cap_sum) && cap_sum < p_total;
}

double allocation_objective(const AllocationProblem& prob, const std::vector<double>& p) {
    if (p.size() != prob.c.size())
        throw std::invalid_argument("allocation objective: length mismatch");
    double obj = 0.0;
    for (std::size_t t = 0; t < p.size(); ++t) {
        if (!(p[t] > 0.0)) return -kInf;
        const double s = prob.c[t] * p[t];
        obj += std::log(s / (1.0 + s));
    }
    return obj;
}

double p_of_mu(double c, double mu) {
    if (!(c > 0.0 && mu > 0.0)) throw std::invalid_argument("p_of_mu: c and mu must be > 0");
    return (std::sqrt(1.0 + 4.0 * c / mu) - 1.0) / (2.0 * c);
}

AllocationResult solve(const AllocationProblem& prob) {
    const std::size_t n = prob.c.size();
    AllocationResult res;
    res.p.assign(n, 0.0);

    auto finish = [&](double mu) {
        res.mu = mu;
        res.objective = allocation_objective(prob, res.p);
        res.kkt_residual = 0.0;
        for (std::size_t t = 0; t < n; ++t)
            if (res.p[t] < prob.p_max[t])  // interior (p > 0 always holds)
                res.kkt_residual =
                    std::max(res.kkt_residual, std::abs(marginal(prob.c[t], res.p[t]) - mu));
        return res;
    };

    // budget meets or exceeds the caps: every relay saturates
    double cap_sum = 0.0;
    for (double pm : prob.p_max) cap_sum += pm;
    if (std::isfinite(cap_sum) && cap_sum <= prob.p_total) {
        double mu = kInf;
        for (std::size_t t = 0; t < n; ++t) {
            res.p[t] = prob.p_max[t];
            mu = std::min(mu, marginal(prob.c[t], res.p[t]));
        }
        return finish(mu);
    }

    // uniform c and a feasible even split: the equal-split rule, exactly
    const double even = prob.p_total / static_cast<double>(n);
    bool uniform_c = true;
    for (double ct : prob.c) uniform_c = uniform_c && (ct == prob.c[0]);
    if (uniform_c && even <= *std::min_element(prob.p_max.begin(), prob.p_max.end())) {
        std::fill(res.p.begin(), res.p.end(), even);
        return finish(marginal(prob.c[0], even));
    }

    // Bisection bracket: p_of_mu decreases in both c and mu, so at mu_hi
    // solving p_of_mu(c_min, mu_hi) = p_total/n the clamped sum is <= p_total,
    // while at mu_hi * 1e-12 it exceeds p_total (caps cannot bind it below,
    // the all-capped case was handled above).
    const double c_min = *std::min_element(prob.c.begin(), prob.c.end());
    double mu_hi = 1.0 / (even * (1.0 + c_min * even));
    double mu_lo = mu_hi * 1e-12;
    for (int i = 0; i < 64 && clamped_sum(prob, mu_lo, nullptr) < prob.p_total; ++i)
        mu_lo *= 1e-3;

    const double tol = 1e-10 * prob.p_total;
    double mu_mid = mu_hi;
    for (int iter = 0; iter < 200; ++iter) {
        mu_mid = 0.5 * (mu_lo + mu_hi);
        const double sum = clamped_sum(prob, mu_mid, &res.p);
        if (std::abs(sum - prob.p_total) < tol) break;
        if (sum > prob.p_total)
            mu_lo = mu_mid;
        else
            mu_hi = mu_mid;
    }
    clamped_sum(prob, mu_mid, &res.p);
    return finish(mu_mid);
}

}  // namespace afdim
