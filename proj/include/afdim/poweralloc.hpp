#pragma once

#include <vector>

namespace afdim {

// max sum_t log(c_t p_t / (1 + c_t p_t))  s.t.  sum p_t <= p_total,
// 0 <= p_t <= p_max_t. Strictly concave; interior optima satisfy the
// equal-marginal rule 1 / (p (1 + c p)) = mu.
struct AllocationProblem {
    std::vector<double> c;      // channel-to-noise ratios, all > 0
    double p_total = 0.0;
    std::vector<double> p_max;  // entries may be +infinity
    bool budget_exceeds_caps = false;  // flagged at construction

    AllocationProblem(std::vector<double> c, double p_total, std::vector<double> p_max = {});
};

// -inf sentinel when any p_t <= 0.
double allocation_objective(const AllocationProblem& prob, const std::vector<double>& p);

// Positive root of p (1 + c p) = 1/mu; strictly decreasing in mu.
double p_of_mu(double c, double mu);

struct AllocationResult {
    std::vector<double> p;
    double mu = 0.0;
    double objective = 0.0;
    double kkt_residual = 0.0;  // max interior deviation of 1/(p(1+cp)) from mu
};

// Bisection on the budget multiplier; budget met to 1e-10 * p_total unless
// every relay sits at its cap.
AllocationResult solve(const AllocationProblem& prob);

}  // namespace afdim
