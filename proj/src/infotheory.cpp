#include "afdim/infotheory.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace afdim {

namespace {

// Golub-Welsch via Newton iteration on the Hermite recurrence; returns roots
// of H_n and the matching weights for the weight function e^{-x^2}.
GaussHermite compute_gauss_hermite(int n) {
    GaussHermite gh;
    gh.nodes.resize(n);
    gh.weights.resize(n);

    const double sqrt_pi_quarter = std::pow(M_PI, -0.25);
    const int half = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        // initial guesses (Numerical Recipes gauher)
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * gh.nodes[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * gh.nodes[1];
        else
            z = 2.0 * z - gh.nodes[i - 2];

        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // orthonormal Hermite recurrence
            double p1 = sqrt_pi_quarter;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
                     std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        gh.nodes[i] = z;
        gh.nodes[n - 1 - i] = -z;
        gh.weights[i] = 2.0 / (pp * pp);
        gh.weights[n - 1 - i] = gh.weights[i];
    }
    if (n % 2 == 1) gh.nodes[half - 1] = 0.0;
    return gh;
}

const GaussHermite& cached_gauss_hermite(int n) {
    static std::mutex m;
    static std::map<int, GaussHermite> cache;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss_hermite(n)).first;
    return it->second;
}

}  // namespace

GaussHermite gauss_hermite(int order) {
    // beyond ~150 the extreme-node weights underflow and the rule degenerates
    if (order < 1 || order > 150)
        throw std::invalid_argument("gauss_hermite: order must be in [1, 150]");
    return compute_gauss_hermite(order);
}

double mmse_discrete(const Constellation& c, double gamma, int gh_order) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("mmse_discrete: gamma must be >= 0");
    if (c.points.empty()) throw std::invalid_argument("mmse_discrete: empty constellation");
    if (gh_order < 1 || gh_order > 150)
        throw std::invalid_argument("mmse_discrete: gh_order must be in [1, 150]");

    const GaussHermite& gh = cached_gauss_hermite(gh_order);
    const double root_gamma = std::sqrt(gamma);
    const int m = static_cast<int>(c.points.size());

    // Z components are N(0, 1/2): E[g(Z)] = (1/pi) sum_ij w_i w_j g(x_i + i x_j)
    double mmse = 0.0;
    std::vector<double> logp(m);
    for (int s = 0; s < m; ++s) logp[s] = std::log(std::max(c.prior[s], 1e-300));

    for (int s0 = 0; s0 < m; ++s0) {
        if (c.prior[s0] <= 0.0) continue;
        double inner = 0.0;
        for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
            for (std::size_t j = 0; j < gh.nodes.size(); ++j) {
                const cplx y = root_gamma * c.points[s0] + cplx(gh.nodes[i], gh.nodes[j]);
                // posterior mean with max-log stabilization
                double max_e = -1e300;
                for (int s = 0; s < m; ++s) {
                    const double e = logp[s] - std::norm(y - root_gamma * c.points[s]);
                    if (e > max_e) max_e = e;
                }
                double wsum = 0.0;
                cplx num(0.0, 0.0);
                for (int s = 0; s < m; ++s) {
                    const double w =
                        std::exp(logp[s] - std::norm(y - root_gamma * c.points[s]) - max_e);
                    wsum += w;
                    num += w * c.points[s];
                }
                const cplx post_mean = num / wsum;
                inner += gh.weights[i] * gh.weights[j] * std::norm(c.points[s0] - post_mean);
            }
        }
        mmse += c.prior[s0] * inner / M_PI;
    }
    return mmse;
}

double mi_gaussian(double snr_eff, int d) {
    if (!(snr_eff >= 0.0)) throw std::invalid_argument("mi_gaussian: snr must be >= 0");
    return d * std::log1p(snr_eff);
}

double mi_from_mmse(const std::function<double(double)>& mmse, double gamma_hi,
                    double rel_tol) {
    if (!(gamma_hi >= 0.0)) throw std::invalid_argument("mi_from_mmse: gamma must be >= 0");
    if (gamma_hi == 0.0) return 0.0;
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 15>::integrate(mmse, 0.0, gamma_hi, 15, rel_tol);
}

double mi_via_immse(const Constellation& c, double gamma_hi, int gh_order, double rel_tol) {
    return mi_from_mmse([&](double g) { return mmse_discrete(c, g, gh_order); }, gamma_hi,
                        rel_tol);
}

double mi_small_snr_slope(const Constellation& c) {
    const double i1 = mi_via_immse(c, 1e-4);
    const double i2 = mi_via_immse(c, 2e-4);
    return (i2 - i1) / 1e-4;
}

MmseCurve build_mmse_curve(const Constellation& c, const std::vector<double>& gammas,
                           int gh_order) {
    MmseCurve curve;
    curve.gammas = gammas;
    curve.mmse_values.reserve(gammas.size());
    for (double g : gammas) curve.mmse_values.push_back(mmse_discrete(c, g, gh_order));
    curve.prior_id = "qam" + std::to_string(c.order);
    return curve;
}

}  // namespace afdim
