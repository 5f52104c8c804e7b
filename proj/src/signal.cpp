#include "afdim/signal.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace afdim {

namespace {

std::uint32_t gray(std::uint32_t n) { return n ^ (n >> 1); }

int int_log2(int x) {
    int k = 0;
    while ((1 << k) < x) ++k;
    return k;
}

}  // namespace

int Constellation::bits_per_symbol() const { return int_log2(order); }

int Constellation::side() const {
    return static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
}

cplx Constellation::prior_mean() const {
    cplx m(0.0, 0.0);
    for (std::size_t s = 0; s < points.size(); ++s) m += prior[s] * points[s];
    return m;
}

Constellation build_constellation(int order) {
    if (order != 4 && order != 16 && order != 64 && order != 256)
        throw std::invalid_argument("unsupported QAM order " + std::to_string(order) +
                                    " (expected 4, 16, 64 or 256)");

    const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    const int axis_bits = int_log2(m);

    // per-axis levels -(m-1), ..., -1, +1, ..., +(m-1); E|x|^2 = 2(M-1)/3 before scaling
    const double scale = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);

    Constellation c;
    c.order = order;
    c.points.resize(order);
    c.labels.resize(order);
    c.prior.assign(order, 1.0 / order);
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            const int s = a * m + b;
            c.points[s] = scale * cplx(2 * a - (m - 1), 2 * b - (m - 1));
            c.labels[s] = (gray(static_cast<std::uint32_t>(a)) << axis_bits) |
                          gray(static_cast<std::uint32_t>(b));
        }
    }
    return c;
}

SymbolBlock draw_block(const Constellation& c, int side, Rng& rng) {
    if (side < 1) throw std::invalid_argument("block side must be >= 1");
    const std::size_t len = static_cast<std::size_t>(side) * static_cast<std::size_t>(side);

    SymbolBlock b;
    b.side = side;
    b.samples.resize(len);
    b.symbol_indices.resize(len);
    for (std::size_t i = 0; i < len; ++i) {
        // inverse-CDF draw; exact for non-uniform priors too
        const double u = rng.uniform();
        double acc = 0.0;
        int s = c.order - 1;
        for (int j = 0; j < c.order; ++j) {
            acc += c.prior[j];
            if (u < acc) {
                s = j;
                break;
            }
        }
        b.symbol_indices[i] = s;
        b.samples[i] = c.points[s];
    }
    return b;
}

int nearest_point(const Constellation& c, cplx x) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int s = 0; s < c.order; ++s) {
        const double d = std::norm(x - c.points[s]);
        if (d < best_d) {
            best_d = d;
            best = s;
        }
    }
    return best;
}

ErrorReport compute_errors(const SymbolBlock& truth, const SymbolBlock& estimate,
                           const Constellation& c) {
    const std::size_t len = truth.samples.size();
    if (estimate.samples.size() != len)
        throw std::invalid_argument("compute_errors: block length mismatch");
    if (truth.symbol_indices.size() != len)
        throw std::invalid_argument("compute_errors: truth block lacks symbol indices");

    const int k = c.bits_per_symbol();
    double se = 0.0;
    long long sym_errors = 0;
    long long bit_errors = 0;
    for (std::size_t i = 0; i < len; ++i) {
        se += std::norm(truth.samples[i] - estimate.samples[i]);
        const int s_true = truth.symbol_indices[i];
        const int s_hat = nearest_point(c, estimate.samples[i]);
        if (s_hat != s_true) ++sym_errors;
        bit_errors += std::popcount(c.labels[s_true] ^ c.labels[s_hat]);
    }

    ErrorReport r;
    r.trials = static_cast<long long>(len);
    r.mse = se / static_cast<double>(len);
    r.ser = static_cast<double>(sym_errors) / static_cast<double>(len);
    r.ber = static_cast<double>(bit_errors) / (static_cast<double>(len) * k);
    return r;
}

}  // namespace afdim
