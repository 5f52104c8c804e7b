#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "afdim/rng.hpp"

namespace afdim {

using cplx = std::complex<double>;

// Square M-QAM constellation with per-axis reflected-binary Gray labels,
// normalized to unit average power under the prior.
struct Constellation {
    int order = 0;                      // M
    std::vector<cplx> points;           // size M, grid order (I-major)
    std::vector<std::uint32_t> labels;  // Gray bit labels, k = log2(M) bits each
    std::vector<double> prior;          // sums to 1

    int bits_per_symbol() const;  // k
    int side() const;             // sqrt(M)
    cplx prior_mean() const;
};

// Supported orders: 4, 16, 64, 256. Throws std::invalid_argument otherwise.
Constellation build_constellation(int order);

// Flat vector of L = N*N complex samples; the N x N geometry is metadata only.
struct SymbolBlock {
    std::vector<cplx> samples;
    int side = 0;                    // N
    std::vector<int> symbol_indices; // empty when samples are not source symbols

    std::size_t size() const { return samples.size(); }
};

// L = N^2 i.i.d. draws from the constellation prior, indices recorded.
SymbolBlock draw_block(const Constellation& c, int side, Rng& rng);

struct ErrorReport {
    double mse = 0.0;
    double ser = 0.0;
    double ber = 0.0;
    long long trials = 0;  // symbols compared
};

// Index of the closest constellation point; ties break to the lowest index.
int nearest_point(const Constellation& c, cplx x);

// MSE on raw samples; SER/BER after nearest-point decisions on `estimate`.
// Requires equal lengths and truth.symbol_indices.
ErrorReport compute_errors(const SymbolBlock& truth, const SymbolBlock& estimate,
                           const Constellation& c);

}  // namespace afdim
