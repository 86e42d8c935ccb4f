#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "aflab/bases.hpp"
#include "aflab/constellation.hpp"
#include "aflab/parallel.hpp"
#include "aflab/types.hpp"
#include "aflab/whgroup.hpp"

namespace aflab {

enum class GridMode { Realized, MonteCarlo, Enumerated, ClosedForm };

inline const char* grid_mode_name(GridMode m) {
    switch (m) {
        case GridMode::Realized: return "realized";
        case GridMode::MonteCarlo: return "mc";
        case GridMode::Enumerated: return "enumerated";
        default: return "closed-form";
    }
}

/**
 * Squared ambiguity grid, realized or expected. Rows index delay, columns
 * index Doppler; entry (0,0) is the mainlobe. Used for both framings (the
 * periodic grid is N x N, the fast/slow-time grid is N x M).
 */
struct AFGrid {
    RealMat values;
    GridMode mode = GridMode::Realized;
    std::string waveform;
    std::string constellation;
    double kappa = std::numeric_limits<double>::quiet_NaN();
    long trials = 0;
    uint64_t seed = 0;

    int rows() const { return static_cast<int>(values.rows()); }
    int cols() const { return static_cast<int>(values.cols()); }
    double mainlobe() const { return values(0, 0); }
    double sum() const { return values.sum(); }
    bool is_expectation() const { return mode != GridMode::Realized; }
};

struct EislResult {
    double eisl = 0.0;
    double normalized = 0.0;
};

/// Integrated sidelobe level of an expected grid: total volume minus the
/// mainlobe, plus the mainlobe-normalized value. Realized grids are refused
/// because the sidelobe metrics are statistics of the symbol distribution.
inline EislResult eisl_dp(const AFGrid& grid) {
    if (!grid.is_expectation())
        throw std::invalid_argument("eisl_dp: grid holds a single realization, not an expectation");
    const double eisl = grid.sum() - grid.mainlobe();
    return {eisl, eisl / grid.mainlobe()};
}

namespace detail {

/// Unnormalized DFT kernel, entry (q, m) = exp(sign * j*2*pi*q*m/n).
inline Mat dft_kernel(int n, int sign) {
    Mat w(n, n);
    for (int m = 0; m < n; ++m)
        for (int q = 0; q < n; ++q)
            w(q, m) = unit_phase(sign * static_cast<double>(mod_n(1LL * q * m, n)) / n);
    return w;
}

/// Lag-product matrix R with R(m, k) = conj(x[m]) * x[(m+k) mod N]. Each
/// Doppler row of the ambiguity grid is the DFT of one of its columns.
inline Mat lag_products(const Vec& x) {
    const int n = static_cast<int>(x.size());
    Mat r(n, n);
    for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m) r(m, k) = std::conj(x(m)) * x((m + k) % n);
    return r;
}

/// |T(q,k)|^2 accumulated into grid(k,q).
inline void accumulate_squared(const Mat& t, RealMat& grid, double weight) {
    const int n = static_cast<int>(t.rows());
    for (int k = 0; k < static_cast<int>(t.cols()); ++k)
        for (int q = 0; q < n; ++q) grid(k, q) += weight * std::norm(t(q, k));
}

/// Ordered pairwise merge; the result depends only on block order.
inline RealMat pairwise_merge(std::vector<RealMat>& parts) {
    size_t count = parts.size();
    while (count > 1) {
        const size_t half = (count + 1) / 2;
        for (size_t i = 0; i + half < count; ++i) parts[i] += parts[i + half];
        count = half;
    }
    return std::move(parts[0]);
}

inline void check_enumerable(const Constellation& c, int n) {
    if (c.is_gaussian())
        throw std::invalid_argument("enumeration needs a finite alphabet; the Gaussian "
                                    "constellation is a continuous distribution");
    const double states = std::pow(static_cast<double>(c.points().size()), n);
    if (states > 1e6)
        throw std::invalid_argument("enumeration state space " + std::to_string(states) +
                                    " exceeds the 1e6 budget (alphabet " +
                                    std::to_string(c.points().size()) + ", length " +
                                    std::to_string(n) + ")");
}

}  // namespace detail

/// One ambiguity value A(k, q) = x^H J_{N,k}^T D_{N,q}^* x in O(N).
inline cxd dpaf_value(const Vec& x, int k, int q) {
    const int n = static_cast<int>(x.size());
    const int kk = mod_n(k, n);
    cxd acc(0.0, 0.0);
    for (int m = 0; m < n; ++m) {
        const int mk = (m + kk) % n;
        acc += std::conj(x(m)) * x(mk) * unit_phase(-static_cast<double>(mod_n(1LL * q * (m + kk), n)) / n);
    }
    return acc;
}

/// Full squared grid of one realization. Row k is computed as the squared
/// magnitude of the DFT of the lag products conj(x[m]) x[m+k]; one matrix
/// product covers all rows.
inline AFGrid dpaf_squared_grid(const Vec& x) {
    const int n = static_cast<int>(x.size());
    const Mat t = detail::dft_kernel(n, -1) * detail::lag_products(x);
    AFGrid grid;
    grid.values = RealMat::Zero(n, n);
    detail::accumulate_squared(t, grid.values, 1.0);
    grid.mode = GridMode::Realized;
    return grid;
}

/// Direct triple-loop evaluation; reference path for the fast grid.
inline RealMat dpaf_squared_grid_reference(const Vec& x) {
    const int n = static_cast<int>(x.size());
    RealMat grid(n, n);
    for (int k = 0; k < n; ++k)
        for (int q = 0; q < n; ++q) grid(k, q) = std::norm(dpaf_value(x, k, q));
    return grid;
}

/**
 * Monte-Carlo estimate of the expected squared grid. Trial t draws its
 * symbols from substream (seed, t) and trials are summed blockwise with an
 * ordered pairwise merge, so the result is bit-identical for any thread
 * count.
 */
inline AFGrid mc_expected_dp_grid(const ModulationBasis& basis, const Constellation& constellation,
                                  long trials, uint64_t seed, int threads = 1) {
    if (trials < 1) throw std::invalid_argument("mc_expected_dp_grid: trials must be >= 1");
    const int n = basis.n;
    const Mat w = detail::dft_kernel(n, -1);
    constexpr long kBlock = 64;
    const long nblocks = (trials + kBlock - 1) / kBlock;
    std::vector<RealMat> parts(nblocks);
    parallel_blocks(nblocks, threads, [&](long b) {
        RealMat acc = RealMat::Zero(n, n);
        Vec s(n);
        const long hi = std::min(trials, (b + 1) * kBlock);
        for (long t = b * kBlock; t < hi; ++t) {
            Rng rng(seed, static_cast<uint64_t>(t));
            for (int i = 0; i < n; ++i) s(i) = constellation.draw(rng);
            const Vec x = basis.matrix * s;
            const Mat tmat = w * detail::lag_products(x);
            detail::accumulate_squared(tmat, acc, 1.0);
        }
        parts[b] = std::move(acc);
    });
    AFGrid grid;
    grid.values = detail::pairwise_merge(parts) / static_cast<double>(trials);
    grid.mode = GridMode::MonteCarlo;
    grid.waveform = basis.label;
    grid.constellation = constellation.label();
    grid.kappa = constellation.stats().kurtosis;
    grid.trials = trials;
    grid.seed = seed;
    return grid;
}

/// Exact expected squared grid by exhaustive enumeration of every symbol
/// sequence with its probability. Ground truth at small N; refuses state
/// spaces above 1e6.
inline AFGrid enumerated_expected_dp_grid(const ModulationBasis& basis,
                                          const Constellation& constellation) {
    const int n = basis.n;
    detail::check_enumerable(constellation, n);
    const auto& pts = constellation.points();
    const auto& probs = constellation.probs();
    const size_t alphabet = pts.size();
    const Mat w = detail::dft_kernel(n, -1);
    RealMat acc = RealMat::Zero(n, n);
    std::vector<size_t> digit(n, 0);
    Vec s(n);
    while (true) {
        double weight = 1.0;
        for (int i = 0; i < n; ++i) weight *= probs[digit[i]];
        for (int i = 0; i < n; ++i) s(i) = pts[digit[i]];
        const Vec x = basis.matrix * s;
        const Mat tmat = w * detail::lag_products(x);
        detail::accumulate_squared(tmat, acc, weight);
        int pos = 0;
        while (pos < n && ++digit[pos] == alphabet) digit[pos++] = 0;
        if (pos == n) break;
    }
    AFGrid grid;
    grid.values = std::move(acc);
    grid.mode = GridMode::Enumerated;
    grid.waveform = basis.label;
    grid.constellation = constellation.label();
    grid.kappa = constellation.stats().kurtosis;
    return grid;
}

/**
 * Expected squared grid of an arbitrary unitary basis in closed form:
 * N + (kappa - 2) * sum_n |u_n^H D_q J_k u_n|^2, plus N^2 at the origin.
 * The diagonal-sum term is evaluated for all Doppler bins of a delay row
 * with one matrix product.
 */
inline AFGrid closed_form_dp_grid(const ModulationBasis& basis, double kappa) {
    const int n = basis.n;
    const Mat& u = basis.matrix;
    const Mat wplus = detail::dft_kernel(n, +1);
    RealMat values(n, n);
    Mat c(n, n);
    for (int k = 0; k < n; ++k) {
        for (int col = 0; col < n; ++col)
            for (int m = 0; m < n; ++m)
                c(m, col) = std::conj(u(m, col)) * u(mod_n(m - k, n), col);
        const Mat sums = wplus * c;  // (q, col) = u_col^H D_q J_k u_col
        for (int q = 0; q < n; ++q) {
            double term = 0.0;
            for (int col = 0; col < n; ++col) term += std::norm(sums(q, col));
            values(k, q) = n + (kappa - 2.0) * term;
        }
    }
    values(0, 0) += static_cast<double>(n) * n;
    AFGrid grid;
    grid.values = std::move(values);
    grid.mode = GridMode::ClosedForm;
    grid.waveform = basis.label;
    grid.kappa = kappa;
    return grid;
}

/// Waveform-specialized closed forms: the diagonal-sum term collapses to a
/// delta pattern (zero-Doppler line for OFDM, zero-delay line for SC, an
/// N1 x N2 lattice for OTFS, a slope-2Nc1 line mod N for AFDM).
inline AFGrid closed_form_dp_waveform(const ModulationBasis& basis, double kappa) {
    const int n = basis.n;
    const auto delta = [&](int k, int q) -> double {
        switch (basis.kind) {
            case Waveform::SC: return k == 0 ? 1.0 : 0.0;
            case Waveform::OFDM: return q == 0 ? 1.0 : 0.0;
            case Waveform::OTFS:
                return (mod_n(k, basis.n2) == 0 && mod_n(q, basis.n1) == 0) ? 1.0 : 0.0;
            case Waveform::AFDM: {
                const long long slope = std::llround(2.0 * n * basis.c1);
                return mod_n(slope * k - q, n) == 0 ? 1.0 : 0.0;
            }
            default:
                throw std::invalid_argument("closed_form_dp_waveform: no specialized formula for "
                                            "custom bases; use closed_form_dp_grid");
        }
    };
    RealMat values(n, n);
    for (int k = 0; k < n; ++k)
        for (int q = 0; q < n; ++q) values(k, q) = n + (kappa - 2.0) * n * delta(k, q);
    values(0, 0) += static_cast<double>(n) * n;
    AFGrid grid;
    grid.values = std::move(values);
    grid.mode = GridMode::ClosedForm;
    grid.waveform = basis.label;
    grid.kappa = kappa;
    return grid;
}

}  // namespace aflab
