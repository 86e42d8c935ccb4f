#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "aflab/dpaf.hpp"
#include "aflab/fstaf.hpp"
#include "aflab/rng.hpp"
#include "aflab/types.hpp"
#include "aflab/whgroup.hpp"

namespace aflab {

struct Target {
    int delay_k = 0;    // delay bins
    int doppler_q = 0;  // Doppler bins (Z_N for the periodic framing, Z_M for fast/slow time)
    cxd gain{1.0, 0.0};
};

struct Scenario {
    std::vector<Target> targets;
    double noise_power = 0.0;  // per-sample variance of circular complex Gaussian noise
    int n_cp = 0;
};

namespace detail {

inline void add_noise(Vec& y, double noise_power, Rng& rng) {
    if (noise_power <= 0.0) return;
    const double s = std::sqrt(noise_power);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += s * rng.next_complex_normal();
}

}  // namespace detail

/**
 * Periodic-framing echo: CP insertion, physical channel (aperiodic delay,
 * then Doppler on the length N+Ncp grid), CP removal, then noise.
 *
 * Target Doppler q lives on the post-CP grid Z_N; the physical chain needs
 * the pre-removal index q * (N+Ncp) / N, which must be an integer here
 * (off-grid Doppler would need a resampling model this simulation does not
 * define). Target gains are the post-chain gains: the chain's extra CP phase
 * is pre-compensated so the output equals sum_l beta_l D_{q_l} J_{k_l} x.
 * The function cross-checks the chain against that direct form and throws
 * if they disagree, since a mismatch means the CP identity was violated.
 */
inline Vec simulate_dp_echo(const Vec& x, const Scenario& scenario, uint64_t seed) {
    const int n = static_cast<int>(x.size());
    const int n_cp = scenario.n_cp;
    if (n_cp < 0 || n_cp > n) throw std::invalid_argument("simulate_dp_echo: need 0 <= n_cp <= N");
    const int total = n + n_cp;

    Vec direct = Vec::Zero(n);
    Vec chained = Vec::Zero(n);
    const Vec x_cp = cp_add(x, n_cp);
    for (const auto& t : scenario.targets) {
        if (t.delay_k < 0 || t.delay_k > n_cp)
            throw std::invalid_argument("simulate_dp_echo: target delay " + std::to_string(t.delay_k) +
                                        " exceeds the cyclic prefix (" + std::to_string(n_cp) + ")");
        const double q_phys = static_cast<double>(t.doppler_q) * total / n;
        if (std::abs(q_phys - std::round(q_phys)) > 1e-9)
            throw std::invalid_argument(
                "simulate_dp_echo: Doppler " + std::to_string(t.doppler_q) + " maps to the non-integer "
                "pre-removal index " + std::to_string(q_phys) + "; this simulation only accepts "
                "Doppler bins that stay on the integer grid of length N+Ncp");
        const auto qp = static_cast<long long>(std::llround(q_phys));

        // Physical chain with the CP phase folded out of the gain.
        const cxd gain_phys =
            t.gain * unit_phase(-static_cast<double>(qp) * n_cp / total);
        Vec v = apply_aperiodic_time_shift(t.delay_k, x_cp);
        for (int i = 0; i < total; ++i)
            v(i) *= unit_phase(static_cast<double>(mod_n(qp * i, total)) / total);
        chained += gain_phys * cp_remove(v, n_cp);

        direct += t.gain * apply_g(t.delay_k, t.doppler_q, x);
    }

    const double scale = std::max(1.0, x.norm());
    if ((chained - direct).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::logic_error("simulate_dp_echo: CP chain disagrees with the periodic-shift form");

    Rng rng(seed);
    detail::add_noise(chained, scenario.noise_power, rng);
    return chained;
}

/// Matched-filter correlation grid y~(k,q) = x^H J_k^T D_q^* y over Z_N^2.
inline Mat mf_dp_grid(const Vec& x, const Vec& y) {
    const int n = static_cast<int>(x.size());
    if (y.size() != n) throw std::invalid_argument("mf_dp_grid: size mismatch");
    Mat r(n, n);
    for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m) r(m, k) = std::conj(x(m)) * y((m + k) % n);
    const Mat t = detail::dft_kernel(n, -1) * r;
    Mat grid(n, n);
    for (int k = 0; k < n; ++k)
        for (int q = 0; q < n; ++q)
            grid(k, q) = t(q, k) * unit_phase(-static_cast<double>(mod_n(1LL * q * k, n)) / n);
    return grid;
}

/// Noiseless matched-filter prediction: the sum of delay/Doppler-shifted
/// ambiguity functions, with the cross phase picked up when commuting the
/// target shift past the filter shift.
inline Mat shifted_af_reconstruction_dp(const Vec& x, const std::vector<Target>& targets) {
    const int n = static_cast<int>(x.size());
    Mat grid = Mat::Zero(n, n);
    for (const auto& t : targets) {
        for (int k = 0; k < n; ++k)
            for (int q = 0; q < n; ++q) {
                const cxd phase =
                    unit_phase(-static_cast<double>(mod_n(1LL * t.delay_k * (q - t.doppler_q), n)) / n);
                grid(k, q) += t.gain * phase * dpaf_value(x, k - t.delay_k, q - t.doppler_q);
            }
    }
    return grid;
}

enum class FstChannelMode {
    Approx,  // block-constant Doppler (the model the statistics assume)
    Exact    // sample-accurate Doppler before CP removal; diagnostic only
};

/**
 * Fast/slow-time echo on the serialized signal vec(X): per-column CP,
 * aperiodic delay, Doppler, per-column CP removal. In Approx mode the
 * Doppler phase is constant within each slow-time block, which makes the
 * channel exactly D_{M,q} kron J_{N,k}; Exact mode applies the true
 * per-sample phase so the approximation error can be measured.
 */
inline Vec simulate_fst_echo(const Mat& x, const Scenario& scenario, uint64_t seed,
                             FstChannelMode mode = FstChannelMode::Approx) {
    const int n = static_cast<int>(x.rows());
    const int m = static_cast<int>(x.cols());
    const int n_cp = scenario.n_cp;
    if (n_cp < 0 || n_cp > n) throw std::invalid_argument("simulate_fst_echo: need 0 <= n_cp <= N");
    const int block = n + n_cp;
    const long long total = static_cast<long long>(m) * block;

    Vec y = Vec::Zero(static_cast<Eigen::Index>(n) * m);
    // Serialized signal with per-column CP.
    Vec x_cp(total);
    for (int c = 0; c < m; ++c) x_cp.segment(static_cast<Eigen::Index>(c) * block, block) = cp_add(x.col(c), n_cp);

    for (const auto& t : scenario.targets) {
        if (t.delay_k < 0 || t.delay_k >= std::max(n_cp, 1))
            throw std::invalid_argument("simulate_fst_echo: target delay must satisfy k < Ncp");
        Vec v = apply_aperiodic_time_shift(t.delay_k, x_cp);
        if (mode == FstChannelMode::Exact) {
            for (long long i = 0; i < total; ++i)
                v(i) *= unit_phase(static_cast<double>(mod_n(1LL * t.doppler_q * i, static_cast<int>(total))) /
                                   static_cast<double>(total));
        } else {
            for (int c = 0; c < m; ++c) {
                const cxd ph = unit_phase(static_cast<double>(mod_n(1LL * t.doppler_q * c, m)) / m);
                v.segment(static_cast<Eigen::Index>(c) * block, block) *= ph;
            }
        }
        for (int c = 0; c < m; ++c)
            y.segment(static_cast<Eigen::Index>(c) * n, n) +=
                t.gain * cp_remove(v.segment(static_cast<Eigen::Index>(c) * block, block), n_cp);
    }

    Rng rng(seed);
    detail::add_noise(y, scenario.noise_power, rng);
    return y;
}

/// Matched-filter grid y~(k,q) = x^H (D_{M,q}^* kron J_{N,k}^T) y over Z_N x Z_M.
inline Mat mf_fst_grid(const Mat& x, const Vec& y) {
    const int n = static_cast<int>(x.rows());
    const int m = static_cast<int>(x.cols());
    if (y.size() != static_cast<Eigen::Index>(n) * m)
        throw std::invalid_argument("mf_fst_grid: size mismatch");
    const Mat ymat = unvec2d(y, n, m);
    Mat c(m, n);
    for (int k = 0; k < n; ++k)
        for (int col = 0; col < m; ++col) {
            cxd acc(0.0, 0.0);
            for (int row = 0; row < n; ++row)
                acc += std::conj(x(row, col)) * ymat((row + k) % n, col);
            c(col, k) = acc;
        }
    const Mat t = detail::dft_kernel(m, -1) * c;  // (q, k)
    return t.transpose();
}

/// Noiseless prediction for the fast/slow-time framing; delay and Doppler
/// act on separate axes, so the shifted terms combine with no cross phase.
inline Mat shifted_af_reconstruction_fst(const Mat& x, const std::vector<Target>& targets) {
    const int n = static_cast<int>(x.rows());
    const int m = static_cast<int>(x.cols());
    const Mat af = fst_af_matrix(x);
    Mat grid = Mat::Zero(n, m);
    for (const auto& t : targets)
        for (int k = 0; k < n; ++k)
            for (int q = 0; q < m; ++q)
                grid(k, q) += t.gain * af(mod_n(k - t.delay_k, n), mod_n(q - t.doppler_q, m));
    return grid;
}

}  // namespace aflab
