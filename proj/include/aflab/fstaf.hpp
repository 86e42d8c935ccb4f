#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "aflab/bases.hpp"
#include "aflab/constellation.hpp"
#include "aflab/dpaf.hpp"
#include "aflab/parallel.hpp"
#include "aflab/types.hpp"

namespace aflab {

/**
 * Fast/slow-time ambiguity matrix of one realization X (N x M):
 *
 *   A(k, q) = sqrt(MN) * f_{N,k+1}^H |F_N X|^2 f_{M,q+1},
 *
 * i.e. a 2D Fourier transform of the squared frequency/slow-time signal.
 * The sqrt(MN) factor is folded in so entry (0,0) equals ||vec(X)||^2 and the
 * matrix agrees exactly with the quadratic form x^H (D_{M,q}^* kron J_{N,k}^T) x.
 */
inline Mat fst_af_matrix(const Mat& x) {
    const int n = static_cast<int>(x.rows());
    const int m = static_cast<int>(x.cols());
    const Mat fn = dft_matrix(n);
    const Mat fm = dft_matrix(m);
    const Mat xft = fn * x;
    const RealMat sq = xft.cwiseAbs2();
    return std::sqrt(static_cast<double>(m) * n) * (fn.adjoint() * sq.cast<cxd>() * fm);
}

/// Direct quadratic-form evaluation of one entry; reference path for the
/// matrix form above.
inline cxd fst_af_value_direct(const Mat& x, int k, int q) {
    const int n = static_cast<int>(x.rows());
    const int m = static_cast<int>(x.cols());
    const int kk = mod_n(k, n);
    cxd acc(0.0, 0.0);
    for (int col = 0; col < m; ++col) {
        cxd colsum(0.0, 0.0);
        for (int row = 0; row < n; ++row) colsum += std::conj(x(row, col)) * x((row + kk) % n, col);
        acc += colsum * unit_phase(-static_cast<double>(mod_n(1LL * q * col, m)) / m);
    }
    return acc;
}

inline AFGrid realized_fst_squared_grid(const Mat& x) {
    AFGrid grid;
    grid.values = fst_af_matrix(x).cwiseAbs2();
    grid.mode = GridMode::Realized;
    return grid;
}

namespace detail {

/// Per-bin weights of the kurtosis term in the expected squared grid:
/// delay factor ||(|U^H F_N^H|^2) f_{N,k+1}||^2 and Doppler factor
/// ||(|V|^2) f_{M,q+1}^*||^2.
struct FstTermWeights {
    RealVec delay;    // length N
    RealVec doppler;  // length M
};

inline FstTermWeights fst_term_weights(const Scheme2D& scheme) {
    const int n = scheme.n();
    const int m = scheme.m();
    const Mat fn = dft_matrix(n);
    const Mat fm = dft_matrix(m);
    const RealMat bu = (scheme.u_basis.matrix.adjoint() * fn.adjoint()).cwiseAbs2();
    const RealMat bv = scheme.v_basis.matrix.cwiseAbs2();
    const Mat delay_cols = bu.cast<cxd>() * fn;
    const Mat doppler_cols = bv.cast<cxd>() * fm.conjugate();
    FstTermWeights w{RealVec(n), RealVec(m)};
    for (int k = 0; k < n; ++k) w.delay(k) = delay_cols.col(k).squaredNorm();
    for (int q = 0; q < m; ++q) w.doppler(q) = doppler_cols.col(q).squaredNorm();
    return w;
}

}  // namespace detail

/// Expected squared grid for an arbitrary 2D scheme in closed form:
/// MN + M^2 N^2 at the origin + (kappa-2) MN * delay_weight(k) * doppler_weight(q).
inline AFGrid closed_form_fst_grid(const Scheme2D& scheme, double kappa) {
    const int n = scheme.n();
    const int m = scheme.m();
    const auto w = detail::fst_term_weights(scheme);
    const double mn = static_cast<double>(m) * n;
    RealMat values(n, m);
    for (int q = 0; q < m; ++q)
        for (int k = 0; k < n; ++k)
            values(k, q) = mn + (kappa - 2.0) * mn * w.delay(k) * w.doppler(q);
    values(0, 0) += mn * mn;
    AFGrid grid;
    grid.values = std::move(values);
    grid.mode = GridMode::ClosedForm;
    grid.waveform = std::string(waveform_name(scheme.kind));
    grid.kappa = kappa;
    return grid;
}

/// gcd(2*N*c1, N) with gcd(0, N) = N; controls which delay rows of the AFDM
/// grid carry the kurtosis term (c1 = 0 collapses to the OFDM pattern).
inline int afdm_fst_phi(int n, double c1) {
    const long long slope = std::llround(2.0 * n * c1);
    return static_cast<int>(std::gcd(std::llabs(slope), static_cast<long long>(n)));
}

/// Waveform-specialized expected squared grids: OFDM is flat at (kappa-1)MN,
/// OTFS is flat at MN, SC lowers only the zero-delay column, AFDM lowers the
/// delay rows with <2*N*c1*k> = 0 mod N.
inline AFGrid closed_form_fst_waveform(const Scheme2D& scheme, double kappa) {
    const int n = scheme.n();
    const int m = scheme.m();
    const double mn = static_cast<double>(m) * n;
    const auto delta = [&](int k, int q) -> double {
        switch (scheme.kind) {
            case Waveform::OFDM: return 1.0;
            case Waveform::SC: return k == 0 ? 1.0 : 0.0;
            case Waveform::OTFS: return (k == 0 && q == 0) ? 1.0 : 0.0;
            case Waveform::AFDM: {
                const long long slope = std::llround(2.0 * n * scheme.u_basis.c1);
                return mod_n(slope * k, n) == 0 ? 1.0 : 0.0;
            }
            default:
                throw std::invalid_argument("closed_form_fst_waveform: no specialized formula for "
                                            "custom schemes; use closed_form_fst_grid");
        }
    };
    RealMat values(n, m);
    for (int q = 0; q < m; ++q)
        for (int k = 0; k < n; ++k) values(k, q) = mn + (kappa - 2.0) * mn * delta(k, q);
    values(0, 0) += mn * mn;
    AFGrid grid;
    grid.values = std::move(values);
    grid.mode = GridMode::ClosedForm;
    grid.waveform = std::string(waveform_name(scheme.kind));
    grid.kappa = kappa;
    return grid;
}

// ---------------------------------------------------------------------------
// Integrated sidelobe level, two independent routes.
// ---------------------------------------------------------------------------

struct FstEisl {
    double eisl_grid_route = 0.0;     // sum of the closed-form grid minus mainlobe
    double eisl_formula_route = 0.0;  // M^2N^2 - MN + (kappa-2) MN (||V^T kron F_N U||_4^4 - 1)
    double kron_fourth_norm = 0.0;    // ||V^T kron F_N U||_4^4 = ||V||_4^4 * ||F_N U||_4^4
};

/// Both routes to the expected integrated sidelobe level. The Kronecker
/// fourth-power norm is factored so the NM x NM matrix is never formed.
inline FstEisl eisl_fst(const Scheme2D& scheme, double kappa) {
    const int n = scheme.n();
    const int m = scheme.m();
    const double mn = static_cast<double>(m) * n;
    FstEisl out;
    const double v4 = scheme.v_basis.matrix.cwiseAbs2().squaredNorm();
    const double fu4 = (dft_matrix(n) * scheme.u_basis.matrix).cwiseAbs2().squaredNorm();
    out.kron_fourth_norm = v4 * fu4;
    out.eisl_formula_route = mn * mn - mn + (kappa - 2.0) * mn * (out.kron_fourth_norm - 1.0);
    const AFGrid grid = closed_form_fst_grid(scheme, kappa);
    out.eisl_grid_route = grid.sum() - grid.mainlobe();
    return out;
}

/// Grid-sum route for an already computed expectation grid.
inline double eisl_fst_grid_route(const AFGrid& grid) {
    if (!grid.is_expectation())
        throw std::invalid_argument("eisl_fst_grid_route: grid holds a single realization");
    return grid.sum() - grid.mainlobe();
}

inline double eisl_fst_ofdm(int n, int m, double kappa) {
    const double mn = static_cast<double>(m) * n;
    return mn * (mn - 1.0) * (kappa - 1.0);
}

inline double eisl_fst_sc(int n, int m, double kappa) {
    const double mn = static_cast<double>(m) * n;
    return mn * mn - mn + (kappa - 2.0) * mn * (m - 1.0);
}

inline double eisl_fst_otfs(int n, int m) {
    const double mn = static_cast<double>(m) * n;
    return mn * (mn - 1.0);
}

/// (M*phi - 1)(kappa - 1) MN + (N - phi) M^2 N with phi = gcd(2Nc1, N).
/// phi = N reduces to the OFDM expression and reuses it verbatim so the
/// degenerate c1 = 0 case matches OFDM bit for bit.
inline double eisl_fst_afdm(int n, int m, double kappa, double c1) {
    const int phi = afdm_fst_phi(n, c1);
    if (phi == n) return eisl_fst_ofdm(n, m, kappa);
    const double mn = static_cast<double>(m) * n;
    return (static_cast<double>(m) * phi - 1.0) * (kappa - 1.0) * mn +
           (static_cast<double>(n) - phi) * static_cast<double>(m) * m * n;
}

// ---------------------------------------------------------------------------
// Monte-Carlo / enumeration oracles.
// ---------------------------------------------------------------------------

inline AFGrid mc_expected_fst_grid(const Scheme2D& scheme, const Constellation& constellation,
                                   long trials, uint64_t seed, int threads = 1) {
    if (trials < 1) throw std::invalid_argument("mc_expected_fst_grid: trials must be >= 1");
    const int n = scheme.n();
    const int m = scheme.m();
    const Mat fn = dft_matrix(n);
    const Mat fnh = fn.adjoint();
    const Mat fm = dft_matrix(m);
    const double scale = std::sqrt(static_cast<double>(m) * n);
    constexpr long kBlock = 64;
    const long nblocks = (trials + kBlock - 1) / kBlock;
    std::vector<RealMat> parts(nblocks);
    parallel_blocks(nblocks, threads, [&](long b) {
        RealMat acc = RealMat::Zero(n, m);
        Mat s(n, m);
        const long hi = std::min(trials, (b + 1) * kBlock);
        for (long t = b * kBlock; t < hi; ++t) {
            Rng rng(seed, static_cast<uint64_t>(t));
            for (int c = 0; c < m; ++c)
                for (int r = 0; r < n; ++r) s(r, c) = constellation.draw(rng);
            const Mat x = scheme.u_basis.matrix * s * scheme.v_basis.matrix;
            const RealMat sq = (fn * x).cwiseAbs2();
            const Mat a = scale * (fnh * sq.cast<cxd>() * fm);
            acc += a.cwiseAbs2();
        }
        parts[b] = std::move(acc);
    });
    AFGrid grid;
    grid.values = detail::pairwise_merge(parts) / static_cast<double>(trials);
    grid.mode = GridMode::MonteCarlo;
    grid.waveform = std::string(waveform_name(scheme.kind));
    grid.constellation = constellation.label();
    grid.kappa = constellation.stats().kurtosis;
    grid.trials = trials;
    grid.seed = seed;
    return grid;
}

/// Exact expectation by enumerating every N x M symbol matrix (state space
/// capped at 1e6, i.e. alphabet^(N*M)).
inline AFGrid enumerated_expected_fst_grid(const Scheme2D& scheme,
                                           const Constellation& constellation) {
    const int n = scheme.n();
    const int m = scheme.m();
    detail::check_enumerable(constellation, n * m);
    const auto& pts = constellation.points();
    const auto& probs = constellation.probs();
    const size_t alphabet = pts.size();
    const Mat fn = dft_matrix(n);
    const Mat fnh = fn.adjoint();
    const Mat fm = dft_matrix(m);
    const double scale = std::sqrt(static_cast<double>(m) * n);
    RealMat acc = RealMat::Zero(n, m);
    std::vector<size_t> digit(static_cast<size_t>(n) * m, 0);
    Mat s(n, m);
    while (true) {
        double weight = 1.0;
        for (size_t i = 0; i < digit.size(); ++i) weight *= probs[digit[i]];
        for (int c = 0; c < m; ++c)
            for (int r = 0; r < n; ++r) s(r, c) = pts[digit[static_cast<size_t>(c) * n + r]];
        const Mat x = scheme.u_basis.matrix * s * scheme.v_basis.matrix;
        const RealMat sq = (fn * x).cwiseAbs2();
        const Mat a = scale * (fnh * sq.cast<cxd>() * fm);
        acc += weight * a.cwiseAbs2();
        size_t pos = 0;
        while (pos < digit.size() && ++digit[pos] == alphabet) digit[pos++] = 0;
        if (pos == digit.size()) break;
    }
    AFGrid grid;
    grid.values = std::move(acc);
    grid.mode = GridMode::Enumerated;
    grid.waveform = std::string(waveform_name(scheme.kind));
    grid.constellation = constellation.label();
    grid.kappa = constellation.stats().kurtosis;
    return grid;
}

// ---------------------------------------------------------------------------
// Optimality probe and supporting numerical checks.
// ---------------------------------------------------------------------------

struct OptimalityReport {
    int n = 0, m = 0;
    double kappa = 0.0;
    int schemes = 0;
    bool degenerate_tie = false;      // kappa == 2: the kurtosis term vanishes
    std::string reference_waveform;   // "ofdm" (kappa < 2) or "otfs" (kappa > 2)
    double min_esl_margin = 0.0;      // min over schemes and bins of ESL - ESL_ref
    double min_eisl_margin = 0.0;     // min over schemes of EISL - EISL_ref
    bool pass = false;
};

/**
 * Draws Haar-random (U, V) schemes and compares their closed-form expected
 * sidelobes against the predicted optimum: OFDM for sub-Gaussian kurtosis,
 * OTFS for super-Gaussian. Closed forms are compared directly, so margins
 * are exact up to roundoff; the pass tolerance is -1e-9.
 */
inline OptimalityReport optimality_probe(int n, int m, double kappa, int num_schemes,
                                         uint64_t seed) {
    if (n < 1 || m < 1 || num_schemes < 1)
        throw std::invalid_argument("optimality_probe: sizes and scheme count must be positive");
    OptimalityReport rep;
    rep.n = n;
    rep.m = m;
    rep.kappa = kappa;
    rep.schemes = num_schemes;
    if (kappa == 2.0) {
        rep.degenerate_tie = true;
        rep.reference_waveform = "tie";
        rep.pass = true;
        return rep;
    }
    const bool sub = kappa < 2.0;
    rep.reference_waveform = sub ? "ofdm" : "otfs";
    const AFGrid ref_grid = closed_form_fst_waveform(
        sub ? ofdm_scheme(n, m) : otfs_scheme(n, m), kappa);
    const double ref_eisl = sub ? eisl_fst_ofdm(n, m, kappa) : eisl_fst_otfs(n, m);
    double min_esl = std::numeric_limits<double>::infinity();
    double min_eisl = std::numeric_limits<double>::infinity();
    for (int r = 0; r < num_schemes; ++r) {
        Scheme2D scheme = custom_scheme(haar_unitary(n, seed, 2 * r),
                                        haar_unitary(m, seed, 2 * r + 1));
        const AFGrid grid = closed_form_fst_grid(scheme, kappa);
        min_esl = std::min(min_esl, (grid.values - ref_grid.values).minCoeff());
        min_eisl = std::min(min_eisl, eisl_fst(scheme, kappa).eisl_formula_route - ref_eisl);
    }
    rep.min_esl_margin = min_esl;
    rep.min_eisl_margin = min_eisl;
    rep.pass = min_esl >= -1e-9 && min_eisl >= -1e-9;
    return rep;
}

/// Numerical probe of the majorization step behind the per-bin optimality:
/// the doubly stochastic matrix |V|^2 cannot increase the l2 norm of the
/// real or imaginary part of any DFT column.
inline bool bistochastic_contraction_check(const Mat& v, double slack = 1e-12) {
    const int m = static_cast<int>(v.rows());
    const RealMat a = v.cwiseAbs2();
    const Mat fm = dft_matrix(m);
    for (int q = 0; q < m; ++q) {
        const RealVec re = fm.col(q).real();
        const RealVec im = fm.col(q).imag();
        if ((a * re).norm() > re.norm() + slack) return false;
        if ((a * im).norm() > im.norm() + slack) return false;
    }
    return true;
}

/**
 * Size of the small-Doppler ("stop and go") approximation: the exact Doppler
 * diagonal on the serialized M(N+Ncp) grid versus the block-constant
 * approximation, after aligning the mean phase of the first block. Returns
 * the max entrywise modulus of the difference on a unit probe.
 */
inline double stop_and_go_residual(int n, int m, int n_cp, int q) {
    if (n < 1 || m < 1 || n_cp < 0) throw std::invalid_argument("stop_and_go_residual: bad sizes");
    const int block = n + n_cp;
    const long long total = static_cast<long long>(m) * block;
    // Phase error within any block is 2*pi*q*r/total, r = 0..block-1.
    const double align = 0.5 * kTwoPi * q * (block - 1) / static_cast<double>(total);
    double worst = 0.0;
    for (int r = 0; r < block; ++r) {
        const double d = kTwoPi * q * r / static_cast<double>(total) - align;
        worst = std::max(worst, std::abs(unit_phase(d / kTwoPi) - cxd(1.0, 0.0)));
    }
    return worst;
}

/// Analytic bound 2*pi*q*N / (M (N + Ncp)) on the residual above.
inline double stop_and_go_residual_bound(int n, int m, int n_cp, int q) {
    return kTwoPi * q * n / (static_cast<double>(m) * (n + n_cp));
}

}  // namespace aflab
