#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "aflab/constellation.hpp"
#include "aflab/rng.hpp"
#include "aflab/types.hpp"

namespace aflab {

enum class Waveform { SC, OFDM, OTFS, AFDM, Custom };

inline const char* waveform_name(Waveform w) {
    switch (w) {
        case Waveform::SC: return "sc";
        case Waveform::OFDM: return "ofdm";
        case Waveform::OTFS: return "otfs";
        case Waveform::AFDM: return "afdm";
        default: return "custom";
    }
}

/// Normalized DFT matrix, entry (m, n) = exp(-j*2*pi*m*n/N)/sqrt(N) with
/// 0-based indices. Built entrywise so the sign and scaling conventions are
/// pinned here rather than inherited from a transform library.
inline Mat dft_matrix(int n) {
    if (n < 1) throw std::invalid_argument("dft_matrix: n must be >= 1");
    Mat f(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int col = 0; col < n; ++col)
        for (int row = 0; row < n; ++row)
            f(row, col) = scale * unit_phase(-static_cast<double>(mod_n(1LL * row * col, n)) / n);
    return f;
}

/// Chirp diagonal Diag(exp(-j*2*pi*c*m^2)), m = 0..n-1.
inline Vec chirp_diagonal(int n, double c) {
    Vec d(n);
    for (int m = 0; m < n; ++m) d(m) = unit_phase(-c * static_cast<double>(m) * m);
    return d;
}

inline double unitarity_error(const Mat& u) {
    return (u.adjoint() * u - Mat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

/**
 * Unitary modulation basis for 1D signaling, x = U s.
 *
 * The four built-ins are SC (identity), OFDM (inverse DFT),
 * OTFS (F_{N1}^H kron I_{N2}) and AFDM (chirp * inverse DFT * chirp).
 */
struct ModulationBasis {
    int n = 0;
    Mat matrix;
    Waveform kind = Waveform::Custom;
    int n1 = 0, n2 = 0;      // OTFS factors, n1 * n2 == n
    double c1 = 0, c2 = 0;   // AFDM chirp rates
    std::string label;
};

inline ModulationBasis sc_basis(int n) {
    if (n < 1) throw std::invalid_argument("sc_basis: n must be >= 1");
    return {n, Mat::Identity(n, n), Waveform::SC, 0, 0, 0, 0, "sc"};
}

inline ModulationBasis ofdm_basis(int n) {
    return {n, dft_matrix(n).adjoint(), Waveform::OFDM, 0, 0, 0, 0, "ofdm"};
}

inline ModulationBasis otfs_basis(int n1, int n2) {
    if (n1 < 1 || n2 < 1) throw std::invalid_argument("otfs_basis: factors must be >= 1");
    const int n = n1 * n2;
    const Mat f1h = dft_matrix(n1).adjoint();
    Mat u = Mat::Zero(n, n);
    for (int bc = 0; bc < n1; ++bc)
        for (int br = 0; br < n1; ++br)
            u.block(br * n2, bc * n2, n2, n2) = f1h(br, bc) * Mat::Identity(n2, n2);
    ModulationBasis b{n, std::move(u), Waveform::OTFS, n1, n2, 0, 0, "otfs"};
    return b;
}

inline ModulationBasis afdm_basis(int n, double c1, double c2) {
    if (n < 1) throw std::invalid_argument("afdm_basis: n must be >= 1");
    const double slope = 2.0 * n * c1;
    if (std::abs(slope - std::round(slope)) > 1e-9)
        throw std::invalid_argument("afdm_basis: 2*N*c1 must be an integer, got " +
                                    std::to_string(slope));
    const Vec d1 = chirp_diagonal(n, c1);
    const Vec d2 = chirp_diagonal(n, c2);
    // U = Lambda_{c1}^H F^H Lambda_{c2}^H.
    Mat u = dft_matrix(n).adjoint();
    u = d1.conjugate().asDiagonal() * u;
    u = u * d2.conjugate().asDiagonal();
    return {n, std::move(u), Waveform::AFDM, 0, 0, c1, c2, "afdm"};
}

inline ModulationBasis custom_basis(Mat u, std::string label = "custom", double tol = 1e-10) {
    if (u.rows() != u.cols() || u.rows() < 1)
        throw std::invalid_argument("custom_basis: matrix must be square");
    const double err = unitarity_error(u);
    if (err > tol)
        throw std::invalid_argument("custom_basis: matrix is not unitary (max deviation " +
                                    std::to_string(err) + ")");
    const int n = static_cast<int>(u.rows());
    return {n, std::move(u), Waveform::Custom, 0, 0, 0, 0, std::move(label)};
}

/// Haar-distributed random unitary: QR of a complex Gaussian matrix with the
/// R diagonal phase fixed, which also makes the draw deterministic per seed.
inline Mat haar_unitary(int n, uint64_t seed, uint64_t stream = 0) {
    Rng rng(seed, stream);
    Mat g(n, n);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r) g(r, c) = rng.next_complex_normal();
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < n; ++c) {
        const cxd d = r(c, c);
        const double mag = std::abs(d);
        q.col(c) *= (mag > 0.0) ? d / mag : cxd(1.0, 0.0);
    }
    return q;
}

// ---------------------------------------------------------------------------
// 2D signaling, X = U S V with fast-time basis U (N) and slow-time basis V (M).
// ---------------------------------------------------------------------------

struct Scheme2D {
    ModulationBasis u_basis;  // size N
    ModulationBasis v_basis;  // size M
    Waveform kind = Waveform::Custom;

    int n() const { return u_basis.n; }
    int m() const { return v_basis.n; }
};

inline Scheme2D sc_scheme(int n, int m) { return {sc_basis(n), sc_basis(m), Waveform::SC}; }

inline Scheme2D ofdm_scheme(int n, int m) { return {ofdm_basis(n), sc_basis(m), Waveform::OFDM}; }

/// 2D OTFS keeps fast time untouched and spreads along slow time (U = I,
/// V = F_M^H); the 1D OTFS basis is the serialized relative of this scheme,
/// not the same matrix.
inline Scheme2D otfs_scheme(int n, int m) {
    Scheme2D s{sc_basis(n), ofdm_basis(m), Waveform::OTFS};
    s.v_basis.label = "otfs-slow-time";
    return s;
}

inline Scheme2D afdm_scheme(int n, int m, double c1, double c2) {
    return {afdm_basis(n, c1, c2), sc_basis(m), Waveform::AFDM};
}

inline Scheme2D custom_scheme(Mat u, Mat v, double tol = 1e-10) {
    return {custom_basis(std::move(u), "custom-u", tol), custom_basis(std::move(v), "custom-v", tol),
            Waveform::Custom};
}

// ---------------------------------------------------------------------------
// Modulation
// ---------------------------------------------------------------------------

inline Vec modulate(const ModulationBasis& basis, const Vec& symbols) {
    if (symbols.size() != basis.n)
        throw std::invalid_argument("modulate: symbol length " + std::to_string(symbols.size()) +
                                    " does not match basis size " + std::to_string(basis.n));
    return basis.matrix * symbols;
}

inline Mat modulate2d(const Scheme2D& scheme, const Mat& symbols) {
    if (symbols.rows() != scheme.n() || symbols.cols() != scheme.m())
        throw std::invalid_argument("modulate2d: symbol block must be N x M");
    return scheme.u_basis.matrix * symbols * scheme.v_basis.matrix;
}

/// Column-major flattening; satisfies vec(U S V) = (V^T kron U) vec(S).
inline Vec vec2d(const Mat& x) {
    return Eigen::Map<const Vec>(x.data(), x.size());
}

inline Mat unvec2d(const Vec& x, int rows, int cols) {
    if (x.size() != static_cast<Eigen::Index>(rows) * cols)
        throw std::invalid_argument("unvec2d: size mismatch");
    return Eigen::Map<const Mat>(x.data(), rows, cols);
}

}  // namespace aflab
