#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "aflab/types.hpp"

namespace aflab {

// ---------------------------------------------------------------------------
// Delay / Doppler shift operators on Z_N. All shift applications are O(N)
// without materializing the matrix; dense builders exist for cross-checks.
// ---------------------------------------------------------------------------

/// Periodic delay J_{N,k}: (J v)[m] = v[(m - k) mod N].
inline Vec apply_time_shift(int k, const Vec& v) {
    const int n = static_cast<int>(v.size());
    Vec out(n);
    const int kk = mod_n(k, n);
    for (int m = 0; m < n; ++m) out(m) = v(mod_n(m - kk, n));
    return out;
}

/// Doppler D_{N,q}: multiplies entry m by exp(j*2*pi*q*m/N).
inline Vec apply_freq_shift(int q, const Vec& v) {
    const int n = static_cast<int>(v.size());
    Vec out(n);
    for (int m = 0; m < n; ++m)
        out(m) = v(m) * unit_phase(static_cast<double>(mod_n(1LL * q * m, n)) / n);
    return out;
}

/// G_{k,q} = D_{N,q} J_{N,k}.
inline Vec apply_g(int k, int q, const Vec& v) { return apply_freq_shift(q, apply_time_shift(k, v)); }

inline Mat time_shift_matrix(int n, int k) {
    Mat j = Mat::Zero(n, n);
    for (int m = 0; m < n; ++m) j(m, mod_n(m - k, n)) = 1.0;
    return j;
}

inline Mat freq_shift_matrix(int n, int q) {
    Mat d = Mat::Zero(n, n);
    for (int m = 0; m < n; ++m) d(m, m) = unit_phase(static_cast<double>(mod_n(1LL * q * m, n)) / n);
    return d;
}

inline Mat g_matrix(int n, int k, int q) { return freq_shift_matrix(n, q) * time_shift_matrix(n, k); }

/// Phase by which delay and Doppler shifts fail to commute:
/// D_q J_k = commutation_phase(k, q, n) * J_k D_q. Pinned by the dense-matrix
/// test; with D aligned to exp(+j*2*pi*q*m/N) and J shifting downward the
/// phase is exp(+j*2*pi*q*k/N).
inline cxd commutation_phase(int k, int q, int n) {
    return unit_phase(static_cast<double>(mod_n(1LL * q * k, n)) / n);
}

// ---------------------------------------------------------------------------
// Cyclic prefix plumbing.
// ---------------------------------------------------------------------------

inline Vec cp_add(const Vec& v, int n_cp) {
    const int n = static_cast<int>(v.size());
    if (n_cp < 0 || n_cp > n) throw std::invalid_argument("cp_add: need 0 <= n_cp <= N");
    Vec out(n + n_cp);
    out.head(n_cp) = v.tail(n_cp);
    out.tail(n) = v;
    return out;
}

inline Vec cp_remove(const Vec& v, int n_cp) {
    const int n = static_cast<int>(v.size()) - n_cp;
    if (n_cp < 0 || n < 0) throw std::invalid_argument("cp_remove: need 0 <= n_cp <= length");
    return v.tail(n);
}

/// Aperiodic (zero-padding) delay used by the physical channel.
inline Vec apply_aperiodic_time_shift(int k, const Vec& v) {
    const int n = static_cast<int>(v.size());
    if (k < 0 || k > n) throw std::invalid_argument("aperiodic shift: need 0 <= k <= length");
    Vec out = Vec::Zero(n);
    out.tail(n - k) = v.head(n - k);
    return out;
}

/// Checks R_cp * Jtilde_{N+Ncp,k} * A_cp == J_{N,k} by applying both sides to
/// the standard basis. True iff the max deviation is <= 1e-14, which requires
/// the delay to be covered by the prefix; k > n_cp reports false rather than
/// throwing, since "the identity fails" is the informative outcome there.
inline bool cp_shift_identity_check(int n, int n_cp, int k) {
    if (n_cp < 0 || n_cp > n || k < 0 || k > n) throw std::invalid_argument("cp_shift_identity_check: bad sizes");
    double dev = 0.0;
    Vec e = Vec::Zero(n);
    for (int i = 0; i < n; ++i) {
        e(i) = 1.0;
        const Vec lhs = cp_remove(apply_aperiodic_time_shift(k, cp_add(e, n_cp)), n_cp);
        const Vec rhs = apply_time_shift(k, e);
        dev = std::max(dev, (lhs - rhs).cwiseAbs().maxCoeff());
        e(i) = 0.0;
    }
    return dev <= 1e-14;
}

// ---------------------------------------------------------------------------
// Diagonalizability index set and its geometry.
// ---------------------------------------------------------------------------

struct ShiftIndex {
    int k = 0;  // delay
    int q = 0;  // Doppler
};

inline bool operator==(const ShiftIndex& a, const ShiftIndex& b) { return a.k == b.k && a.q == b.q; }
inline bool operator<(const ShiftIndex& a, const ShiftIndex& b) {
    return a.k != b.k ? a.k < b.k : a.q < b.q;
}

/// Symplectic form <a.q * b.k - a.k * b.q> mod N; zero iff G_a and G_b commute.
inline int symplectic(const ShiftIndex& a, const ShiftIndex& b, int modulus) {
    return mod_n(1LL * a.q * b.k - 1LL * a.k * b.q, modulus);
}

struct IndexSet {
    int modulus = 0;
    std::vector<ShiftIndex> members;  // sorted
    std::string basis_label;

    bool contains(int k, int q) const {
        return std::binary_search(members.begin(), members.end(),
                                  ShiftIndex{mod_n(k, modulus), mod_n(q, modulus)});
    }
    int cardinality() const { return static_cast<int>(members.size()); }
};

/// Off-diagonal Frobenius norm of U^H G_{k,q} U divided by sqrt(N).
/// Zero means G_{k,q} is diagonalized by U. The off-diagonal energy is summed
/// directly, so values near zero are resolved down to machine precision.
inline double diag_deviation(const Mat& u, int k, int q) {
    const int n = static_cast<int>(u.rows());
    Mat gu(n, n);
    const int kk = mod_n(k, n);
    for (int m = 0; m < n; ++m)
        gu.row(m) = unit_phase(static_cast<double>(mod_n(1LL * q * m, n)) / n) * u.row(mod_n(m - kk, n));
    const Mat t = u.adjoint() * gu;
    double off = 0.0;
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r)
            if (r != c) off += std::norm(t(r, c));
    return std::sqrt(off / n);
}

/// Exhaustive scan of Z_N^2 for the shifts diagonalized by U.
inline IndexSet index_set(const Mat& u, double tol = 1e-9, std::string basis_label = "",
                          int threads = 1) {
    const int n = static_cast<int>(u.rows());
    std::vector<std::vector<ShiftIndex>> per_k(n);
    const auto scan_row = [&](int k) {
        for (int q = 0; q < n; ++q)
            if (diag_deviation(u, k, q) <= tol) per_k[k].push_back({k, q});
    };
    if (threads <= 1 || n < 8) {
        for (int k = 0; k < n; ++k) scan_row(k);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (int k = next.fetch_add(1); k < n; k = next.fetch_add(1)) scan_row(k);
            });
        for (auto& th : pool) th.join();
    }
    IndexSet s{n, {}, std::move(basis_label)};
    for (auto& row : per_k) s.members.insert(s.members.end(), row.begin(), row.end());
    std::sort(s.members.begin(), s.members.end());
    return s;
}

/// True iff the set contains no corner triple {(a,b), (a,b+1), (a+1,b)} mod N,
/// i.e. the minimum-sidelobe locations never fill a 2x2 block.
inline bool check_no_2x2(const IndexSet& s) {
    for (const auto& p : s.members)
        if (s.contains(p.k, p.q + 1) && s.contains(p.k + 1, p.q)) return false;
    return true;
}

/// Closure of the index pattern under addition and negation mod N (the
/// projected subgroup structure behind the geometry results).
inline bool closed_under_group(const IndexSet& s) {
    for (const auto& a : s.members) {
        if (!s.contains(-a.k, -a.q)) return false;
        for (const auto& b : s.members)
            if (!s.contains(a.k + b.k, a.q + b.q)) return false;
    }
    return true;
}

struct GeometryReport {
    int modulus = 0;
    int cardinality = 0;
    bool cardinality_ok = false;        // |I| <= N
    bool no_2x2 = false;                // no corner triple
    bool pairwise_symplectic_zero = false;
    bool all_collinear = false;         // every triple has zero lifted cross product
    double min_triangle_area = std::numeric_limits<double>::quiet_NaN();
    int max_symplectic_residue = 0;     // max over triples of <cross> mod N (0 for commuting sets)
    bool area_bound_ok = false;         // min area >= N/2, vacuously true when collinear
};

/**
 * Triangle geometry of an index set. Differences are lifted to the minimal
 * magnitude representatives in (-N/2, N/2] before the cross product; a zero
 * lifted cross product classifies the triple as collinear, otherwise its
 * triangle area is half the absolute cross product. For commuting sets the
 * cross product is always a multiple of N, so non-collinear areas are
 * quantized to multiples of N/2.
 */
inline GeometryReport geometry_report(const IndexSet& s) {
    const int n = s.modulus;
    GeometryReport rep;
    rep.modulus = n;
    rep.cardinality = s.cardinality();
    rep.cardinality_ok = rep.cardinality <= n;
    rep.no_2x2 = check_no_2x2(s);

    rep.pairwise_symplectic_zero = true;
    for (size_t i = 0; i < s.members.size() && rep.pairwise_symplectic_zero; ++i)
        for (size_t j = i + 1; j < s.members.size(); ++j)
            if (symplectic(s.members[i], s.members[j], n) != 0) {
                rep.pairwise_symplectic_zero = false;
                break;
            }

    const auto lift = [n](int d) {
        int r = mod_n(d, n);
        if (r > n / 2) r -= n;
        return r;
    };

    long long min_abs_cross = -1;
    rep.all_collinear = true;
    const auto& m = s.members;
    for (size_t i = 0; i < m.size(); ++i)
        for (size_t j = i + 1; j < m.size(); ++j)
            for (size_t l = j + 1; l < m.size(); ++l) {
                const long long d1k = lift(m[j].k - m[i].k), d1q = lift(m[j].q - m[i].q);
                const long long d2k = lift(m[l].k - m[i].k), d2q = lift(m[l].q - m[i].q);
                const long long cross = d1q * d2k - d1k * d2q;
                rep.max_symplectic_residue = std::max(rep.max_symplectic_residue, mod_n(cross, n));
                if (cross == 0) continue;
                rep.all_collinear = false;
                const long long a = std::llabs(cross);
                if (min_abs_cross < 0 || a < min_abs_cross) min_abs_cross = a;
            }

    if (min_abs_cross >= 0) rep.min_triangle_area = 0.5 * static_cast<double>(min_abs_cross);
    rep.area_bound_ok = rep.all_collinear || rep.min_triangle_area >= 0.5 * n - 1e-9;
    return rep;
}

}  // namespace aflab
