#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aflab/rng.hpp"
#include "aflab/types.hpp"

namespace aflab {

struct ConstellationStats {
    cxd mean;
    double power;
    cxd pseudo_variance;
    double kurtosis;

    bool sub_gaussian() const { return kurtosis < 2.0; }
    bool super_gaussian() const { return kurtosis > 2.0; }
};

struct SymbolBlock {
    Mat values;  // rows x cols, i.i.d. symbols
    uint64_t seed = 0;
    std::string constellation_label;
};

/**
 * A unit-power, zero-mean, zero-pseudo-variance symbol alphabet.
 *
 * Finite constellations carry an explicit point list with probabilities.
 * The complex Gaussian alphabet is represented as a distribution marker
 * (empty point list); operations that need a finite alphabet reject it.
 *
 * Constructors enforce the symbol model up to `kModelTol` and throw
 * AssumptionError otherwise, since every closed form downstream silently
 * assumes it. Values are immutable after construction.
 */
class Constellation {
public:
    static constexpr double kModelTol = 1e-12;

    /// Square QAM (order in {4, 16, 64, 256}), unit power by construction:
    /// the integer grid is divided by sqrt(2(m^2-1)/3) in closed form.
    static Constellation qam(int order) {
        const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
        if (order < 4 || m * m != order)
            throw std::invalid_argument("qam: order must be a square (4, 16, 64, 256), got " +
                                        std::to_string(order));
        if (order > 256)
            throw std::invalid_argument("qam: order above 256 not supported");
        const double scale = 1.0 / std::sqrt(2.0 * (m * m - 1) / 3.0);
        std::vector<cxd> pts;
        pts.reserve(order);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                pts.emplace_back((2 * a - m + 1) * scale, (2 * b - m + 1) * scale);
        return finite("qam" + std::to_string(order), std::move(pts));
    }

    /// Unit-circle PSK. BPSK (order 2) violates zero pseudo-variance and is
    /// rejected rather than silently producing wrong sidelobe predictions.
    static Constellation psk(int order) {
        if (order < 2) throw std::invalid_argument("psk: order must be >= 2");
        if (order == 2)
            throw AssumptionError("psk: BPSK has nonzero pseudo-variance E[s^2]=1; "
                                  "the symbol model here requires E[s^2]=0");
        std::vector<cxd> pts;
        pts.reserve(order);
        for (int n = 0; n < order; ++n)
            pts.push_back(unit_phase(static_cast<double>(n) / order));
        return finite("psk" + std::to_string(order), std::move(pts));
    }

    /// Standard circularly-symmetric complex Gaussian, kurtosis 2.
    static Constellation gaussian() {
        Constellation c;
        c.label_ = "gaussian";
        c.gaussian_ = true;
        return c;
    }

    /**
     * Two concentric PSK rings with inner-ring probability p. Radii are
     * rescaled to unit power, so the alphabet realizes any kurtosis
     * p*r1'^4 + (1-p)*r2'^4 >= 1; with r1 != r2 this reaches the
     * super-Gaussian regime that plain QAM/PSK cannot.
     */
    static Constellation two_ring(double inner_radius, double outer_radius, double inner_prob,
                                  int phases_per_ring) {
        if (!(inner_radius > 0.0) || !(outer_radius > 0.0))
            throw std::invalid_argument("two_ring: radii must be positive");
        if (!(inner_prob > 0.0) || !(inner_prob < 1.0))
            throw std::invalid_argument("two_ring: inner_prob must lie in (0, 1)");
        if (phases_per_ring < 3)
            throw std::invalid_argument("two_ring: need at least 3 phases per ring "
                                        "(fewer breaks zero mean / zero pseudo-variance)");
        const double power =
            inner_prob * inner_radius * inner_radius + (1.0 - inner_prob) * outer_radius * outer_radius;
        const double r1 = inner_radius / std::sqrt(power);
        const double r2 = outer_radius / std::sqrt(power);
        std::vector<cxd> pts;
        std::vector<double> probs;
        pts.reserve(2 * phases_per_ring);
        probs.reserve(2 * phases_per_ring);
        for (int n = 0; n < phases_per_ring; ++n) {
            pts.push_back(r1 * unit_phase(static_cast<double>(n) / phases_per_ring));
            probs.push_back(inner_prob / phases_per_ring);
        }
        for (int n = 0; n < phases_per_ring; ++n) {
            pts.push_back(r2 * unit_phase(static_cast<double>(n) / phases_per_ring));
            probs.push_back((1.0 - inner_prob) / phases_per_ring);
        }
        return finite("two-ring", std::move(pts), std::move(probs));
    }

    /// User-supplied alphabet (e.g. loaded from file); validated like the
    /// built-ins. Probabilities default to uniform.
    static Constellation from_points(std::string label, std::vector<cxd> points,
                                     std::vector<double> probs = {}) {
        return finite(std::move(label), std::move(points), std::move(probs));
    }

    bool is_gaussian() const { return gaussian_; }
    const std::string& label() const { return label_; }
    const std::vector<cxd>& points() const { return points_; }
    const std::vector<double>& probs() const { return probs_; }

    /// Exact moments from the point list (analytic values for Gaussian).
    ConstellationStats stats() const {
        if (gaussian_) return {cxd(0.0, 0.0), 1.0, cxd(0.0, 0.0), 2.0};
        cxd mean(0.0, 0.0), pv(0.0, 0.0);
        double power = 0.0, fourth = 0.0;
        for (size_t i = 0; i < points_.size(); ++i) {
            const cxd s = points_[i];
            const double p = probs_[i];
            const double a2 = std::norm(s);
            mean += p * s;
            pv += p * s * s;
            power += p * a2;
            fourth += p * a2 * a2;
        }
        return {mean, power, pv, fourth / (power * power)};
    }

    double kurtosis() const { return stats().kurtosis; }

    /// i.i.d. block of symbols; deterministic in (seed) and independent of
    /// how many blocks were drawn before (fresh substream per call).
    SymbolBlock sample(int rows, int cols, uint64_t seed) const {
        if (rows < 1 || cols < 1) throw std::invalid_argument("sample: shape must be at least 1x1");
        Rng rng(seed);
        Mat out(rows, cols);
        if (gaussian_) {
            for (int c = 0; c < cols; ++c)
                for (int r = 0; r < rows; ++r) out(r, c) = rng.next_complex_normal();
        } else if (uniform_) {
            const auto n = static_cast<uint32_t>(points_.size());
            for (int c = 0; c < cols; ++c)
                for (int r = 0; r < rows; ++r) out(r, c) = points_[rng.next_below(n)];
        } else {
            for (int c = 0; c < cols; ++c)
                for (int r = 0; r < rows; ++r) out(r, c) = points_[sample_index(rng.next_double())];
        }
        return {std::move(out), seed, label_};
    }

    /// Symbol draw from an externally managed stream (Monte-Carlo substreams).
    cxd draw(Rng& rng) const {
        if (gaussian_) return rng.next_complex_normal();
        if (uniform_) return points_[rng.next_below(static_cast<uint32_t>(points_.size()))];
        return points_[sample_index(rng.next_double())];
    }

    /// Re-check the symbol model; AssumptionError on violation.
    void validate(double tol = kModelTol) const {
        if (gaussian_) return;
        if (points_.empty()) throw std::invalid_argument("constellation has no points");
        double psum = 0.0;
        for (double p : probs_) {
            if (p < 0.0) throw std::invalid_argument("constellation probabilities must be nonnegative");
            psum += p;
        }
        if (std::abs(psum - 1.0) > tol)
            throw std::invalid_argument("constellation probabilities must sum to 1");
        const ConstellationStats st = stats();
        if (std::abs(st.power - 1.0) > tol)
            throw AssumptionError(label_ + ": average power " + std::to_string(st.power) +
                                  " differs from 1");
        if (std::abs(st.mean) > tol)
            throw AssumptionError(label_ + ": mean is not zero");
        if (std::abs(st.pseudo_variance) > tol)
            throw AssumptionError(label_ + ": pseudo-variance is not zero");
    }

private:
    Constellation() = default;

    static Constellation finite(std::string label, std::vector<cxd> points,
                                std::vector<double> probs = {}) {
        Constellation c;
        c.label_ = std::move(label);
        c.points_ = std::move(points);
        if (probs.empty()) {
            c.uniform_ = true;
            c.probs_.assign(c.points_.size(), 1.0 / static_cast<double>(c.points_.size()));
        } else {
            if (probs.size() != c.points_.size())
                throw std::invalid_argument("constellation: points/probs size mismatch");
            c.probs_ = std::move(probs);
            c.uniform_ = std::all_of(c.probs_.begin(), c.probs_.end(), [&](double p) {
                return std::abs(p - c.probs_[0]) <= 1e-15;
            });
        }
        c.cum_.resize(c.probs_.size());
        double acc = 0.0;
        for (size_t i = 0; i < c.probs_.size(); ++i) {
            acc += c.probs_[i];
            c.cum_[i] = acc;
        }
        c.cum_.back() = 1.0;
        c.validate();
        return c;
    }

    size_t sample_index(double u) const {
        return std::lower_bound(cum_.begin(), cum_.end(), u) - cum_.begin();
    }

    std::string label_;
    std::vector<cxd> points_;
    std::vector<double> probs_;
    std::vector<double> cum_;
    bool uniform_ = false;
    bool gaussian_ = false;
};

// ---------------------------------------------------------------------------
// Fourth-moment matrix E[vec(s s^H) vec(s s^H)^H] and its analytic structure.
// ---------------------------------------------------------------------------

struct FourthMomentResult {
    Mat moment;                  // n^2 x n^2
    double structure_deviation;  // max |moment - (I + S1 + S2)|
    bool low_trial_warning = false;
};

/// Analytic fourth-moment structure for n i.i.d. model symbols:
/// identity, plus (kappa-2) on the |s_i|^2 diagonal slots, plus the
/// rank-style block of ones coupling those slots.
inline Mat fourth_moment_structure(int n, double kappa) {
    Mat s = Mat::Identity(n * n, n * n);
    for (int i = 0; i < n; ++i) {
        const int di = i * (n + 1);
        s(di, di) += kappa - 2.0;
        for (int j = 0; j < n; ++j) s(di, j * (n + 1)) += 1.0;
    }
    return s;
}

namespace detail {

inline FourthMomentResult finish_fourth_moment(Mat m, int n, double kappa, bool warn) {
    const Mat expect = fourth_moment_structure(n, kappa);
    double dev = 0.0;
    for (int c = 0; c < m.cols(); ++c)
        for (int r = 0; r < m.rows(); ++r) dev = std::max(dev, std::abs(m(r, c) - expect(r, c)));
    return {std::move(m), dev, warn};
}

}  // namespace detail

/// Monte-Carlo estimate over `trials` i.i.d. symbol vectors of length n.
/// n is capped at 4 (the matrix has n^4 entries); trials below 1e4 are
/// accepted but flagged.
inline FourthMomentResult fourth_moment_matrix(const Constellation& c, int n, long trials,
                                               uint64_t seed) {
    if (n < 1 || n > 4) throw std::invalid_argument("fourth_moment_matrix: n must be in [1, 4]");
    if (trials < 1) throw std::invalid_argument("fourth_moment_matrix: trials must be positive");
    Mat acc = Mat::Zero(n * n, n * n);
    Vec s(n), outer(n * n);
    for (long t = 0; t < trials; ++t) {
        Rng rng(seed, static_cast<uint64_t>(t));
        for (int i = 0; i < n; ++i) s(i) = c.draw(rng);
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a) outer(b * n + a) = s(a) * std::conj(s(b));
        acc.noalias() += outer * outer.adjoint();
    }
    acc /= static_cast<double>(trials);
    return detail::finish_fourth_moment(std::move(acc), n, c.stats().kurtosis, trials < 10000);
}

/// Exact expectation by enumerating the full alphabet^n (finite alphabets only).
inline FourthMomentResult fourth_moment_matrix_exhaustive(const Constellation& c, int n) {
    if (c.is_gaussian())
        throw std::invalid_argument("fourth_moment_matrix_exhaustive: Gaussian alphabet "
                                    "cannot be enumerated");
    if (n < 1 || n > 4) throw std::invalid_argument("fourth_moment_matrix_exhaustive: n must be in [1, 4]");
    const auto& pts = c.points();
    const auto& probs = c.probs();
    const size_t alphabet = pts.size();
    Mat acc = Mat::Zero(n * n, n * n);
    std::vector<size_t> digit(n, 0);
    Vec outer(n * n);
    while (true) {
        double weight = 1.0;
        for (int i = 0; i < n; ++i) weight *= probs[digit[i]];
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a) outer(b * n + a) = pts[digit[a]] * std::conj(pts[digit[b]]);
        acc.noalias() += weight * (outer * outer.adjoint());
        int pos = 0;
        while (pos < n && ++digit[pos] == alphabet) digit[pos++] = 0;
        if (pos == n) break;
    }
    return detail::finish_fourth_moment(std::move(acc), n, c.stats().kurtosis, false);
}

}  // namespace aflab
