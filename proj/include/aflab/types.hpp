#pragma once

#include <complex>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace aflab {

using cxd = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RealVec = Eigen::VectorXd;
using RealMat = Eigen::MatrixXd;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// e^{j*2*pi*turns}, with the argument reduced to (-0.5, 0.5] turns first so
/// large phase accumulations (chirps, high bin indices) keep full precision.
inline cxd unit_phase(double turns) {
    double t = turns - std::round(turns);
    return {std::cos(kTwoPi * t), std::sin(kTwoPi * t)};
}

/// Nonnegative residue of a mod n.
inline int mod_n(long long a, int n) {
    long long r = a % n;
    return static_cast<int>(r < 0 ? r + n : r);
}

/// Thrown when an input violates the unit-power / zero-mean /
/// zero-pseudo-variance symbol model every closed form here relies on.
class AssumptionError : public std::domain_error {
public:
    explicit AssumptionError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace aflab
