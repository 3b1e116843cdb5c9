#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace maslov {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

// Bad input or violated precondition. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Quadrature, stabilization, winding or Newton failed to converge (exit 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A theory-level invariant did not hold (exit 1).
class TheoryViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Blocks {
    Mat s, v, t, u;
};

inline Blocks blocks_of(const Mat& m)
{
    const Eigen::Index n = m.rows() / 2;
    return {m.topLeftCorner(n, n), m.topRightCorner(n, n), m.bottomLeftCorner(n, n),
            m.bottomRightCorner(n, n)};
}

// Number of singular values above tol * max(1, largest singular value).
int numerical_rank(const Mat& a, double tol);
int numerical_rank(const CMat& a, double tol);

// Smallest singular value relative to max(1, largest), for borderline flags.
double relative_smallest_singular(const Mat& a);

} // namespace maslov
