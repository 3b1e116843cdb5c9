#pragma once

#include "maslov/types.hpp"

#include <functional>
#include "json.hpp"
#include <optional>
#include <vector>

namespace maslov {

struct StandardMatrices {
    int n = 0;
    Mat j, n_refl, m_plus, m_minus, jn;
};

StandardMatrices standard_matrices(int n);
Mat standard_j(int n);
Mat reflection_n(int n);
Mat rotation(double theta);                 // R(theta), 2x2
Mat exp_tj(int n, double phi);              // exp(phi J), closed form

double symplectic_defect(const Mat& m);     // max |M^T J M - J|
void require_symplectic(const Mat& m, double tol, const char* what);

// Symplectic direct sum of a 2k1 and a 2k2 matrix.
Mat diamond(const Mat& m1, const Mat& m2);
Mat diamond_all(const std::vector<Mat>& ms);

enum class NormalFormKind { n1, r };
Mat normal_form(NormalFormKind kind, double param);
Mat n1(double lambda, double b);

struct UnitEigenvalue {
    cplx lambda;
    int algebraic = 0;
    int geometric = 0;
    int krein_p = 0;        // only meaningful for non-real lambda
    int krein_q = 0;
    bool ambiguous = false; // modulus within 2*tol of the circle boundary
};

struct SpectralInvariant {
    std::vector<UnitEigenvalue> unit;
    std::vector<cplx> off_circle;
    bool ambiguous = false;
};

struct SpectrumOptions {
    double circle_tol = 1e-8;
    double cluster_tol = 1e-5;
    double kernel_tol = 1e-8;
};

SpectralInvariant unit_spectrum(const Mat& m, const SpectrumOptions& opt = {});

// Signature (p, q) of x -> x^*(iJ)x on the generalized eigenspace of lambda.
std::pair<int, int> krein_signature(const Mat& m, cplx lambda, int algebraic = 0);

// dim_C ker(M - omega I).
int omega_nullity(const Mat& m, cplx omega, double tol = 1e-8);

// Sampled path t -> gamma(t) in Sp(2n), piecewise linear between samples.
struct SymplecticPath {
    int n = 0;
    std::vector<double> grid;
    std::vector<Mat> frames;

    double start() const { return grid.front(); }
    double end() const { return grid.back(); }
    const Mat& endpoint() const { return frames.back(); }
    std::size_t size() const { return frames.size(); }
    Mat at(double t) const;
    double max_defect() const;
};

enum class Representation { fourier_blocks, grid_samples, linearized_orbit, analytic };
const char* representation_name(Representation r);

// Continuous family B(t) of real symmetric 2n x 2n matrices.
class CoefficientPath {
public:
    using Evaluator = std::function<Mat(double)>;

    CoefficientPath() = default;
    CoefficientPath(int n, Evaluator f, Representation rep = Representation::analytic,
                    bool brake_symmetric = false, std::vector<double> breakpoints = {});

    static CoefficientPath constant(const Mat& b);
    // B(t) = c0 + sum_j cos(j pi t) c[j-1] + sin(j pi t) s[j-1]
    static CoefficientPath fourier(const Mat& c0, std::vector<Mat> cos_terms,
                                   std::vector<Mat> sin_terms);
    static CoefficientPath grid_samples(std::vector<double> times, std::vector<Mat> values);

    int n() const { return n_; }
    Mat operator()(double t) const { return f_(t); }
    Representation representation() const { return rep_; }
    bool brake_symmetric() const { return brake_; }
    const std::vector<double>& breakpoints() const { return breaks_; }

    // s -> T B(t0 + T s) on [0, 1].
    CoefficientPath rescaled(double length, double t0 = 0.0) const;

    nlohmann::json source; // serializable description, empty if analytic

private:
    int n_ = 0;
    Evaluator f_;
    Representation rep_ = Representation::analytic;
    bool brake_ = false;
    std::vector<double> breaks_;
};

struct IntegratorOptions {
    int steps_per_unit = 2048;
    int stages = 3;             // Gauss-Legendre collocation stages, 1 = implicit midpoint
    double symplectic_tol = 1e-9;
    bool reproject = true;
};

// Fundamental solution of d/dt gamma = J B(t) gamma on [t0, t0 + length].
SymplecticPath integrate_fundamental(const CoefficientPath& b, double length,
                                     const IntegratorOptions& opt = {}, double t0 = 0.0);

// Endpoint only, same integrator.
Mat monodromy(const CoefficientPath& b, double length, const IntegratorOptions& opt = {});

struct BrakeSymmetryReport {
    double reflection = 0.0;  // max |B(1+t) N - N B(1-t)|
    double periodicity = 0.0; // max |B(t+2) - B(t)|
    double symmetry = 0.0;    // max |B - B^T|
    bool ok(double tol) const { return reflection <= tol && periodicity <= tol && symmetry <= tol; }
};

BrakeSymmetryReport check_brake_symmetry(const CoefficientPath& b, int samples = 257);

} // namespace maslov
