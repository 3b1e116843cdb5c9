#pragma once

#include "maslov/galerkin.hpp"

#include <array>
#include <cstdint>
#include <optional>

namespace maslov {

enum class ProblemKind { first_order, second_order_odd, second_order_neumann };
const char* problem_kind_name(ProblemKind k);
ProblemKind parse_problem_kind(const std::string& s);

// c (z^T W z)^p
struct PolyTerm {
    double c = 1.0;
    Mat w;
    int p = 2;
};

class Potential {
public:
    Potential() = default;
    explicit Potential(std::vector<PolyTerm> terms);

    double value(const Vec& z) const;
    Vec gradient(const Vec& z) const;
    Mat hessian(const Vec& z) const;
    const std::vector<PolyTerm>& terms() const { return terms_; }
    int dim() const { return dim_; }

private:
    std::vector<PolyTerm> terms_;
    int dim_ = 0;
};

// H_K = chi(|z|) H + (1 - chi(|z|)) R_K |z|^4, chi = 1 below K and 0 above K + 1
struct TruncationSpec {
    double k = 0.0;
    double r_k = 0.0;
};

// chi and its first two derivatives at s
std::array<double, 3> cutoff(double s, double k);

struct HamiltonianSpec {
    std::string name;
    int n = 1;
    Mat b;                     // quadratic part, block diagonal and semi-positive
    Potential h;               // nonlinear part on R^{2n}
    ProblemKind kind = ProblemKind::first_order;
    double mu = 4.0, r0 = 1.0; // superquadratic parameters for the spot check
    std::optional<TruncationSpec> truncation;

    double nonlinear(const Vec& z) const;
    Vec nonlinear_gradient(const Vec& z) const;
    Mat nonlinear_hessian(const Vec& z) const;
    double energy(const Vec& z) const;
    Vec field(const Vec& z) const;            // J (B z + H'(z))
    Mat field_jacobian(const Vec& z) const;   // J (B + H''(z))
};

void to_json(nlohmann::json& j, const HamiltonianSpec& h);

// First order: H = 1/2 z^T B z + sum c (z^T W z)^p.
HamiltonianSpec first_order_hamiltonian(const std::string& name, const Mat& b, std::vector<PolyTerm> terms,
                                        double mu = 4.0, double r0 = 1.0);
// Second order with V(x) = sum c (x^T W x)^p on R^n; W is n x n. The odd variant uses z = (x, -x')
// with B = diag(0, I); the Neumann variant uses z = (x', x) with B = diag(I, 0).
HamiltonianSpec second_order_hamiltonian(const std::string& name, int n, std::vector<PolyTerm> v_terms,
                                         ProblemKind kind, double mu = 4.0, double r0 = 1.0);
// quartic-first-order, quartic-plus-B, second-order-x4, second-order-even-poly
HamiltonianSpec builtin_hamiltonian(const std::string& name, ProblemKind second_order_kind = ProblemKind::second_order_odd);
std::vector<std::string> builtin_hamiltonian_names();

struct HypothesisReport {
    double symmetry_defect = 0.0;   // max |H(Nz) - H(z)| / max(1, |H(z)|)
    bool b_block_diagonal = false;
    bool b_semi_positive = false;
    double b_norm = 0.0;
    bool superquadratic = false;    // 0 < mu H <= H'.z on |z| >= r0 samples
    bool small_at_zero = false;     // H = o(|z|^2)
    bool nonnegative = false;
    bool convex = true;             // H'' >= 0 on samples (second order: V'' > 0 off the origin)
    bool ok() const;
};

void to_json(nlohmann::json& j, const HypothesisReport& r);

HypothesisReport check_hypotheses(const HamiltonianSpec& h, std::uint64_t seed = 1, int samples = 200);

// Smooth truncation with R_K = 1.1 max_{K <= |z| <= K+1} H/|z|^4 (sampled).
HamiltonianSpec truncate_hamiltonian(const HamiltonianSpec& h, double k, std::uint64_t seed = 1);

struct BrakeOrbit {
    HamiltonianSpec spec;
    double tau = 2.0;
    int steps_half = 0;
    std::vector<Vec> half;     // uniform samples on [0, tau/2]
    std::vector<Vec> full;     // uniform samples on [0, tau], same spacing
    Vec start;                 // a with x(0) = (0, a)
    double residual = 0.0;     // |first n coordinates of x(tau/2)|
    double energy_drift = 0.0; // relative
    double action = 0.0;       // integral over [0, tau/2] of 1/2 x'.Jx - H
    double amplitude = 0.0;    // sup |x - mean|
    double sup_norm = 0.0;
    double junction_mismatch = 0.0;
    int newton_iterations = 0;
    std::uint64_t seed_index = 0;

    double step() const { return 0.5 * tau / steps_half; }
    Vec at(double t) const;    // any t, by symmetry and a short RK4 step from the nearest sample
};

void to_json(nlohmann::json& j, const BrakeOrbit& o);

struct ShootOptions {
    int steps_half = 13860;      // full orbit grid 27720 = lcm(1..12)
    int max_newton = 60;
    double tol = 1e-9;
    std::vector<double> radii{0.25, 0.5, 1.0, 2.0, 4.0};
    int directions = 4;          // per radius, besides +- coordinate axes
    std::uint64_t seed = 1;
    unsigned threads = 0;
    double max_start = 1e3;
};

// Newton shooting from one starting guess; throws NumericalError on divergence or collapse.
BrakeOrbit shoot_orbit(const HamiltonianSpec& h, double tau, const Vec& guess, const ShootOptions& opt = {});

struct SweepResult {
    std::vector<BrakeOrbit> distinct;    // distinct orbits found, by increasing action
    BrakeOrbit selected;                 // minimal positive action
    int seeds = 0, converged = 0;
    nlohmann::json log;
};

// Multi-seed sweep; enforces tau < 2 pi / |B| for the first-order and Neumann kinds.
SweepResult sweep_orbits(const HamiltonianSpec& h, double tau, const ShootOptions& opt = {});

// Fills orbit.full from orbit.half and measures the C^1 junction mismatch.
void extend_orbit(BrakeOrbit& orbit, double tol = 1e-7);

struct HxReport {
    double min_pointwise = 0.0;   // min eigenvalue of H''(x(t))
    double min_integral = 0.0;    // min eigenvalue of the integral over [0, tau/2]
    bool holds = false;
};

void to_json(nlohmann::json& j, const HxReport& r);

// s -> (tau/2)(B + H''(x(tau s / 2))), period 2, brake symmetric.
CoefficientPath linearize_orbit(const BrakeOrbit& orbit);
HxReport hx_condition(const BrakeOrbit& orbit, double margin = 1e-8);

struct OrbitIndices {
    IndexPair l0_winding, l0_galerkin;   // i_L0(x, tau/2)
    IndexPair periodic;                  // i_1(x, tau), nu_1
    IndexPair l0_sqrt_minus_one;         // i^{L0}_{sqrt -1}(x, tau/2)
    bool engines_agree = false;
};

void to_json(nlohmann::json& j, const OrbitIndices& r);

// Throws TheoryViolation when the engines disagree or nu_1 = 0.
OrbitIndices orbit_indices(const BrakeOrbit& orbit, const RelativeIndexPolicy& policy = {});

struct MinimalPeriod {
    double tau_min = 0.0;
    int k_star = 1;
    std::vector<int> divisors;   // k with x(t + tau/k) = x(t)
    double amplitude = 0.0;
};

void to_json(nlohmann::json& j, const MinimalPeriod& r);

// samples uniform on [0, tau] including both ends
MinimalPeriod minimal_period(const std::vector<Vec>& samples, double tau, double tol = 1e-6);

struct MorseLevel {
    int m = 0;
    int negative = 0;
    int null = 0;
    int expected_negative = 0;
    int negative_closed = 0;   // count in (-inf, d], the other convention
    bool holds = false;
};

struct MorseReport {
    int l0_index = 0, l0_nullity = 0;
    double d = 0.0;
    std::vector<MorseLevel> levels;
    Vec spectrum;                // eigenvalues at the largest level
    bool holds = false;
};

void to_json(nlohmann::json& j, const MorseReport& r);

// Eigenvalue counts of the Hessian of the truncated action on E_m, m in [m_lo, m_hi].
MorseReport morse_identity_check(const BrakeOrbit& orbit, int m_lo = 8, int m_hi = 16,
                                 const RelativeIndexPolicy& policy = {});
// Same identity for a linear system B on [0, 1] at the zero solution.
MorseReport linear_morse_check(const CoefficientPath& b, int m_lo, int m_hi, const RelativeIndexPolicy& policy = {});

struct SineMorseReport {
    int negative = 0, null = 0;
    int l0_index = 0, l0_nullity = 0;
    int modes = 0;
    double d = 0.0;
    bool holds = false;
};

void to_json(nlohmann::json& j, const SineMorseReport& r);

// Dirichlet Hessian of psi in the sine basis at an odd-variant orbit, against i_L0 of z.
SineMorseReport sine_morse_check(const BrakeOrbit& orbit, int modes = 32, const RelativeIndexPolicy& policy = {});

struct Certificate {
    nlohmann::json clauses;      // name -> {"pass": bool, ...}
    bool pass = false;
    std::optional<BrakeOrbit> orbit;
    Vec hessian_spectrum;
};

// Full pipeline for a first-order Hamiltonian.
Certificate verify_first_order(const HamiltonianSpec& h, double tau, const ShootOptions& opt = {},
                             const RelativeIndexPolicy& policy = {});
// Second-order pipeline; h must be of a second-order kind.
Certificate solve_second_order(const HamiltonianSpec& h, double tau, const ShootOptions& opt = {},
                               const RelativeIndexPolicy& policy = {});

// Closed-form half period data of x'' + 4 c x^3 = 0 (V = c x^4, n = 1): initial speed for which the
// first return to zero happens at time t.
double duffing_speed_for_zero(double c, double t);

} // namespace maslov
