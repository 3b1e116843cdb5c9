#pragma once

#include "maslov/winding.hpp"

namespace maslov {

enum class SpaceKind { l0_fourier, l0_omega, periodic_omega };
const char* space_kind_name(SpaceKind k);
SpaceKind parse_space_kind(const std::string& s);

// Frequencies |j| <= m ordered 0, -1, 1, -2, 2, ... so each level is a leading block.
struct TruncationSpace {
    SpaceKind kind = SpaceKind::l0_fourier;
    double theta = 0.0;
    int m = 0;
    int n = 1;

    int block() const { return kind == SpaceKind::periodic_omega ? 2 * n : n; }
    int dimension() const { return (2 * m + 1) * block(); }
    std::vector<int> modes() const;           // j values in basis order
    double frequency(int j) const;            // theta + j pi, or theta + 2 pi j
};

TruncationSpace build_truncation(SpaceKind kind, double theta, int m, int n);

struct QuadratureOptions {
    double tol = 1e-10;
    int max_doublings = 10;
};

struct FormPair {
    CMat a, b;           // Hermitian; real-valued for the L0 kinds
    bool real = true;
    int panels = 0;      // composite Gauss-Legendre panels that met the tolerance
    double quad_change = 0.0;
};

// Forms of A = -J d/dt and B on the space for a coefficient path on [0, 1].
FormPair assemble_forms(const TruncationSpace& space, const CoefficientPath& b_unit,
                        const QuadratureOptions& quad = {});

struct MorseCounts {
    int negative = 0;
    int null = 0;
    int positive = 0;
    bool hazard = false; // an eigenvalue within 0.1 d of +-d
};

MorseCounts d_morse(const Vec& eigenvalues, double d);
Vec hermitian_eigenvalues(const CMat& h, bool real);

struct RelativeIndexPolicy {
    int window = 3;
    int m_max = 64;
    int m_start = 0;           // 0 picks a start from the coefficient norm
    QuadratureOptions quad;
    IntegratorOptions integ;
    double kernel_tol = 1e-8;
};

struct LevelCount {
    int m = 0;
    int minus_ab = 0;    // m^-_d(A - B)
    int minus_a = 0;     // m^-_d(A)
    int null_ab = 0;
};

struct RelativeIndexResult {
    SpaceKind kind = SpaceKind::l0_fourier;
    double theta = 0.0;
    int value = 0;                // I(A, A - B)
    int nullity = 0;              // m^0_d(A - B) at the top level
    int geometric_nullity = 0;    // from the monodromy
    double d = 0.0;
    int m_star = 0;
    int m_top = 0;
    bool hazard = false;
    std::vector<LevelCount> history;
    double nearest_eigenvalue = 0.0;  // signed non-kernel eigenvalue closest to zero
};

void to_json(nlohmann::json& j, const RelativeIndexResult& r);

// Relative index of the coefficient path b on [0, length], rescaled to [0, 1].
RelativeIndexResult relative_index(const CoefficientPath& b, double length, SpaceKind kind, double theta,
                                   const RelativeIndexPolicy& policy = {});

// Geometric nullity of the space kind for a monodromy matrix.
int geometric_nullity(const Mat& monodromy, SpaceKind kind, double theta, double tol = 1e-8);

IndexPair index_l0_galerkin(const CoefficientPath& b, double length, const RelativeIndexPolicy& policy = {});
IndexPair index_l0_omega(const CoefficientPath& b, double length, double theta,
                         const RelativeIndexPolicy& policy = {});
// omega = exp(i theta), theta in [0, 2 pi)
IndexPair index_omega(const CoefficientPath& b, double length, double theta, const RelativeIndexPolicy& policy = {});

struct ScanPoint {
    double theta;
    int index;
    int nullity;
};

std::vector<ScanPoint> index_function_scan(const CoefficientPath& b, double length, const std::vector<double>& thetas,
                                           const RelativeIndexPolicy& policy = {});

// Angles theta in [0, pi) where dim(gamma(1) L0 cap e^{theta J} L0) > 0, with multiplicities.
std::vector<std::pair<double, int>> l0_omega_crossings(const Mat& monodromy);

} // namespace maslov
