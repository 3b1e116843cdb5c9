#pragma once

#include "maslov/galerkin.hpp"

#include <map>
#include <memory>

namespace maslov {

struct IteratedPath {
    SymplecticPath base;
    int k = 1;
    SymplecticPath full;
    double junction_mismatch = 0.0;
};

// Assembles gamma^k on [0, k] from the fundamental solution on [0, 1] (uniform grid) of a
// brake-symmetric system, using gamma(2) = N gamma(1)^{-1} N gamma(1).
IteratedPath iterate_path(const SymplecticPath& base, int k, double tol = 1e-8);

struct SplittingNumbers {
    int plus = 0;
    int minus = 0;
    double theta = 0.0;
    double eps = 0.0;              // last rung of the ladder
    int nullity = 0;
    std::vector<int> ladder_plus, ladder_minus;
};

void to_json(nlohmann::json& j, const SplittingNumbers& s);

// One-sided jumps of theta -> i_{exp(i theta)} at theta, for the path of b on [0, length].
SplittingNumbers splitting_numbers(const CoefficientPath& b, double length, double theta,
                                   const std::vector<double>& eps_ladder = {1e-2, 1e-3, 1e-4},
                                   const RelativeIndexPolicy& policy = {});

// Index data of one brake-symmetric system, computed lazily and shared between checks.
class IterationAnalysis {
public:
    IterationAnalysis(CoefficientPath b, RelativeIndexPolicy policy = {}, WindingOptions winding = {});

    int n() const { return b_.n(); }
    const CoefficientPath& coefficients() const { return b_; }
    const SymplecticPath& base();
    const IndexPair& l0_iterated(int k);              // i_L0(gamma^k) by winding on the assembled path
    const IndexPair& omega_gamma2(double theta);      // i_omega(gamma^2), omega = e^{i theta}
    const IndexPair& l0_omega_gamma1(double theta);   // i^{L0}_omega(gamma^1)
    int nu1_iterated_periodic(int k);                 // nu_1 of gamma on [0, 2k]
    const Mat& gamma2();
    double junction_mismatch(int k);

private:
    CoefficientPath b_;
    RelativeIndexPolicy policy_;
    WindingOptions winding_;
    std::unique_ptr<SymplecticPath> base_;
    std::unique_ptr<Mat> gamma2_;
    std::map<int, IndexPair> l0_;
    std::map<int, double> mismatch_;
    std::map<double, IndexPair> omega_;
    std::map<double, IndexPair> l0_omega_;
    std::vector<Mat> segments_;                       // gamma over [2j, 2j + 2], integrated separately
};

// theta of omega_k^{2i} = exp(2 pi i i / k)
double root_angle(int k, int i);

struct BottReport {
    int k = 0;
    int lhs_index = 0, rhs_index = 0;
    int lhs_nullity = 0, rhs_nullity = 0;
    bool index_equal = false, nullity_equal = false;
    nlohmann::json terms;
    bool ok() const { return index_equal && nullity_equal; }
};

void to_json(nlohmann::json& j, const BottReport& r);

BottReport bott_l0_check(IterationAnalysis& a, int k);

struct BottNullityReport {
    int k = 0;
    int lhs = 0;                   // nu_1 of gamma^2 iterated k times
    int rhs = 0;                   // sum over k-th roots of unity of nu_omega(gamma^2)
    std::vector<int> terms;
    bool equal = false;
};

void to_json(nlohmann::json& j, const BottNullityReport& r);

BottNullityReport bott_nullity_check(IterationAnalysis& a, int k);

struct EqualityVerdict {
    bool left_candidate = false;
    bool right_candidate = false;
    bool identity = false;
    bool ambiguous = false;
    int p = 0, q = 0, r = 0;       // multiplicities of I_2, N1(1,-1), N1(1,1) blocks
    std::string verdict;           // "identity", "left", "right", "generic", "ambiguous"
};

void to_json(nlohmann::json& j, const EqualityVerdict& v);

// Necessary-condition check of the equality patterns for M = gamma^2(2); k > 0 also checks
// that the non-real eigenvalues sit on the arc between 1 and exp(+-2 pi i / k).
EqualityVerdict equality_case_classify(const Mat& m, int k = 0);

struct InequalityReport {
    int k = 0;
    int lhs = 0, mid = 0, rhs2 = 0; // rhs doubled, since it carries halves
    bool holds = false;
    bool left_equal = false, right_equal = false;
    bool omega_bounds_hold = true; // the per-omega bound at every omega used
    nlohmann::json components;
    EqualityVerdict verdict;
};

void to_json(nlohmann::json& j, const InequalityReport& r);

InequalityReport iteration_inequality_check(IterationAnalysis& a, int k);

} // namespace maslov
