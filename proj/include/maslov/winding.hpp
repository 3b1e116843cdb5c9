#pragma once

#include "maslov/symplectic.hpp"

#include <string>

namespace maslov {

// An index together with its nullity and how it was obtained.
struct IndexPair {
    int index = 0;
    int nullity = 0;
    std::string flavor;          // "L0", "L0-omega", "omega"
    nlohmann::json provenance;
};

void to_json(nlohmann::json& j, const IndexPair& p);

enum class BetaBranch { polar, givens };

struct WindingOptions {
    double rank_tol = 1e-8;
    double max_phase_step = pi / 2;
    std::vector<double> epsilons{1e-3, 1e-4, 1e-5};
    BetaBranch branch = BetaBranch::polar;
    int refinements = 4;          // re-integration attempts on a phase jump
};

struct RotationTrace {
    std::vector<double> times;
    std::vector<double> delta;    // continuous arg det(U - iV)
    std::vector<double> rho;      // |det(U - iV)|
};

// Throws NumericalError when adjacent samples differ by max_step or more in phase.
RotationTrace rotation_trace(const SymplecticPath& path, double max_step = pi / 2);

struct NullityInfo {
    int nullity = 0;
    bool borderline = false;      // a singular value sits within 10x of the threshold
    double smallest_singular = 0.0;
};

NullityInfo l0_nullity(const Mat& m, double tol = 1e-8);

// Path in Sp*(2n) from m (which must have invertible V block) to M+ or M-.
SymplecticPath beta_path(const Mat& m, BetaBranch branch);

// exp(sJ) for s from pi/2 down to 0, then gamma, then beta.
SymplecticPath extend_and_join(const SymplecticPath& gamma, BetaBranch branch);

IndexPair l0_index_nondegenerate(const SymplecticPath& gamma, const WindingOptions& opt = {});
IndexPair l0_index(const SymplecticPath& gamma, const WindingOptions& opt = {});

// Integrates the fundamental solution of b on [0, length] and evaluates its L0 index,
// refining the time grid when the phase trace jumps.
IndexPair l0_index_of(const CoefficientPath& b, double length, const WindingOptions& opt = {},
                      IntegratorOptions integ = {});

} // namespace maslov
