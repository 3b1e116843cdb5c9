#pragma once

#include "maslov/iteration.hpp"

namespace maslov {

struct PositivityReport {
    IndexPair value;      // i_L0 for the S22 check, i_1 for the semi-positive check
    int bound = 0;
    double margin = 0.0;  // precondition margin: min eigenvalue of the integral of the block
    bool holds = false;
};

void to_json(nlohmann::json& j, const PositivityReport& r);

// Smallest eigenvalue of the integral over [0, 1] of B, or of its lower-right block.
double integral_min_eigenvalue(const CoefficientPath& b, bool s22_only);
// Smallest eigenvalue of B(t) (or its lower-right block) over a sample grid of [0, 1].
double sampled_min_eigenvalue(const CoefficientPath& b, bool s22_only, int samples = 257);

// i_L0 >= 0 for a path on [0, 1] whose lower-right block is positive (or semi-positive with
// positive integral). Also asserts the two engines agree.
PositivityReport l0_positivity_check(const CoefficientPath& b, const RelativeIndexPolicy& policy = {});
// i_1 >= n for B >= 0 with positive integral
PositivityReport periodic_positivity_check(const CoefficientPath& b, const RelativeIndexPolicy& policy = {});

struct MonotonicityReport {
    IndexPair larger, smaller;
    bool holds = false;   // i_1(B1) >= i_1(B2) + nu_1(B2)
};

void to_json(nlohmann::json& j, const MonotonicityReport& r);

MonotonicityReport monotonicity_check(const CoefficientPath& b1, const CoefficientPath& b2,
                                      const RelativeIndexPolicy& policy = {});

struct ScanJump {
    double left = 0.0, right = 0.0;   // grid cell containing the jump
    int index_left = 0, index_right = 0;
    std::vector<std::pair<double, int>> crossings;  // in the cell, with intersection dimension
    int index_at = 0, nullity_at = 0;               // at the crossing
    bool bounds_hold = false;
};

struct ScanReport {
    int l0_index = 0;
    int n = 0;
    std::vector<ScanPoint> points;
    std::vector<ScanJump> jumps;
    bool sandwich_holds = true;   // i_L0 <= i^{L0}_omega <= i_L0 + n at every grid point
    bool jumps_hold = true;       // each jump has a crossing with positive nullity and bounded size
    bool ok() const { return sandwich_holds && jumps_hold; }
};

void to_json(nlohmann::json& j, const ScanJump& s);
void to_json(nlohmann::json& j, const ScanReport& r);

// theta -> i^{L0}_omega on a uniform grid in (0, pi) for the path on [0, 1].
ScanReport scan_structure_check(const CoefficientPath& b, int grid_points, const RelativeIndexPolicy& policy = {});

struct SplittingRow {
    std::string item;              // "1" .. "5", "8"
    std::string form;              // normal form of the endpoint
    double theta = 0.0;
    int expected_plus = 0, expected_minus = 0;
    SplittingNumbers computed;
    double endpoint_error = 0.0;   // |gamma(1) - normal form|, 0 when no closed form is compared
    bool match = false;
};

void to_json(nlohmann::json& j, const SplittingRow& r);

// Splitting numbers of constant-rate paths ending at the basic normal forms.
std::vector<SplittingRow> splitting_table(const std::vector<double>& eps_ladder = {1e-2, 1e-3, 1e-4},
                                          const RelativeIndexPolicy& policy = {});

} // namespace maslov
