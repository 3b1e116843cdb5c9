#include "maslov/checks.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>

namespace maslov {

namespace {

Mat block_of(const Mat& m, int n, bool s22_only)
{
    return s22_only ? Mat(m.bottomRightCorner(n, n)) : m;
}

} // namespace

double integral_min_eigenvalue(const CoefficientPath& b, bool s22_only)
{
    using GL = boost::math::quadrature::gauss<double, 20>;
    const int n = b.n(), panels = 16;
    const int d = s22_only ? n : 2 * n;
    Mat acc = Mat::Zero(d, d);
    const auto& x = GL::abscissa();
    const auto& w = GL::weights();
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) / panels, half = 0.5 / panels;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double wi = (i == 0 && x[0] == 0.0) ? w[0] : w[i];
            acc += half * wi * block_of(b(mid + half * x[i]), n, s22_only);
            if (x[i] != 0.0) acc += half * wi * block_of(b(mid - half * x[i]), n, s22_only);
        }
    }
    return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (acc + acc.transpose())).eigenvalues().minCoeff();
}

double sampled_min_eigenvalue(const CoefficientPath& b, bool s22_only, int samples)
{
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        const Mat m = block_of(b(static_cast<double>(i) / (samples - 1)), b.n(), s22_only);
        lo = std::min(lo, Eigen::SelfAdjointEigenSolver<Mat>(m).eigenvalues().minCoeff());
    }
    return lo;
}

void to_json(nlohmann::json& j, const PositivityReport& r)
{
    j = {{"index", r.value.index}, {"nullity", r.value.nullity}, {"bound", r.bound}, {"margin", r.margin}, {"holds", r.holds}};
}

PositivityReport l0_positivity_check(const CoefficientPath& b, const RelativeIndexPolicy& policy)
{
    PositivityReport r;
    if (sampled_min_eigenvalue(b, true) < -1e-12) throw InputError("l0_positivity_check: lower-right block not semi-positive");
    r.margin = integral_min_eigenvalue(b, true);
    if (r.margin <= 1e-8) throw InputError("l0_positivity_check: integral of the lower-right block not positive");
    r.value = l0_index_of(b, 1.0, {}, policy.integ);
    const IndexPair g = index_l0_galerkin(b, 1.0, policy);
    if (g.index != r.value.index) throw TheoryViolation("l0_positivity_check: winding and Galerkin disagree");
    r.holds = r.value.index >= r.bound;
    return r;
}

PositivityReport periodic_positivity_check(const CoefficientPath& b, const RelativeIndexPolicy& policy)
{
    PositivityReport r;
    if (sampled_min_eigenvalue(b, false) < -1e-12) throw InputError("periodic_positivity_check: B not semi-positive");
    r.margin = integral_min_eigenvalue(b, false);
    if (r.margin <= 1e-8) throw InputError("periodic_positivity_check: integral of B not positive");
    r.value = index_omega(b, 1.0, 0.0, policy);
    r.bound = b.n();
    r.holds = r.value.index >= r.bound;
    return r;
}

void to_json(nlohmann::json& j, const MonotonicityReport& r)
{
    j = {{"i1_larger", r.larger.index},
         {"i1_smaller", r.smaller.index},
         {"nu1_smaller", r.smaller.nullity},
         {"holds", r.holds}};
}

MonotonicityReport monotonicity_check(const CoefficientPath& b1, const CoefficientPath& b2,
                                      const RelativeIndexPolicy& policy)
{
    if (b1.n() != b2.n()) throw InputError("monotonicity_check: dimension mismatch");
    MonotonicityReport r;
    const CoefficientPath diff(b1.n(), [b1, b2](double t) { return Mat(b1(t) - b2(t)); });
    if (sampled_min_eigenvalue(diff, false) < -1e-12 || integral_min_eigenvalue(diff, false) <= 1e-8)
        throw InputError("monotonicity_check: B1 - B2 must be semi-positive with positive integral");
    r.larger = index_omega(b1, 1.0, 0.0, policy);
    r.smaller = index_omega(b2, 1.0, 0.0, policy);
    r.holds = r.larger.index >= r.smaller.index + r.smaller.nullity;
    return r;
}

void to_json(nlohmann::json& j, const ScanJump& s)
{
    nlohmann::json c = nlohmann::json::array();
    for (auto [t, m] : s.crossings) c.push_back({{"theta", t}, {"dim", m}});
    j = {{"left", s.left},           {"right", s.right},       {"index_left", s.index_left},
         {"index_right", s.index_right}, {"crossings", c},     {"index_at", s.index_at},
         {"nullity_at", s.nullity_at},   {"bounds_hold", s.bounds_hold}};
}

void to_json(nlohmann::json& j, const ScanReport& r)
{
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : r.points) pts.push_back({{"theta", p.theta}, {"i", p.index}, {"nu", p.nullity}});
    j = {{"l0_index", r.l0_index},           {"n", r.n},          {"points", pts}, {"jumps", r.jumps},
         {"sandwich_holds", r.sandwich_holds}, {"jumps_hold", r.jumps_hold}};
}

ScanReport scan_structure_check(const CoefficientPath& b, int grid_points, const RelativeIndexPolicy& policy)
{
    if (grid_points < 2) throw InputError("scan_structure_check: need at least two grid points");
    ScanReport r;
    r.n = b.n();
    r.l0_index = index_l0_galerkin(b, 1.0, policy).index;
    std::vector<double> thetas;
    for (int i = 0; i < grid_points; ++i) thetas.push_back(pi * (i + 0.5) / grid_points);
    r.points = index_function_scan(b, 1.0, thetas, policy);
    for (const auto& p : r.points)
        if (p.index < r.l0_index || p.index > r.l0_index + r.n) r.sandwich_holds = false;

    const Mat mono = monodromy(b, 1.0, policy.integ);
    const auto crossings = l0_omega_crossings(mono);
    for (std::size_t i = 0; i + 1 < r.points.size(); ++i) {
        const auto& a = r.points[i];
        const auto& c = r.points[i + 1];
        if (a.index == c.index) continue;
        ScanJump jmp{a.theta, c.theta, a.index, c.index, {}, 0, 0, false};
        for (const auto& cr : crossings)
            if (cr.first > a.theta && cr.first < c.theta) jmp.crossings.push_back(cr);
        if (jmp.crossings.size() == 1) {
            const auto at = index_l0_omega(b, 1.0, jmp.crossings[0].first, policy);
            jmp.index_at = at.index;
            jmp.nullity_at = at.nullity;
            const int nu = at.nullity;
            jmp.bounds_hold = nu > 0 && std::abs(c.index - a.index) <= nu && std::abs(c.index - at.index) <= nu &&
                              std::abs(a.index - at.index) <= nu;
        } else if (jmp.crossings.size() > 1) {
            // several crossings in one cell: only the total is checkable
            int total = 0;
            for (auto [t, m] : jmp.crossings) total += m;
            jmp.nullity_at = total;
            jmp.bounds_hold = std::abs(c.index - a.index) <= total;
        }
        r.jumps_hold = r.jumps_hold && jmp.bounds_hold;
        r.jumps.push_back(jmp);
    }
    return r;
}

void to_json(nlohmann::json& j, const SplittingRow& r)
{
    j = {{"item", r.item},
         {"form", r.form},
         {"theta", r.theta},
         {"expected", {r.expected_plus, r.expected_minus}},
         {"computed", r.computed},
         {"endpoint_error", r.endpoint_error},
         {"match", r.match}};
}

namespace {

Mat diag2(double a, double b)
{
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

// B(t) = phi I + R(phi t) B0 R(phi t)^T, so gamma(1) = exp(phi J) exp(J B0)
CoefficientPath rotating_frame(double phi, const Mat& b0)
{
    return CoefficientPath(1, [phi, b0](double t) {
        const Mat r = exp_tj(1, phi * t);
        return Mat(phi * Mat::Identity(2, 2) + r * b0 * r.transpose());
    });
}

} // namespace

std::vector<SplittingRow> splitting_table(const std::vector<double>& eps_ladder, const RelativeIndexPolicy& policy)
{
    struct Case {
        std::string item, form;
        double theta;
        int plus, minus;
        CoefficientPath path;
        Mat endpoint;
    };
    std::vector<Case> cases;
    for (double b : {1.0, 0.0})
        cases.push_back({"1", "N1(1," + std::to_string(static_cast<int>(b)) + ")", 0.0, 1, 1,
                         CoefficientPath::constant(diag2(0.0, -b)), n1(1.0, b)});
    cases.push_back({"2", "N1(1,-1)", 0.0, 0, 0, CoefficientPath::constant(diag2(0.0, 1.0)), n1(1.0, -1.0)});
    for (double b : {-1.0, 0.0})
        cases.push_back({"3", "N1(-1," + std::to_string(static_cast<int>(b)) + ")", pi, 1, 1,
                         rotating_frame(pi, diag2(0.0, b)), n1(-1.0, b)});
    cases.push_back({"4", "N1(-1,1)", pi, 0, 0, rotating_frame(pi, diag2(0.0, 1.0)), n1(-1.0, 1.0)});
    for (double th : {0.7, 2.0, 4.0, 5.5})
        cases.push_back({"5", "R(" + std::to_string(th).substr(0, 3) + ")", th, 0, 1,
                         CoefficientPath::constant(th * Mat::Identity(2, 2)), rotation(th)});
    Mat hyp = Mat::Zero(2, 2);
    hyp(0, 1) = hyp(1, 0) = 0.8;
    for (double th : {0.0, 1.0, pi, 5.0})
        cases.push_back({"8", "hyperbolic", th, 0, 0, CoefficientPath::constant(hyp), Mat()});

    std::vector<SplittingRow> rows;
    for (const auto& c : cases) {
        SplittingRow r;
        r.item = c.item;
        r.form = c.form;
        r.theta = c.theta;
        r.expected_plus = c.plus;
        r.expected_minus = c.minus;
        if (c.endpoint.size() > 0)
            r.endpoint_error = (monodromy(c.path, 1.0, policy.integ) - c.endpoint).cwiseAbs().maxCoeff();
        r.computed = splitting_numbers(c.path, 1.0, c.theta, eps_ladder, policy);
        r.match = r.computed.plus == c.plus && r.computed.minus == c.minus && r.endpoint_error < 1e-8;
        rows.push_back(r);
    }
    return rows;
}

} // namespace maslov
