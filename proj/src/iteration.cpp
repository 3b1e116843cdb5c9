#include "maslov/iteration.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace maslov {

namespace {

Mat symplectic_inverse(const Mat& m)
{
    const Mat j = standard_j(static_cast<int>(m.rows() / 2));
    return -j * m.transpose() * j;
}

// Kernel of M - omega for products with large norm: entry errors grow like u |M|, so the
// relative cut is much smaller than the absolute floor.
int nullity_of_power(const Mat& m, cplx omega)
{
    const Eigen::Index dim = m.rows();
    const CMat a = m.cast<cplx>() - omega * CMat::Identity(dim, dim);
    const Vec sv = Eigen::JacobiSVD<CMat>(a).singularValues();
    const double cut = std::max(1e-8, 1e-12 * sv(0));
    return static_cast<int>((sv.array() <= cut).count());
}

double rel_diff(const Mat& a, const Mat& b)
{
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff());
}

} // namespace

IteratedPath iterate_path(const SymplecticPath& base, int k, double tol)
{
    if (k < 1) throw InputError("iterate_path: k must be positive");
    if (base.size() < 2 || std::abs(base.start()) > 1e-14 || std::abs(base.end() - 1.0) > 1e-12)
        throw InputError("iterate_path: base must be sampled on [0, 1]");
    const std::size_t g = base.size() - 1;
    for (std::size_t i = 0; i <= g; ++i)
        if (std::abs(base.grid[i] - static_cast<double>(i) / g) > 1e-12)
            throw InputError("iterate_path: base grid must be uniform");

    const int n = base.n;
    const Mat nr = reflection_n(n);
    const Mat& g1 = base.endpoint();
    const Mat c = symplectic_inverse(g1) * nr * g1;   // gamma(1)^{-1} N gamma(1)
    const Mat m2 = nr * c;                             // gamma(2)

    IteratedPath out;
    out.base = base;
    out.k = k;
    out.full.n = n;
    Mat power = Mat::Identity(2 * n, 2 * n);          // gamma(2)^{j-1}
    for (int s = 0; s < k; ++s) {
        const bool reflected = s % 2 == 1;
        for (std::size_t i = 0; i <= g; ++i) {
            const Mat frame = reflected ? Mat(nr * base.frames[g - i] * c * power) : Mat(base.frames[i] * power);
            if (i == 0 && s > 0) {
                out.junction_mismatch = std::max(out.junction_mismatch, rel_diff(out.full.frames.back(), frame));
                continue;
            }
            out.full.grid.push_back(s + static_cast<double>(i) / g);
            out.full.frames.push_back(frame);
        }
        if (reflected) power = power * m2;
    }
    if (out.junction_mismatch > tol) {
        std::ostringstream os;
        os << "iterate_path: junction mismatch " << out.junction_mismatch;
        throw NumericalError(os.str());
    }
    return out;
}

void to_json(nlohmann::json& j, const SplittingNumbers& s)
{
    j = {{"theta", s.theta},        {"splus", s.plus},          {"sminus", s.minus},
         {"eps", s.eps},            {"nullity", s.nullity},     {"ladder_plus", s.ladder_plus},
         {"ladder_minus", s.ladder_minus}};
}

SplittingNumbers splitting_numbers(const CoefficientPath& b, double length, double theta,
                                   const std::vector<double>& eps_ladder, const RelativeIndexPolicy& policy)
{
    if (eps_ladder.size() < 2) throw InputError("splitting_numbers: need at least two ladder rungs");
    SplittingNumbers s;
    s.theta = theta;
    const IndexPair base = index_omega(b, length, theta, policy);
    s.nullity = base.nullity;
    for (double eps : eps_ladder) {
        // a Jordan block at theta leaves a gap of order eps^2 at theta +- eps
        RelativeIndexPolicy side = policy;
        side.kernel_tol = std::min(policy.kernel_tol, 1e-2 * eps * eps);
        s.ladder_plus.push_back(index_omega(b, length, theta + eps, side).index - base.index);
        s.ladder_minus.push_back(index_omega(b, length, theta - eps, side).index - base.index);
    }
    const std::size_t k = eps_ladder.size();
    if (s.ladder_plus[k - 1] != s.ladder_plus[k - 2] || s.ladder_minus[k - 1] != s.ladder_minus[k - 2])
        throw NumericalError("splitting_numbers: one-sided jumps did not stabilize");
    s.plus = s.ladder_plus.back();
    s.minus = s.ladder_minus.back();
    s.eps = eps_ladder.back();
    if (s.plus < 0 || s.minus < 0 || s.plus > s.nullity || s.minus > s.nullity)
        throw TheoryViolation("splitting_numbers: jumps outside [0, nullity]");
    return s;
}

IterationAnalysis::IterationAnalysis(CoefficientPath b, RelativeIndexPolicy policy, WindingOptions winding)
    : b_(std::move(b)), policy_(policy), winding_(winding)
{
    if (!b_.brake_symmetric() && !check_brake_symmetry(b_).ok(1e-10))
        throw InputError("IterationAnalysis: coefficient path is not brake symmetric");
    double bmax = 0.0;
    for (int i = 0; i <= 64; ++i) bmax = std::max(bmax, b_(i / 32.0).norm());
    policy_.integ.steps_per_unit =
        std::max(policy_.integ.steps_per_unit, static_cast<int>(std::ceil(8.0 * b_.n() * bmax)));
}

const SymplecticPath& IterationAnalysis::base()
{
    if (!base_) base_ = std::make_unique<SymplecticPath>(integrate_fundamental(b_, 1.0, policy_.integ));
    return *base_;
}

const Mat& IterationAnalysis::gamma2()
{
    if (!gamma2_) gamma2_ = std::make_unique<Mat>(monodromy(b_, 2.0, policy_.integ));
    return *gamma2_;
}

double IterationAnalysis::junction_mismatch(int k)
{
    l0_iterated(k);
    return mismatch_.at(k);
}

const IndexPair& IterationAnalysis::l0_iterated(int k)
{
    auto it = l0_.find(k);
    if (it != l0_.end()) return it->second;
    const IteratedPath ip = iterate_path(base(), k);
    mismatch_[k] = ip.junction_mismatch;
    // long products: same rank cut as nullity_of_power, max(1e-8, 1e-12 |M|)
    WindingOptions opt = winding_;
    const double mnorm = std::max(1.0, ip.full.endpoint().cwiseAbs().maxCoeff());
    opt.rank_tol = std::min(opt.rank_tol, std::max(1e-12, 1e-8 / mnorm));
    IndexPair p = l0_index(ip.full, opt);
    p.provenance["k"] = k;
    return l0_.emplace(k, std::move(p)).first->second;
}

const IndexPair& IterationAnalysis::omega_gamma2(double theta)
{
    auto it = omega_.find(theta);
    if (it != omega_.end()) return it->second;
    return omega_.emplace(theta, index_omega(b_, 2.0, theta, policy_)).first->second;
}

const IndexPair& IterationAnalysis::l0_omega_gamma1(double theta)
{
    auto it = l0_omega_.find(theta);
    if (it != l0_omega_.end()) return it->second;
    return l0_omega_.emplace(theta, index_l0_omega(b_, 1.0, theta, policy_)).first->second;
}

// dim ker(M_{k-1} ... M_0 - I) as the kernel of the block-cyclic system x_{j+1} = M_j x_j, x_k = x_0,
// which never forms the product
int IterationAnalysis::nu1_iterated_periodic(int k)
{
    if (k < 1) throw InputError("nu1_iterated_periodic: k must be positive");
    while (static_cast<int>(segments_.size()) < k) {
        const double t0 = 2.0 * static_cast<double>(segments_.size());
        segments_.push_back(integrate_fundamental(b_, 2.0, policy_.integ, t0).endpoint());
    }
    const Eigen::Index d = 2 * n();
    Mat z = Mat::Zero(d * k, d * k);
    for (int j = 0; j < k; ++j) {
        z.block(d * j, d * j, d, d) -= segments_[j];
        z.block(d * j, d * ((j + 1) % k), d, d) += Mat::Identity(d, d);
    }
    const Vec sv = Eigen::JacobiSVD<Mat>(z).singularValues();
    const double cut = std::max(1e-8, 1e-12 * sv(0));
    return static_cast<int>((sv.array() <= cut).count());
}

double root_angle(int k, int i)
{
    const int g = std::gcd(i, k);
    return 2.0 * pi * (i / g) / (k / g);
}

void to_json(nlohmann::json& j, const BottReport& r)
{
    j = {{"k", r.k},
         {"lhs_index", r.lhs_index},
         {"rhs_index", r.rhs_index},
         {"lhs_nullity", r.lhs_nullity},
         {"rhs_nullity", r.rhs_nullity},
         {"index_equal", r.index_equal},
         {"nullity_equal", r.nullity_equal},
         {"terms", r.terms}};
}

BottReport bott_l0_check(IterationAnalysis& a, int k)
{
    if (k < 1) throw InputError("bott_l0_check: k must be positive");
    BottReport r;
    r.k = k;
    const IndexPair& lhs = a.l0_iterated(k);
    const IndexPair& one = a.l0_iterated(1);
    r.lhs_index = lhs.index;
    r.lhs_nullity = lhs.nullity;
    r.rhs_index = one.index;
    r.rhs_nullity = one.nullity;
    r.terms = {{"i_L0_gamma1", one.index}, {"nu_L0_gamma1", one.nullity}, {"omega", nlohmann::json::array()}};
    const int last = k % 2 == 1 ? k / 2 : k / 2 - 1;
    for (int i = 1; i <= last; ++i) {
        const double th = root_angle(k, i);
        const IndexPair& w = a.omega_gamma2(th);
        r.rhs_index += w.index;
        r.rhs_nullity += w.nullity;
        r.terms["omega"].push_back({{"i", i}, {"theta", th}, {"index", w.index}, {"nullity", w.nullity}});
    }
    if (k % 2 == 0) {
        const IndexPair& l = a.l0_omega_gamma1(pi / 2);
        r.rhs_index += l.index;
        r.rhs_nullity += l.nullity;
        r.terms["i_L0_sqrt_minus_one"] = l.index;
        r.terms["nu_L0_sqrt_minus_one"] = l.nullity;
    }
    r.index_equal = r.lhs_index == r.rhs_index;
    r.nullity_equal = r.lhs_nullity == r.rhs_nullity;
    return r;
}

void to_json(nlohmann::json& j, const BottNullityReport& r)
{
    j = {{"k", r.k}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"terms", r.terms}, {"equal", r.equal}};
}

BottNullityReport bott_nullity_check(IterationAnalysis& a, int k)
{
    BottNullityReport r;
    r.k = k;
    r.lhs = a.nu1_iterated_periodic(k);
    const Mat& m = a.gamma2();
    for (int i = 0; i < k; ++i) {
        const int nu = nullity_of_power(m, std::polar(1.0, root_angle(k, i)));
        r.terms.push_back(nu);
        r.rhs += nu;
    }
    r.equal = r.lhs == r.rhs;
    return r;
}

void to_json(nlohmann::json& j, const EqualityVerdict& v)
{
    j = {{"verdict", v.verdict},
         {"left_candidate", v.left_candidate},
         {"right_candidate", v.right_candidate},
         {"identity", v.identity},
         {"ambiguous", v.ambiguous},
         {"p", v.p},
         {"q", v.q},
         {"r", v.r}};
}

EqualityVerdict equality_case_classify(const Mat& m, int k)
{
    require_symplectic(m, 1e-8, "equality_case_classify");
    const int n = static_cast<int>(m.rows() / 2);
    const Eigen::Index dim = m.rows();
    EqualityVerdict v;
    const SpectralInvariant sp = unit_spectrum(m);
    if (sp.ambiguous) {
        v.ambiguous = true;
        v.verdict = "ambiguous";
        return v;
    }
    if ((m - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff() <= 1e-8) {
        v.identity = v.left_candidate = v.right_candidate = true;
        v.p = n;
        v.verdict = "identity";
        return v;
    }

    int alg1 = 0, geo1 = 0;
    bool others_nonreal = sp.off_circle.empty();
    bool upper_negative = true, on_arc = true;
    for (const auto& u : sp.unit) {
        if (u.lambda == cplx(1.0, 0.0)) {
            alg1 = u.algebraic;
            geo1 = u.geometric;
        } else if (u.lambda.imag() == 0.0) {
            others_nonreal = false;
        } else if (u.lambda.imag() > 0) {
            upper_negative = upper_negative && u.krein_p == 0;
            if (k > 0 && std::arg(u.lambda) > 2 * pi / k + 1e-9) on_arc = false;
        }
    }

    // Jordan structure at 1: chains of length <= 2 and the sign of q(x) = <Jx, (M - I)x>
    int pos = 0, neg = 0;
    bool short_chains = true;
    if (alg1 > 0) {
        const Mat a = m - Mat::Identity(dim, dim);
        Eigen::JacobiSVD<Mat> s2(a * a, Eigen::ComputeFullV);
        Eigen::JacobiSVD<Mat> s1(a, Eigen::ComputeFullV);
        const Vec& sv2 = s2.singularValues();
        const double cut = 1e-6 * std::max(1.0, sv2(0));
        int ker2 = 0;
        for (Eigen::Index i = 0; i < sv2.size(); ++i)
            if (sv2(i) <= cut) ++ker2;
        short_chains = ker2 == alg1;
        const Mat k2 = s2.matrixV().rightCols(alg1);
        const Mat k1 = s1.matrixV().rightCols(geo1);
        Mat x = k2 - k1 * (k1.transpose() * k2);
        const int chains = alg1 - geo1;
        if (chains > 0) {
            Eigen::JacobiSVD<Mat> sx(x, Eigen::ComputeThinU);
            const Mat basis = sx.matrixU().leftCols(chains);
            const Mat j = standard_j(n);
            Mat g = -(basis.transpose() * j * a * basis);
            g = 0.5 * (g + g.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<Mat> es(g);
            const double sc = std::max(1e-300, es.eigenvalues().cwiseAbs().maxCoeff());
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
                if (es.eigenvalues()(i) > 1e-8 * sc) ++pos;
                else if (es.eigenvalues()(i) < -1e-8 * sc) ++neg;
            }
            if (pos + neg != chains) v.ambiguous = true;
        }
    }
    v.q = pos;
    v.r = neg;
    const int twice_p = geo1 - (pos + neg);
    v.p = twice_p / 2;
    const bool p_ok = twice_p >= 0 && twice_p % 2 == 0;

    v.right_candidate = p_ok && short_chains && alg1 == 2 * n && pos == 0 && v.p + v.r == n;
    v.left_candidate = p_ok && short_chains && neg == 0 && others_nonreal && upper_negative && on_arc;
    if (v.ambiguous) v.verdict = "ambiguous";
    else if (v.left_candidate && v.right_candidate) v.verdict = "left+right";
    else if (v.left_candidate) v.verdict = "left";
    else if (v.right_candidate) v.verdict = "right";
    else v.verdict = "generic";
    return v;
}

void to_json(nlohmann::json& j, const InequalityReport& r)
{
    j = {{"k", r.k},
         {"lhs", r.lhs},
         {"mid", r.mid},
         {"rhs", 0.5 * r.rhs2},
         {"holds", r.holds},
         {"left_equal", r.left_equal},
         {"right_equal", r.right_equal},
         {"omega_bounds_hold", r.omega_bounds_hold},
         {"components", r.components},
         {"classifier", r.verdict}};
}

InequalityReport iteration_inequality_check(IterationAnalysis& a, int k)
{
    if (k < 2) throw InputError("iteration_inequality_check: k must be at least 2");
    const int n = a.n();
    InequalityReport r;
    r.k = k;
    const int il0 = a.l0_iterated(1).index;
    const IndexPair& one = a.omega_gamma2(0.0);
    const int i1 = one.index;
    const int nu1 = one.nullity;
    const int nu1_2k = a.nu1_iterated_periodic(k);
    const int nu_m1 = nullity_of_power(a.gamma2(), -1.0);
    r.mid = a.l0_iterated(k).index;
    r.components = {{"i_L0_gamma1", il0},     {"i_1_gamma2", i1},   {"nu_1_gamma2", nu1},
                    {"nu_1_gamma2k", nu1_2k}, {"nu_m1_gamma2", nu_m1}};

    int base = il0;
    int half;
    int extra_nu = 0;
    if (k % 2 == 1) {
        half = k / 2;
    } else {
        const IndexPair& l = a.l0_omega_gamma1(pi / 2);
        base += l.index;
        half = k / 2 - 1;
        extra_nu = nu_m1;
        r.components["i_L0_sqrt_minus_one"] = l.index;
        r.components["nu_L0_sqrt_minus_one"] = l.nullity;
    }
    r.lhs = base + half * (i1 + nu1 - n);
    r.rhs2 = 2 * base + 2 * half * (i1 + n) - nu1_2k + nu1 + extra_nu;
    r.holds = r.lhs <= r.mid && 2 * r.mid <= r.rhs2;
    r.left_equal = r.lhs == r.mid;
    r.right_equal = 2 * r.mid == r.rhs2;

    // per-omega bounds at every root used by the sum
    nlohmann::json omegas = nlohmann::json::array();
    for (int i = 1; i <= half; ++i) {
        const IndexPair& w = a.omega_gamma2(root_angle(k, i));
        const bool ok = i1 + nu1 - n <= w.index && w.index <= i1 + n - w.nullity;
        r.omega_bounds_hold = r.omega_bounds_hold && ok;
        omegas.push_back({{"theta", root_angle(k, i)}, {"index", w.index}, {"nullity", w.nullity}, {"bound_ok", ok}});
    }
    r.components["omega"] = omegas;
    r.verdict = equality_case_classify(a.gamma2(), k);
    return r;
}

} // namespace maslov
