#include "maslov/brake.hpp"
#include "maslov/corpus.hpp"
#include "maslov/parallel.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <sstream>

namespace maslov {

const char* problem_kind_name(ProblemKind k)
{
    switch (k) {
    case ProblemKind::first_order: return "first-order";
    case ProblemKind::second_order_odd: return "second-order-odd";
    case ProblemKind::second_order_neumann: return "second-order-neumann";
    }
    return "?";
}

ProblemKind parse_problem_kind(const std::string& s)
{
    if (s == "first-order") return ProblemKind::first_order;
    if (s == "second-order-odd" || s == "odd-dirichlet") return ProblemKind::second_order_odd;
    if (s == "second-order-neumann" || s == "neumann") return ProblemKind::second_order_neumann;
    throw InputError("unknown problem kind: " + s);
}

// ---------------------------------------------------------------- potential

Potential::Potential(std::vector<PolyTerm> terms) : terms_(std::move(terms))
{
    for (auto& t : terms_) {
        if (t.w.rows() != t.w.cols() || t.w.rows() == 0) throw InputError("potential: W must be square");
        if (t.p < 1) throw InputError("potential: exponent must be a positive integer");
        if (dim_ == 0) dim_ = static_cast<int>(t.w.rows());
        if (t.w.rows() != dim_) throw InputError("potential: inconsistent term sizes");
        t.w = 0.5 * (t.w + t.w.transpose()).eval();
    }
}

double Potential::value(const Vec& z) const
{
    double v = 0.0;
    for (const auto& t : terms_) v += t.c * std::pow(z.dot(t.w * z), t.p);
    return v;
}

Vec Potential::gradient(const Vec& z) const
{
    Vec g = Vec::Zero(z.size());
    for (const auto& t : terms_) {
        const Vec wz = t.w * z;
        g += t.c * t.p * std::pow(z.dot(wz), t.p - 1) * 2.0 * wz;
    }
    return g;
}

Mat Potential::hessian(const Vec& z) const
{
    Mat h = Mat::Zero(z.size(), z.size());
    for (const auto& t : terms_) {
        const Vec wz = t.w * z;
        const double q = z.dot(wz);
        h += t.c * t.p * 2.0 * std::pow(q, t.p - 1) * t.w;
        if (t.p >= 2) h += t.c * t.p * (t.p - 1) * std::pow(q, t.p - 2) * 4.0 * wz * wz.transpose();
    }
    return h;
}

// ---------------------------------------------------------------- truncation

namespace {

// g(u) = exp(-1/u) for u > 0 and its derivatives
std::array<double, 3> bump(double u)
{
    if (u < 1e-3) return {0.0, 0.0, 0.0};
    const double g = std::exp(-1.0 / u);
    return {g, g / (u * u), g * (1.0 - 2.0 * u) / (u * u * u * u)};
}

} // namespace

std::array<double, 3> cutoff(double s, double k)
{
    if (s <= k) return {1.0, 0.0, 0.0};
    if (s >= k + 1.0) return {0.0, 0.0, 0.0};
    const auto ga = bump(k + 1.0 - s), gb = bump(s - k);
    const double a = ga[0], a1 = -ga[1], a2 = ga[2];
    const double b = gb[0], b1 = gb[1], b2 = gb[2];
    const double sum = a + b, sum1 = a1 + b1;
    const double num = a1 * b - a * b1, num1 = a2 * b - a * b2;
    return {a / sum, num / (sum * sum), (num1 * sum - 2.0 * num * sum1) / (sum * sum * sum)};
}

double HamiltonianSpec::nonlinear(const Vec& z) const
{
    const double hz = h.value(z);
    if (!truncation) return hz;
    const double rho = z.norm();
    const auto c = cutoff(rho, truncation->k);
    if (c[0] == 1.0 && c[1] == 0.0) return hz;
    return c[0] * hz + (1.0 - c[0]) * truncation->r_k * std::pow(rho, 4);
}

Vec HamiltonianSpec::nonlinear_gradient(const Vec& z) const
{
    const Vec gh = h.gradient(z);
    if (!truncation) return gh;
    const double rho = z.norm();
    const auto c = cutoff(rho, truncation->k);
    if (c[0] == 1.0 && c[1] == 0.0) return gh;
    const double r = truncation->r_k;
    const double diff = h.value(z) - r * std::pow(rho, 4);
    const Vec gq = 4.0 * r * rho * rho * z;
    return c[1] * diff / rho * z + c[0] * gh + (1.0 - c[0]) * gq;
}

Mat HamiltonianSpec::nonlinear_hessian(const Vec& z) const
{
    const Mat hh = h.hessian(z);
    if (!truncation) return hh;
    const double rho = z.norm();
    const auto c = cutoff(rho, truncation->k);
    if (c[0] == 1.0 && c[1] == 0.0) return hh;
    const double r = truncation->r_k;
    const Eigen::Index d = z.size();
    const Mat id = Mat::Identity(d, d);
    const double diff = h.value(z) - r * std::pow(rho, 4);
    const Vec gdiff = h.gradient(z) - 4.0 * r * rho * rho * z;
    const Mat hq = r * (4.0 * rho * rho * id + 8.0 * z * z.transpose());
    const Mat zz = z * z.transpose();
    const Mat hchi = c[2] * zz / (rho * rho) + c[1] * (id / rho - zz / (rho * rho * rho));
    const Vec gchi = c[1] / rho * z;
    return hchi * diff + gchi * gdiff.transpose() + gdiff * gchi.transpose() + c[0] * hh + (1.0 - c[0]) * hq;
}

double HamiltonianSpec::energy(const Vec& z) const { return 0.5 * z.dot(b * z) + nonlinear(z); }

Vec HamiltonianSpec::field(const Vec& z) const
{
    const Vec g = b * z + nonlinear_gradient(z);
    Vec out(2 * n);
    out.head(n) = -g.tail(n);
    out.tail(n) = g.head(n);
    return out;
}

Mat HamiltonianSpec::field_jacobian(const Vec& z) const
{
    const Mat s = b + nonlinear_hessian(z);
    Mat out(2 * n, 2 * n);
    out.topRows(n) = -s.bottomRows(n);
    out.bottomRows(n) = s.topRows(n);
    return out;
}

namespace {

nlohmann::json mat_json(const Mat& m)
{
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json r = nlohmann::json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
        rows.push_back(r);
    }
    return rows;
}

nlohmann::json vec_json(const Vec& v)
{
    nlohmann::json r = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) r.push_back(v(i));
    return r;
}

bool is_second_order(ProblemKind k) { return k != ProblemKind::first_order; }

} // namespace

void to_json(nlohmann::json& j, const HamiltonianSpec& h)
{
    j = {{"name", h.name}, {"n", h.n}, {"kind", problem_kind_name(h.kind)}, {"b", mat_json(h.b)},
         {"mu", h.mu},     {"r0", h.r0}};
    j["terms"] = nlohmann::json::array();
    for (const auto& t : h.h.terms()) j["terms"].push_back({{"c", t.c}, {"p", t.p}, {"w", mat_json(t.w)}});
    if (h.truncation) j["truncation"] = {{"K", h.truncation->k}, {"R_K", h.truncation->r_k}};
}

HamiltonianSpec first_order_hamiltonian(const std::string& name, const Mat& b, std::vector<PolyTerm> terms, double mu,
                                        double r0)
{
    HamiltonianSpec h;
    h.name = name;
    if (b.rows() != b.cols() || b.rows() % 2 != 0 || b.rows() == 0) throw InputError("hamiltonian: B must be 2n x 2n");
    h.n = static_cast<int>(b.rows() / 2);
    h.b = b;
    h.h = Potential(std::move(terms));
    if (h.h.dim() != 0 && h.h.dim() != b.rows()) throw InputError("hamiltonian: term size does not match B");
    h.mu = mu;
    h.r0 = r0;
    return h;
}

HamiltonianSpec second_order_hamiltonian(const std::string& name, int n, std::vector<PolyTerm> v_terms,
                                         ProblemKind kind, double mu, double r0)
{
    if (!is_second_order(kind)) throw InputError("second_order_hamiltonian: kind must be second order");
    const bool odd = kind == ProblemKind::second_order_odd;
    for (auto& t : v_terms) {
        if (t.w.rows() != n || t.w.cols() != n) throw InputError("second_order_hamiltonian: W must be n x n");
        Mat w = Mat::Zero(2 * n, 2 * n);
        if (odd) w.topLeftCorner(n, n) = t.w;
        else w.bottomRightCorner(n, n) = t.w;
        t.w = w;
    }
    Mat b = Mat::Zero(2 * n, 2 * n);
    if (odd) b.bottomRightCorner(n, n) = Mat::Identity(n, n);
    else b.topLeftCorner(n, n) = Mat::Identity(n, n);
    HamiltonianSpec h = first_order_hamiltonian(name, b, std::move(v_terms), mu, r0);
    h.kind = kind;
    return h;
}

std::vector<std::string> builtin_hamiltonian_names()
{
    return {"quartic-first-order", "quartic-plus-B", "second-order-x4", "second-order-even-poly"};
}

HamiltonianSpec builtin_hamiltonian(const std::string& name, ProblemKind second_order_kind)
{
    if (name == "quartic-first-order")
        return first_order_hamiltonian(name, Mat::Zero(2, 2), {{1.0, Mat::Identity(2, 2), 2}}, 4.0, 1.0);
    if (name == "quartic-plus-B") {
        Mat b = Mat::Zero(2, 2);
        b(0, 0) = 1.0;
        return first_order_hamiltonian(name, b, {{1.0, Mat::Identity(2, 2), 2}}, 4.0, 1.0);
    }
    if (name == "second-order-x4")
        return second_order_hamiltonian(name, 1, {{1.0, Mat::Identity(1, 1), 2}}, second_order_kind, 4.0, 1.0);
    if (name == "second-order-even-poly") {
        Mat w = Mat::Identity(2, 2);
        w(1, 1) = 2.0;
        return second_order_hamiltonian(name, 2, {{1.0, Mat::Identity(2, 2), 2}, {0.5, w, 3}}, second_order_kind, 4.0,
                                        1.0);
    }
    throw InputError("unknown builtin hamiltonian: " + name);
}

// ---------------------------------------------------------------- hypotheses

bool HypothesisReport::ok() const
{
    return symmetry_defect <= 1e-10 && b_block_diagonal && b_semi_positive && superquadratic && small_at_zero &&
           nonnegative && convex;
}

void to_json(nlohmann::json& j, const HypothesisReport& r)
{
    j = {{"symmetry_defect", r.symmetry_defect}, {"b_block_diagonal", r.b_block_diagonal},
         {"b_semi_positive", r.b_semi_positive}, {"b_norm", r.b_norm},
         {"superquadratic", r.superquadratic},   {"small_at_zero", r.small_at_zero},
         {"nonnegative", r.nonnegative},         {"convex", r.convex},
         {"ok", r.ok()}};
}

namespace {

// random point of the configuration space at radius r, embedded in R^{2n}
Vec sample_point(SampleStream& rs, const HamiltonianSpec& h, double r)
{
    const int n = h.n;
    if (!is_second_order(h.kind)) {
        Vec z(2 * n);
        for (int i = 0; i < 2 * n; ++i) z(i) = rs.normal();
        return z * (r / z.norm());
    }
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = rs.normal();
    x *= r / x.norm();
    Vec z = Vec::Zero(2 * n);
    if (h.kind == ProblemKind::second_order_odd) z.head(n) = x;
    else z.tail(n) = x;
    return z;
}

} // namespace

HypothesisReport check_hypotheses(const HamiltonianSpec& h, std::uint64_t seed, int samples)
{
    HypothesisReport r;
    const int n = h.n;
    const Mat nr = reflection_n(n);
    r.b_block_diagonal = h.b.topRightCorner(n, n).cwiseAbs().maxCoeff() == 0.0 &&
                         h.b.bottomLeftCorner(n, n).cwiseAbs().maxCoeff() == 0.0 &&
                         (h.b - h.b.transpose()).cwiseAbs().maxCoeff() == 0.0;
    const Eigen::SelfAdjointEigenSolver<Mat> es(h.b);
    r.b_semi_positive = es.eigenvalues().minCoeff() >= -1e-14;
    r.b_norm = es.eigenvalues().cwiseAbs().maxCoeff();

    SampleStream rs(seed, 0);
    r.superquadratic = r.small_at_zero = r.nonnegative = true;
    r.convex = true;
    for (int i = 0; i < samples; ++i) {
        Vec z(2 * n);
        for (int k = 0; k < 2 * n; ++k) z(k) = 2.0 * h.r0 * rs.normal();
        const double hz = h.nonlinear(z);
        r.symmetry_defect = std::max(r.symmetry_defect, std::abs(h.nonlinear(nr * z) - hz) / std::max(1.0, std::abs(hz)));
        if (hz < 0.0) r.nonnegative = false;

        const Vec far = sample_point(rs, h, h.r0 * (1.0 + 4.0 * rs.uniform()));
        const double hf = h.nonlinear(far);
        if (!(hf > 0.0) || h.mu * hf > h.nonlinear_gradient(far).dot(far) * (1.0 + 1e-12)) r.superquadratic = false;

        const Vec near = sample_point(rs, h, 1e-4);
        if (std::abs(h.nonlinear(near)) > 1e-3 * near.squaredNorm()) r.small_at_zero = false;

        // convexity off the origin; required for the second-order kinds only
        if (is_second_order(h.kind)) {
            const Vec p = sample_point(rs, h, 3.0 * h.r0 * (0.01 + rs.uniform()));
            const int off = h.kind == ProblemKind::second_order_odd ? 0 : n;
            const Mat v2 = h.nonlinear_hessian(p).block(off, off, n, n);
            if (Eigen::SelfAdjointEigenSolver<Mat>(v2).eigenvalues().minCoeff() <= 0.0) r.convex = false;
        }
    }
    if (h.mu <= 2.0) r.superquadratic = false;
    return r;
}

HamiltonianSpec truncate_hamiltonian(const HamiltonianSpec& h, double k, std::uint64_t seed)
{
    if (!(k > 0.0)) throw InputError("truncate_hamiltonian: K must be positive");
    SampleStream rs(seed, 1);
    double best = -std::numeric_limits<double>::infinity();
    for (int ri = 0; ri <= 10; ++ri) {
        const double rho = k + 0.1 * ri;
        for (int i = 0; i < 200; ++i) {
            Vec z(2 * h.n);
            for (int c = 0; c < 2 * h.n; ++c) z(c) = rs.normal();
            z *= rho / z.norm();
            best = std::max(best, h.h.value(z) / std::pow(rho, 4));
        }
    }
    if (!std::isfinite(best) || best <= 0.0) throw NumericalError("truncate_hamiltonian: R_K sampling failed");
    HamiltonianSpec out = h;
    out.truncation = TruncationSpec{k, 1.1 * best};
    return out;
}

// ---------------------------------------------------------------- integration

namespace {

Vec rk4(const HamiltonianSpec& h, const Vec& x, double dt)
{
    const Vec k1 = h.field(x);
    const Vec k2 = h.field(x + 0.5 * dt * k1);
    const Vec k3 = h.field(x + 0.5 * dt * k2);
    const Vec k4 = h.field(x + dt * k3);
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// x and the variation Phi = dx/da, both advanced by one classical RK4 step
void rk4_variational(const HamiltonianSpec& h, Vec& x, Mat& phi, double dt)
{
    const Vec x1 = x;
    const Vec k1 = h.field(x1);
    const Mat p1 = h.field_jacobian(x1) * phi;
    const Vec x2 = x + 0.5 * dt * k1;
    const Vec k2 = h.field(x2);
    const Mat p2 = h.field_jacobian(x2) * (phi + 0.5 * dt * p1);
    const Vec x3 = x + 0.5 * dt * k2;
    const Vec k3 = h.field(x3);
    const Mat p3 = h.field_jacobian(x3) * (phi + 0.5 * dt * p2);
    const Vec x4 = x + dt * k3;
    const Vec k4 = h.field(x4);
    const Mat p4 = h.field_jacobian(x4) * (phi + dt * p3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    phi += dt / 6.0 * (p1 + 2.0 * p2 + 2.0 * p3 + p4);
}

Vec initial_point(int n, const Vec& a)
{
    Vec x = Vec::Zero(2 * n);
    x.tail(n) = a;
    return x;
}

Vec endpoint(const HamiltonianSpec& h, const Vec& a, double half, int steps)
{
    Vec x = initial_point(h.n, a);
    const double dt = half / steps;
    for (int i = 0; i < steps; ++i) {
        x = rk4(h, x, dt);
        if (!x.allFinite()) break;
    }
    return x;
}

double tau_bound(const HamiltonianSpec& h)
{
    const double nb = Eigen::SelfAdjointEigenSolver<Mat>(h.b).eigenvalues().cwiseAbs().maxCoeff();
    return nb > 0.0 ? 2.0 * pi / nb : std::numeric_limits<double>::infinity();
}

void require_tau(const HamiltonianSpec& h, double tau)
{
    if (!(tau > 0.0)) throw InputError("tau must be positive");
    if (h.kind == ProblemKind::second_order_odd) return;
    const double bound = tau_bound(h);
    if (!(tau < bound)) {
        std::ostringstream os;
        os << "tau = " << tau << " is not below 2 pi / |B| = " << bound;
        throw InputError(os.str());
    }
}

} // namespace

Vec BrakeOrbit::at(double t) const
{
    if (half.empty()) throw InputError("BrakeOrbit::at: empty orbit");
    t = std::fmod(t, tau);
    if (t < 0) t += tau;
    const double hh = 0.5 * tau;
    bool reflect = false;
    if (t > hh) {
        t = tau - t;     // x(tau/2 + u) = N x(tau/2 - u) with u = t - tau/2
        reflect = true;
    }
    const double dt = step();
    const long i = std::clamp(std::lround(t / dt), 0L, static_cast<long>(steps_half));
    const double rest = t - i * dt;
    Vec x = rest == 0.0 ? half[i] : rk4(spec, half[i], rest);
    if (reflect) x = reflection_n(spec.n) * x;
    return x;
}

void to_json(nlohmann::json& j, const BrakeOrbit& o)
{
    j = {{"tau", o.tau},
         {"steps_half", o.steps_half},
         {"start", vec_json(o.start)},
         {"residual", o.residual},
         {"energy_drift", o.energy_drift},
         {"action", o.action},
         {"amplitude", o.amplitude},
         {"sup_norm", o.sup_norm},
         {"junction_mismatch", o.junction_mismatch},
         {"newton_iterations", o.newton_iterations},
         {"seed_index", o.seed_index}};
}

BrakeOrbit shoot_orbit(const HamiltonianSpec& h, double tau, const Vec& guess, const ShootOptions& opt)
{
    require_tau(h, tau);
    const int n = h.n, steps = opt.steps_half;
    if (guess.size() != n) throw InputError("shoot_orbit: guess must have n entries");
    if (steps < 2 || steps % 2 != 0) throw InputError("shoot_orbit: steps_half must be even");
    const double half = 0.5 * tau, dt = half / steps;

    Vec a = guess;
    int it = 0;
    double res = std::numeric_limits<double>::infinity();
    for (; it < opt.max_newton; ++it) {
        Vec x = initial_point(n, a);
        Mat phi = Mat::Zero(2 * n, n);
        phi.bottomRows(n) = Mat::Identity(n, n);
        for (int i = 0; i < steps; ++i) rk4_variational(h, x, phi, dt);
        if (!x.allFinite() || !phi.allFinite()) throw NumericalError("shoot_orbit: flow blew up");
        const Vec f = x.head(n);
        res = f.norm();
        if (res <= opt.tol) break;
        const Eigen::ColPivHouseholderQR<Mat> qr(phi.topRows(n));
        if (qr.rank() < n) throw NumericalError("shoot_orbit: singular shooting Jacobian");
        const Vec delta = -qr.solve(f);
        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            const Vec trial = a + lambda * delta;
            const Vec xe = endpoint(h, trial, half, steps);
            if (xe.allFinite() && xe.head(n).norm() < (1.0 - 1e-4 * lambda) * res) {
                a = trial;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) throw NumericalError("shoot_orbit: line search failed");
        if (a.norm() > opt.max_start) throw NumericalError("shoot_orbit: Newton diverged");
    }
    if (!(res <= opt.tol)) throw NumericalError("shoot_orbit: Newton did not converge");

    BrakeOrbit o;
    o.spec = h;
    o.tau = tau;
    o.steps_half = steps;
    o.start = a;
    o.newton_iterations = it;
    o.half.reserve(steps + 1);
    o.half.push_back(initial_point(n, a));
    for (int i = 0; i < steps; ++i) o.half.push_back(rk4(h, o.half.back(), dt));
    o.residual = o.half.back().head(n).norm();

    const double e0 = h.energy(o.half[0]);
    double drift = 0.0;
    for (const auto& x : o.half) {
        o.sup_norm = std::max(o.sup_norm, x.norm());
        drift = std::max(drift, std::abs(h.energy(x) - e0));
    }
    o.energy_drift = drift / std::max(std::abs(e0), 1e-12);
    extend_orbit(o);

    // amplitude over one full period
    Vec mean = Vec::Zero(2 * n);
    for (int i = 0; i < 2 * steps; ++i) mean += o.full[i];
    mean /= 2.0 * steps;
    for (int i = 0; i < 2 * steps; ++i) o.amplitude = std::max(o.amplitude, (o.full[i] - mean).norm());
    if (o.amplitude <= 1e-6) throw NumericalError("shoot_orbit: collapsed to a constant solution");

    // Simpson rule for the action
    const Mat j = standard_j(n);
    auto integrand = [&](const Vec& x) { return 0.5 * h.field(x).dot(j * x) - h.energy(x); };
    double s = integrand(o.half.front()) + integrand(o.half.back());
    for (int i = 1; i < steps; ++i) s += (i % 2 ? 4.0 : 2.0) * integrand(o.half[i]);
    o.action = s * dt / 3.0;
    return o;
}

void extend_orbit(BrakeOrbit& o, double tol)
{
    const int m = o.steps_half;
    if (static_cast<int>(o.half.size()) != m + 1) throw InputError("extend_orbit: half orbit has wrong size");
    const int n = o.spec.n;
    const Mat nr = reflection_n(n);
    const double scale = std::max(1.0, o.sup_norm);
    if (o.half.front().head(n).norm() > 1e-9 * scale || o.half.back().head(n).norm() > 1e-9 * scale)
        throw NumericalError("extend_orbit: boundary conditions not met");
    o.full = o.half;
    for (int i = 1; i <= m; ++i) o.full.push_back(nr * o.half[m - i]);
    const Vec f1 = o.spec.field(o.half.back()), f0 = o.spec.field(o.half.front());
    o.junction_mismatch = std::max((f1 + nr * f1).norm() / std::max(f1.norm(), 1e-300),
                                   (f0 + nr * f0).norm() / std::max(f0.norm(), 1e-300));
    if (o.junction_mismatch > tol) throw NumericalError("extend_orbit: velocity mismatch at the junction");
}

SweepResult sweep_orbits(const HamiltonianSpec& h, double tau, const ShootOptions& opt)
{
    require_tau(h, tau);
    const int n = h.n;
    std::vector<Vec> guesses;
    for (double r : opt.radii) {
        for (int i = 0; i < n; ++i)
            for (double sgn : {1.0, -1.0}) {
                Vec a = Vec::Zero(n);
                a(i) = sgn * r;
                guesses.push_back(a);
            }
        for (int d = 0; d < opt.directions; ++d) {
            SampleStream rs(opt.seed, guesses.size());
            Vec a(n);
            for (int i = 0; i < n; ++i) a(i) = rs.normal();
            guesses.push_back(a * (r / a.norm()));
        }
    }
    struct Attempt {
        std::optional<BrakeOrbit> orbit;
        std::string error;
    };
    auto attempts = parallel_map(
        guesses.size(),
        [&](std::size_t i) {
            Attempt at;
            try {
                at.orbit = shoot_orbit(h, tau, guesses[i], opt);
                at.orbit->seed_index = i;
            } catch (const NumericalError& e) {
                at.error = e.what();
            }
            return at;
        },
        opt.threads);

    SweepResult out;
    out.seeds = static_cast<int>(guesses.size());
    out.log = nlohmann::json::array();
    for (std::size_t i = 0; i < attempts.size(); ++i) {
        auto& at = attempts[i];
        nlohmann::json entry = {{"seed_index", i}, {"guess", vec_json(guesses[i])}};
        if (!at.orbit) {
            entry["status"] = at.error;
            out.log.push_back(entry);
            continue;
        }
        ++out.converged;
        entry["status"] = "converged";
        entry["action"] = at.orbit->action;
        entry["amplitude"] = at.orbit->amplitude;
        out.log.push_back(entry);
        bool seen = false;
        for (const auto& d : out.distinct)
            if (std::abs(d.action - at.orbit->action) <= 1e-6 * std::max(1.0, std::abs(d.action)) &&
                std::abs(d.amplitude - at.orbit->amplitude) <= 1e-6 * std::max(1.0, d.amplitude))
                seen = true;
        if (!seen) out.distinct.push_back(std::move(*at.orbit));
    }
    std::stable_sort(out.distinct.begin(), out.distinct.end(),
                     [](const BrakeOrbit& a, const BrakeOrbit& b) { return a.action < b.action; });
    for (const auto& d : out.distinct)
        if (d.action > 1e-10) {
            out.selected = d;
            return out;
        }
    throw NumericalError("sweep_orbits: no non-constant orbit with positive action");
}

// ---------------------------------------------------------------- linearization

CoefficientPath linearize_orbit(const BrakeOrbit& orbit)
{
    auto shared = std::make_shared<const BrakeOrbit>(orbit);
    auto f = [shared](double s) {
        const BrakeOrbit& o = *shared;
        const Vec x = o.at(0.5 * o.tau * s);
        return Mat(0.5 * o.tau * (o.spec.b + o.spec.nonlinear_hessian(x)));
    };
    CoefficientPath p(orbit.spec.n, f, Representation::linearized_orbit, false);
    const auto rep = check_brake_symmetry(p);
    if (!rep.ok(1e-8)) throw NumericalError("linearize_orbit: brake symmetry violated");
    CoefficientPath out(orbit.spec.n, f, Representation::linearized_orbit, true);
    out.source = {{"orbit", orbit}, {"hamiltonian", orbit.spec}};
    return out;
}

void to_json(nlohmann::json& j, const HxReport& r)
{
    j = {{"min_pointwise", r.min_pointwise}, {"min_integral", r.min_integral}, {"holds", r.holds}};
}

namespace {

// H'' (optionally B + H'') along the half orbit
HxReport hessian_positivity(const BrakeOrbit& o, bool with_b, double margin)
{
    HxReport r;
    r.min_pointwise = std::numeric_limits<double>::infinity();
    const int m = o.steps_half;
    const double dt = o.step();
    Mat acc = Mat::Zero(2 * o.spec.n, 2 * o.spec.n);
    for (int i = 0; i <= m; ++i) {
        Mat hh = o.spec.nonlinear_hessian(o.half[i]);
        if (with_b) hh += o.spec.b;
        r.min_pointwise = std::min(r.min_pointwise, Eigen::SelfAdjointEigenSolver<Mat>(hh).eigenvalues().minCoeff());
        const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * hh;
    }
    acc *= dt / 3.0;
    r.min_integral = Eigen::SelfAdjointEigenSolver<Mat>(acc).eigenvalues().minCoeff();
    r.holds = r.min_pointwise >= -1e-10 && r.min_integral > margin;
    return r;
}

} // namespace

HxReport hx_condition(const BrakeOrbit& orbit, double margin) { return hessian_positivity(orbit, false, margin); }

void to_json(nlohmann::json& j, const OrbitIndices& r)
{
    j = {{"i_L0", r.l0_galerkin.index},
         {"nu_L0", r.l0_galerkin.nullity},
         {"i_L0_winding", r.l0_winding.index},
         {"nu_L0_winding", r.l0_winding.nullity},
         {"i_1", r.periodic.index},
         {"nu_1", r.periodic.nullity},
         {"i_L0_sqrt_minus_one", r.l0_sqrt_minus_one.index},
         {"nu_L0_sqrt_minus_one", r.l0_sqrt_minus_one.nullity},
         {"engines_agree", r.engines_agree}};
}

OrbitIndices orbit_indices(const BrakeOrbit& orbit, const RelativeIndexPolicy& policy)
{
    const CoefficientPath bs = linearize_orbit(orbit);
    OrbitIndices r;
    r.l0_winding = l0_index_of(bs, 1.0, {}, policy.integ);
    r.l0_galerkin = index_l0_galerkin(bs, 1.0, policy);
    r.periodic = index_omega(bs, 2.0, 0.0, policy);
    r.l0_sqrt_minus_one = index_l0_omega(bs, 1.0, pi / 2, policy);
    r.engines_agree =
        r.l0_winding.index == r.l0_galerkin.index && r.l0_winding.nullity == r.l0_galerkin.nullity;
    if (!r.engines_agree) throw TheoryViolation("orbit_indices: winding and Galerkin L0 indices disagree");
    if (r.periodic.nullity < 1) throw TheoryViolation("orbit_indices: nu_1 = 0 for an autonomous orbit");
    return r;
}

// ---------------------------------------------------------------- minimal period

void to_json(nlohmann::json& j, const MinimalPeriod& r)
{
    j = {{"tau_min", r.tau_min}, {"k_star", r.k_star}, {"divisors", r.divisors}, {"amplitude", r.amplitude}};
}

MinimalPeriod minimal_period(const std::vector<Vec>& samples, double tau, double tol)
{
    if (samples.size() < 3) throw InputError("minimal_period: too few samples");
    const std::size_t m = samples.size() - 1;
    Vec mean = Vec::Zero(samples[0].size());
    for (std::size_t i = 0; i < m; ++i) mean += samples[i];
    mean /= static_cast<double>(m);
    MinimalPeriod r;
    for (std::size_t i = 0; i < m; ++i) r.amplitude = std::max(r.amplitude, (samples[i] - mean).norm());
    if (r.amplitude <= 1e-6) throw InputError("minimal_period: amplitude below the constant-orbit threshold");
    for (int k = 1; k <= 12; ++k) {
        if (m % k != 0) continue;
        const std::size_t shift = m / k;
        double worst = 0.0;
        for (std::size_t i = 0; i < m; ++i) worst = std::max(worst, (samples[(i + shift) % m] - samples[i]).norm());
        if (worst <= tol * r.amplitude) r.divisors.push_back(k);
    }
    r.k_star = r.divisors.empty() ? 1 : r.divisors.back();
    r.tau_min = tau / r.k_star;
    return r;
}

// ---------------------------------------------------------------- Morse identities

void to_json(nlohmann::json& j, const MorseReport& r)
{
    nlohmann::json lv = nlohmann::json::array();
    for (const auto& l : r.levels)
        lv.push_back({{"m", l.m}, {"negative", l.negative}, {"null", l.null}, {"expected", l.expected_negative},
                      {"negative_closed", l.negative_closed}, {"holds", l.holds}});
    j = {{"i_L0", r.l0_index}, {"nu_L0", r.l0_nullity}, {"d", r.d}, {"levels", lv}, {"holds", r.holds}};
}

MorseReport linear_morse_check(const CoefficientPath& b, int m_lo, int m_hi, const RelativeIndexPolicy& policy)
{
    if (m_lo < 0 || m_hi < m_lo) throw InputError("morse check: bad level range");
    const int n = b.n();
    const auto rel = relative_index(b, 1.0, SpaceKind::l0_fourier, 0.0, policy);
    MorseReport r;
    r.l0_index = rel.value - n;
    r.l0_nullity = rel.geometric_nullity;
    r.d = rel.d;
    const auto fp = assemble_forms(build_truncation(SpaceKind::l0_fourier, 0.0, m_hi, n), b, policy.quad);
    r.holds = true;
    for (int m = m_lo; m <= m_hi; ++m) {
        const int dim = (2 * m + 1) * n;
        const Vec ev = hermitian_eigenvalues(CMat(fp.a - fp.b).topLeftCorner(dim, dim), true);
        const auto c = d_morse(ev, r.d);
        MorseLevel l{m, c.negative, c.null, m * n + n + r.l0_index, c.negative + c.null, false};
        l.holds = l.negative == l.expected_negative && l.null == r.l0_nullity;
        r.holds = r.holds && l.holds;
        r.levels.push_back(l);
        if (m == m_hi) r.spectrum = ev;
    }
    return r;
}

MorseReport morse_identity_check(const BrakeOrbit& orbit, int m_lo, int m_hi, const RelativeIndexPolicy& policy)
{
    // H_K agrees with H on the orbit once K exceeds its sup norm
    BrakeOrbit o = orbit;
    o.spec = truncate_hamiltonian(orbit.spec, std::ceil(2.0 * orbit.sup_norm) + 1.0);
    return linear_morse_check(linearize_orbit(o), m_lo, m_hi, policy);
}

void to_json(nlohmann::json& j, const SineMorseReport& r)
{
    j = {{"negative", r.negative}, {"null", r.null},   {"i_L0", r.l0_index}, {"nu_L0", r.l0_nullity},
         {"modes", r.modes},       {"d", r.d},         {"holds", r.holds}};
}

SineMorseReport sine_morse_check(const BrakeOrbit& orbit, int modes, const RelativeIndexPolicy& policy)
{
    if (orbit.spec.kind != ProblemKind::second_order_odd)
        throw InputError("sine_morse_check: needs an odd-Dirichlet second-order orbit");
    const int n = orbit.spec.n;
    const double t_half = 0.5 * orbit.tau;
    const int dim = modes * n;
    Mat hess = Mat::Zero(dim, dim);
    for (int k = 1; k <= modes; ++k)
        for (int a = 0; a < n; ++a) {
            const double w = k * pi / t_half;
            hess((k - 1) * n + a, (k - 1) * n + a) = w * w * 0.5 * t_half;
        }
    using GL = boost::math::quadrature::gauss<double, 20>;
    const auto& xs = GL::abscissa();
    const auto& ws = GL::weights();
    const int panels = 4 * modes;
    auto add_node = [&](double t, double wt) {
        const Mat v2 = orbit.spec.nonlinear_hessian(orbit.at(t)).topLeftCorner(n, n);
        Vec s(modes);
        for (int k = 1; k <= modes; ++k) s(k - 1) = std::sin(k * pi * t / t_half);
        for (int k = 0; k < modes; ++k)
            for (int l = 0; l < modes; ++l) hess.block(k * n, l * n, n, n) -= wt * s(k) * s(l) * v2;
    };
    for (int p = 0; p < panels; ++p) {
        const double half = 0.5 * t_half / panels, mid = (p + 0.5) * t_half / panels;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            add_node(mid + half * xs[i], half * ws[i]);
            if (xs[i] != 0.0) add_node(mid - half * xs[i], half * ws[i]);
        }
    }
    const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (hess + hess.transpose())).eigenvalues();

    const auto l0 = index_l0_galerkin(linearize_orbit(orbit), 1.0, policy);
    SineMorseReport r;
    r.modes = modes;
    r.l0_index = l0.index;
    r.l0_nullity = l0.nullity;
    std::vector<double> mags;
    for (Eigen::Index i = 0; i < ev.size(); ++i) mags.push_back(std::abs(ev(i)));
    std::sort(mags.begin(), mags.end());
    r.d = 0.25 * mags[std::min<std::size_t>(r.l0_nullity, mags.size() - 1)];
    const auto c = d_morse(ev, r.d);
    r.negative = c.negative;
    r.null = c.null;
    r.holds = r.negative == r.l0_index && r.null == r.l0_nullity;
    return r;
}

// ---------------------------------------------------------------- certificates

namespace {

void clause(nlohmann::json& c, const std::string& name, bool pass, bool asserted, nlohmann::json detail = {})
{
    if (detail.is_null()) detail = nlohmann::json::object();
    detail["pass"] = pass;
    detail["asserted"] = asserted;
    c[name] = detail;
}

Certificate certify(const HamiltonianSpec& h, double tau, const ShootOptions& opt, const RelativeIndexPolicy& policy)
{
    const HypothesisReport hyp = check_hypotheses(h, opt.seed);
    if (!hyp.ok()) throw InputError("hypotheses violated: " + nlohmann::json(hyp).dump());
    require_tau(h, tau);

    Certificate cert;
    nlohmann::json& c = cert.clauses;
    c = nlohmann::json::object();
    clause(c, "hypotheses", true, true, nlohmann::json(hyp));
    const double bound = tau_bound(h);
    clause(c, "tau_admissible", true, true,
           {{"tau", tau}, {"bound", std::isfinite(bound) ? nlohmann::json(bound) : nlohmann::json("inf")}});

    const SweepResult sweep = sweep_orbits(h, tau, opt);
    const BrakeOrbit& o = sweep.selected;
    cert.orbit = o;
    const double boundary = std::max(o.half.front().head(h.n).norm(), o.half.back().head(h.n).norm());
    clause(c, "orbit", boundary <= 1e-9 * o.amplitude && o.energy_drift <= 1e-8, true,
           {{"orbit", o}, {"boundary_defect", boundary}, {"distinct_orbits", sweep.distinct.size()},
            {"seeds", sweep.seeds}, {"converged", sweep.converged}});

    const OrbitIndices idx = orbit_indices(o, policy);
    clause(c, "engines_agree", idx.engines_agree, true, nlohmann::json(idx));
    clause(c, "index_bound", idx.l0_galerkin.index <= 1, true, {{"i_L0", idx.l0_galerkin.index}});
    clause(c, "nu1_positive", idx.periodic.nullity >= 1, true, {{"nu_1", idx.periodic.nullity}});

    // (HX) on H'' for the first-order problem, convexity of the full Hessian for second order
    const bool second = is_second_order(h.kind);
    const HxReport hx = hessian_positivity(o, second, 1e-8);
    clause(c, second ? "convexity" : "hx", hx.holds, false, nlohmann::json(hx));
    clause(c, "l0_nonnegative", idx.l0_galerkin.index >= 0, hx.holds, {{"i_L0", idx.l0_galerkin.index}});
    clause(c, "i1_at_least_n", idx.periodic.index >= h.n, hx.holds, {{"i_1", idx.periodic.index}});

    // minimal period of the configuration component
    std::vector<Vec> comp;
    for (const auto& z : o.full) {
        if (h.kind == ProblemKind::second_order_odd) comp.push_back(z.head(h.n));
        else if (h.kind == ProblemKind::second_order_neumann) comp.push_back(z.tail(h.n));
        else comp.push_back(z);
    }
    const MinimalPeriod mp = minimal_period(comp, tau);
    const bool period_ok = mp.k_star == 1 || mp.k_star == 2;
    clause(c, "minimal_period", period_ok, hx.holds, nlohmann::json(mp));

    if (h.kind == ProblemKind::first_order) {
        const MorseReport mr = morse_identity_check(o, 8, 16, policy);
        cert.hessian_spectrum = mr.spectrum;
        clause(c, "morse_identity", mr.holds, true, nlohmann::json(mr));
    } else if (h.kind == ProblemKind::second_order_odd) {
        const SineMorseReport sm = sine_morse_check(o, 32, policy);
        clause(c, "morse_identity", sm.holds, true, nlohmann::json(sm));
    } else {
        clause(c, "morse_identity", true, false, {{"reason", "no Dirichlet functional for the Neumann variant"}});
    }

    cert.pass = true;
    for (auto& [name, v] : c.items())
        if (v["asserted"].get<bool>() && !v["pass"].get<bool>()) cert.pass = false;
    return cert;
}

} // namespace

Certificate verify_first_order(const HamiltonianSpec& h, double tau, const ShootOptions& opt,
                             const RelativeIndexPolicy& policy)
{
    if (h.kind != ProblemKind::first_order) throw InputError("verify_first_order: needs a first-order Hamiltonian");
    return certify(h, tau, opt, policy);
}

Certificate solve_second_order(const HamiltonianSpec& h, double tau, const ShootOptions& opt,
                               const RelativeIndexPolicy& policy)
{
    if (!is_second_order(h.kind)) throw InputError("solve_second_order: needs a second-order Hamiltonian");
    return certify(h, tau, opt, policy);
}

double duffing_speed_for_zero(double c, double t)
{
    if (!(c > 0.0) || !(t > 0.0)) throw InputError("duffing_speed_for_zero: c and t must be positive");
    // integral of (1 - u^4)^{-1/2} over [0, 1]
    const double lem = std::tgamma(0.25) * std::tgamma(0.25) / (4.0 * std::sqrt(2.0 * pi));
    const double amp = 2.0 * lem / (t * std::sqrt(2.0 * c));
    return std::sqrt(2.0 * c) * amp * amp;
}

} // namespace maslov
