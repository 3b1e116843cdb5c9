#include "maslov/symplectic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

namespace maslov {

int numerical_rank(const Mat& a, double tol)
{
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(a);
    const Vec& s = svd.singularValues();
    const double cut = tol * std::max(1.0, s(0));
    return static_cast<int>((s.array() > cut).count());
}

int numerical_rank(const CMat& a, double tol)
{
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<CMat> svd(a);
    const Vec s = svd.singularValues();
    const double cut = tol * std::max(1.0, s(0));
    return static_cast<int>((s.array() > cut).count());
}

double relative_smallest_singular(const Mat& a)
{
    Eigen::JacobiSVD<Mat> svd(a);
    const Vec& s = svd.singularValues();
    return s(s.size() - 1) / std::max(1.0, s(0));
}

Mat standard_j(int n)
{
    Mat j = Mat::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = -Mat::Identity(n, n);
    j.bottomLeftCorner(n, n) = Mat::Identity(n, n);
    return j;
}

Mat reflection_n(int n)
{
    Mat r = Mat::Identity(2 * n, 2 * n);
    r.topLeftCorner(n, n) *= -1.0;
    return r;
}

StandardMatrices standard_matrices(int n)
{
    if (n < 1) throw InputError("standard_matrices: n must be positive");
    StandardMatrices s;
    s.n = n;
    s.j = standard_j(n);
    s.n_refl = reflection_n(n);
    s.jn = Mat::Identity(n, n);
    s.jn(0, 0) = -1.0;
    s.m_plus = Mat::Zero(2 * n, 2 * n);
    s.m_plus.topRightCorner(n, n) = Mat::Identity(n, n);
    s.m_plus.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
    s.m_minus = Mat::Zero(2 * n, 2 * n);
    s.m_minus.topRightCorner(n, n) = s.jn;
    s.m_minus.bottomLeftCorner(n, n) = -s.jn;
    return s;
}

Mat rotation(double theta)
{
    Mat r(2, 2);
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
}

Mat exp_tj(int n, double phi)
{
    return std::cos(phi) * Mat::Identity(2 * n, 2 * n) + std::sin(phi) * standard_j(n);
}

double symplectic_defect(const Mat& m)
{
    const Mat j = standard_j(static_cast<int>(m.rows() / 2));
    return (m.transpose() * j * m - j).cwiseAbs().maxCoeff();
}

void require_symplectic(const Mat& m, double tol, const char* what)
{
    if (m.rows() != m.cols() || m.rows() % 2 != 0)
        throw InputError(std::string(what) + ": matrix is not square of even size");
    const double scale = std::max(1.0, m.squaredNorm() / static_cast<double>(m.rows()));
    if (symplectic_defect(m) > tol * scale)
        throw InputError(std::string(what) + ": matrix is not symplectic");
}

Mat diamond(const Mat& m1, const Mat& m2)
{
    require_symplectic(m1, 1e-10, "diamond");
    require_symplectic(m2, 1e-10, "diamond");
    const Eigen::Index k1 = m1.rows() / 2, k2 = m2.rows() / 2, k = k1 + k2;
    Mat out = Mat::Zero(2 * k, 2 * k);
    const Blocks a = blocks_of(m1), b = blocks_of(m2);
    out.block(0, 0, k1, k1) = a.s;
    out.block(0, k, k1, k1) = a.v;
    out.block(k, 0, k1, k1) = a.t;
    out.block(k, k, k1, k1) = a.u;
    out.block(k1, k1, k2, k2) = b.s;
    out.block(k1, k + k1, k2, k2) = b.v;
    out.block(k + k1, k1, k2, k2) = b.t;
    out.block(k + k1, k + k1, k2, k2) = b.u;
    return out;
}

Mat diamond_all(const std::vector<Mat>& ms)
{
    if (ms.empty()) throw InputError("diamond_all: empty list");
    Mat out = ms.front();
    for (std::size_t i = 1; i < ms.size(); ++i) out = diamond(out, ms[i]);
    return out;
}

Mat n1(double lambda, double b)
{
    Mat m(2, 2);
    m << lambda, b, 0.0, lambda;
    return m;
}

Mat normal_form(NormalFormKind kind, double param)
{
    switch (kind) {
    case NormalFormKind::n1:
        throw InputError("normal_form: N1 needs (lambda, b); use n1()");
    case NormalFormKind::r:
        return rotation(param);
    }
    throw InputError("normal_form: unknown kind");
}

std::pair<int, int> krein_signature(const Mat& m, cplx lambda, int algebraic)
{
    const Eigen::Index dim = m.rows();
    if (algebraic <= 0) {
        Eigen::EigenSolver<Mat> es(m, false);
        algebraic = 0;
        for (Eigen::Index i = 0; i < dim; ++i)
            if (std::abs(es.eigenvalues()(i) - lambda) < 1e-5) ++algebraic;
        if (algebraic == 0) throw InputError("krein_signature: lambda is not an eigenvalue");
    }
    CMat shifted = m.cast<cplx>() - lambda * CMat::Identity(dim, dim);
    CMat power = CMat::Identity(dim, dim);
    for (int i = 0; i < algebraic; ++i) power = power * shifted;
    Eigen::JacobiSVD<CMat> svd(power, Eigen::ComputeFullV);
    const CMat x = svd.matrixV().rightCols(algebraic);
    const CMat ij = cplx(0.0, 1.0) * standard_j(static_cast<int>(dim / 2)).cast<cplx>();
    CMat g = x.adjoint() * ij * x;
    g = 0.5 * (g + g.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMat> eig(g);
    const Vec ev = eig.eigenvalues();
    const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    int p = 0, q = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > 1e-9 * scale) ++p;
        else if (ev(i) < -1e-9 * scale) ++q;
    }
    return {p, q};
}

int omega_nullity(const Mat& m, cplx omega, double tol)
{
    const Eigen::Index dim = m.rows();
    const CMat a = m.cast<cplx>() - omega * CMat::Identity(dim, dim);
    return static_cast<int>(dim) - numerical_rank(a, tol);
}

SpectralInvariant unit_spectrum(const Mat& m, const SpectrumOptions& opt)
{
    Eigen::EigenSolver<Mat> es(m, false);
    const CVec ev = es.eigenvalues();
    const Eigen::Index dim = ev.size();

    // single-linkage clusters; perturbed Jordan blocks split by ~eps^(1/k)
    std::vector<int> label(dim);
    std::iota(label.begin(), label.end(), 0);
    std::function<int(int)> find = [&](int i) { return label[i] == i ? i : label[i] = find(label[i]); };
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = i + 1; j < dim; ++j)
            if (std::abs(ev(i) - ev(j)) < opt.cluster_tol)
                label[find(static_cast<int>(j))] = find(static_cast<int>(i));

    std::vector<std::vector<cplx>> groups;
    std::vector<int> root_of(dim, -1);
    for (Eigen::Index i = 0; i < dim; ++i) {
        int r = find(static_cast<int>(i));
        if (root_of[r] < 0) {
            root_of[r] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[root_of[r]].push_back(ev(i));
    }

    SpectralInvariant out;
    for (const auto& g : groups) {
        cplx mean(0.0, 0.0);
        for (cplx z : g) mean += z;
        mean /= static_cast<double>(g.size());
        const double gap = std::abs(std::abs(mean) - 1.0);
        if (gap > 2.0 * opt.circle_tol) {
            for (cplx z : g) out.off_circle.push_back(z);
            continue;
        }
        UnitEigenvalue u;
        u.ambiguous = gap > opt.circle_tol;
        out.ambiguous = out.ambiguous || u.ambiguous;
        u.lambda = mean / std::abs(mean);
        if (std::abs(u.lambda.imag()) < opt.cluster_tol) u.lambda = cplx(u.lambda.real() > 0 ? 1.0 : -1.0, 0.0);
        u.algebraic = static_cast<int>(g.size());
        u.geometric = omega_nullity(m, u.lambda, opt.kernel_tol);
        if (u.lambda.imag() != 0.0) {
            auto [p, q] = krein_signature(m, u.lambda, u.algebraic);
            u.krein_p = p;
            u.krein_q = q;
        }
        out.unit.push_back(u);
    }
    std::sort(out.unit.begin(), out.unit.end(), [](const UnitEigenvalue& a, const UnitEigenvalue& b) {
        double aa = std::arg(a.lambda), bb = std::arg(b.lambda);
        if (aa < 0) aa += 2 * pi;
        if (bb < 0) bb += 2 * pi;
        return aa < bb;
    });
    return out;
}

Mat SymplecticPath::at(double t) const
{
    if (t <= grid.front()) return frames.front();
    if (t >= grid.back()) return frames.back();
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
    const double w = (t - grid[i]) / (grid[i + 1] - grid[i]);
    return (1.0 - w) * frames[i] + w * frames[i + 1];
}

double SymplecticPath::max_defect() const
{
    double d = 0.0;
    for (const Mat& f : frames) d = std::max(d, symplectic_defect(f));
    return d;
}

const char* representation_name(Representation r)
{
    switch (r) {
    case Representation::fourier_blocks: return "fourier-blocks";
    case Representation::grid_samples: return "grid-samples";
    case Representation::linearized_orbit: return "linearized-orbit";
    case Representation::analytic: return "analytic";
    }
    return "unknown";
}

CoefficientPath::CoefficientPath(int n, Evaluator f, Representation rep, bool brake_symmetric,
                                 std::vector<double> breakpoints)
    : n_(n), f_(std::move(f)), rep_(rep), brake_(brake_symmetric), breaks_(std::move(breakpoints))
{
    if (n < 1) throw InputError("CoefficientPath: n must be positive");
}

CoefficientPath CoefficientPath::constant(const Mat& b)
{
    if (b.rows() != b.cols() || b.rows() % 2 != 0)
        throw InputError("CoefficientPath::constant: need a square matrix of even size");
    const Mat sym = 0.5 * (b + b.transpose());
    auto p = fourier(sym, {}, {});
    return p;
}

static bool commutes_with_n(const Mat& c, double sign)
{
    const Mat nr = reflection_n(static_cast<int>(c.rows() / 2));
    return (c * nr - sign * nr * c).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff());
}

static nlohmann::json flat(const Mat& m)
{
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(m(i, j));
    return a;
}

CoefficientPath CoefficientPath::fourier(const Mat& c0, std::vector<Mat> cos_terms, std::vector<Mat> sin_terms)
{
    if (c0.rows() != c0.cols() || c0.rows() % 2 != 0)
        throw InputError("fourier path: c0 must be square of even size");
    const std::size_t order = std::max(cos_terms.size(), sin_terms.size());
    cos_terms.resize(order, Mat::Zero(c0.rows(), c0.cols()));
    sin_terms.resize(order, Mat::Zero(c0.rows(), c0.cols()));
    bool brake = commutes_with_n(c0, 1.0);
    auto sym_check = [](const Mat& m) {
        return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
    };
    if (!sym_check(c0)) throw InputError("fourier path: coefficient not symmetric");
    for (std::size_t j = 0; j < order; ++j) {
        if (cos_terms[j].rows() != c0.rows() || sin_terms[j].rows() != c0.rows())
            throw InputError("fourier path: coefficient size mismatch");
        if (!sym_check(cos_terms[j]) || !sym_check(sin_terms[j]))
            throw InputError("fourier path: coefficient not symmetric");
        brake = brake && commutes_with_n(cos_terms[j], 1.0) && commutes_with_n(sin_terms[j], -1.0);
    }
    const int n = static_cast<int>(c0.rows() / 2);
    auto f = [c0, cos_terms, sin_terms](double t) {
        Mat b = c0;
        for (std::size_t j = 0; j < cos_terms.size(); ++j) {
            const double w = static_cast<double>(j + 1) * pi * t;
            b += std::cos(w) * cos_terms[j] + std::sin(w) * sin_terms[j];
        }
        return b;
    };
    CoefficientPath p(n, f, Representation::fourier_blocks, brake);
    p.source = {{"c0", flat(c0)}, {"terms", nlohmann::json::array()}};
    for (std::size_t j = 0; j < order; ++j)
        p.source["terms"].push_back({{"j", j + 1}, {"cos", flat(cos_terms[j])}, {"sin", flat(sin_terms[j])}});
    return p;
}

CoefficientPath CoefficientPath::grid_samples(std::vector<double> times, std::vector<Mat> values)
{
    if (times.size() < 2 || times.size() != values.size())
        throw InputError("grid path: need at least two samples with matching times");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw InputError("grid path: times must increase");
    const int n = static_cast<int>(values.front().rows() / 2);
    for (const Mat& v : values)
        if (v.rows() != 2 * n || v.cols() != 2 * n || (v - v.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw InputError("grid path: samples must be symmetric 2n x 2n");
    auto f = [times, values](double t) {
        if (t < times.front() - 1e-12 || t > times.back() + 1e-12)
            throw InputError("grid path: evaluation outside sampled range");
        auto it = std::upper_bound(times.begin(), times.end(), t);
        std::size_t i = static_cast<std::size_t>(it - times.begin());
        i = std::clamp<std::size_t>(i, 1, times.size() - 1) - 1;
        const double w = std::clamp((t - times[i]) / (times[i + 1] - times[i]), 0.0, 1.0);
        return Mat((1.0 - w) * values[i] + w * values[i + 1]);
    };
    CoefficientPath p(n, f, Representation::grid_samples, false, times);
    p.source = {{"times", times}, {"values", nlohmann::json::array()}};
    for (const Mat& v : values) p.source["values"].push_back(flat(v));
    if (times.front() <= 0.0 && times.back() >= 4.0) p.brake_ = check_brake_symmetry(p).ok(1e-10);
    return p;
}

CoefficientPath CoefficientPath::rescaled(double length, double t0) const
{
    if (!(length > 0)) throw InputError("rescaled: length must be positive");
    Evaluator g = f_;
    auto f = [g, length, t0](double s) { return Mat(length * g(t0 + length * s)); };
    std::vector<double> br;
    for (double b : breaks_) {
        const double s = (b - t0) / length;
        if (s > 1e-14 && s < 1.0 - 1e-14) br.push_back(s);
    }
    CoefficientPath p(n_, f, rep_, false, br);
    return p;
}

namespace {

struct Tableau {
    std::vector<double> c, b;
    std::vector<std::vector<double>> a;
};

Tableau gauss_tableau(int stages)
{
    const double r3 = std::sqrt(3.0), r15 = std::sqrt(15.0);
    switch (stages) {
    case 1: return {{0.5}, {1.0}, {{0.5}}};
    case 2:
        return {{0.5 - r3 / 6, 0.5 + r3 / 6}, {0.5, 0.5}, {{0.25, 0.25 - r3 / 6}, {0.25 + r3 / 6, 0.25}}};
    case 3:
        return {{0.5 - r15 / 10, 0.5, 0.5 + r15 / 10},
                {5.0 / 18, 4.0 / 9, 5.0 / 18},
                {{5.0 / 36, 2.0 / 9 - r15 / 15, 5.0 / 36 - r15 / 30},
                 {5.0 / 36 + r15 / 24, 2.0 / 9, 5.0 / 36 - r15 / 24},
                 {5.0 / 36 + r15 / 30, 2.0 / 9 + r15 / 15, 5.0 / 36}}};
    default: throw InputError("integrator: stages must be 1, 2 or 3");
    }
}

template <class OnStep>
void collocation_run(const CoefficientPath& b, double length, const IntegratorOptions& opt, double t0,
                     OnStep&& on_step)
{
    if (!(length > 0)) throw InputError("integrate_fundamental: length must be positive");
    if (opt.steps_per_unit < 1) throw InputError("integrate_fundamental: steps_per_unit must be positive");
    const Tableau tab = gauss_tableau(opt.stages);
    const int s = opt.stages;
    const int n = b.n();
    const int d = 2 * n;
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(opt.steps_per_unit * length - 1e-9)));
    const double h = length / static_cast<double>(steps);
    const Mat j = standard_j(n);

    Mat phi = Mat::Identity(d, d);
    Mat lhs(s * d, s * d), rhs(s * d, d);
    std::vector<Mat> a(s);
    on_step(0L, t0, phi);
    for (long k = 0; k < steps; ++k) {
        const double t = t0 + h * static_cast<double>(k);
        for (int i = 0; i < s; ++i) {
            const Mat bi = b(t + tab.c[i] * h);
            if (bi.rows() != d || !bi.allFinite()) throw InputError("integrate_fundamental: bad coefficient value");
            a[i] = j * bi;
        }
        for (int i = 0; i < s; ++i) {
            for (int l = 0; l < s; ++l) {
                lhs.block(i * d, l * d, d, d) = -h * tab.a[i][l] * a[i];
                if (i == l) lhs.block(i * d, l * d, d, d) += Mat::Identity(d, d);
            }
            rhs.block(i * d, 0, d, d) = a[i] * phi;
        }
        const Mat kk = lhs.partialPivLu().solve(rhs);
        for (int i = 0; i < s; ++i) phi += h * tab.b[i] * kk.block(i * d, 0, d, d);

        const double scale = std::max(1.0, phi.squaredNorm() / d);
        Mat e = phi.transpose() * j * phi - j;
        double drift = e.cwiseAbs().maxCoeff();
        if (opt.reproject && drift > 1e-3 * opt.symplectic_tol * scale) {
            phi = phi * (Mat::Identity(d, d) + 0.5 * j * e);
            e = phi.transpose() * j * phi - j;
            drift = e.cwiseAbs().maxCoeff();
        }
        if (drift > opt.symplectic_tol * scale) {
            std::ostringstream os;
            os << "integrate_fundamental: symplectic drift " << drift << " at t=" << t + h;
            throw NumericalError(os.str());
        }
        on_step(k + 1, k + 1 == steps ? t0 + length : t + h, phi);
    }
}

} // namespace

SymplecticPath integrate_fundamental(const CoefficientPath& b, double length, const IntegratorOptions& opt,
                                     double t0)
{
    SymplecticPath path;
    path.n = b.n();
    collocation_run(b, length, opt, t0, [&](long, double t, const Mat& phi) {
        path.grid.push_back(t);
        path.frames.push_back(phi);
    });
    return path;
}

Mat monodromy(const CoefficientPath& b, double length, const IntegratorOptions& opt)
{
    Mat last;
    collocation_run(b, length, opt, 0.0, [&](long, double, const Mat& phi) { last = phi; });
    return last;
}

BrakeSymmetryReport check_brake_symmetry(const CoefficientPath& b, int samples)
{
    BrakeSymmetryReport r;
    const Mat nr = reflection_n(b.n());
    for (int i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / (samples - 1);
        const Mat plus = b(1.0 + t), minus = b(1.0 - t);
        r.reflection = std::max(r.reflection, (plus * nr - nr * minus).cwiseAbs().maxCoeff());
        const double u = 2.0 * t;
        const Mat bu = b(u);
        r.symmetry = std::max(r.symmetry, (bu - bu.transpose()).cwiseAbs().maxCoeff());
        if (i + 1 < samples) r.periodicity = std::max(r.periodicity, (b(u + 2.0) - bu).cwiseAbs().maxCoeff());
    }
    return r;
}

} // namespace maslov
