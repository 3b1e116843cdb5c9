#include "maslov/galerkin.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <sstream>

namespace maslov {

const char* space_kind_name(SpaceKind k)
{
    switch (k) {
    case SpaceKind::l0_fourier: return "l0-fourier";
    case SpaceKind::l0_omega: return "l0-omega";
    case SpaceKind::periodic_omega: return "periodic-omega";
    }
    return "unknown";
}

SpaceKind parse_space_kind(const std::string& s)
{
    if (s == "l0-fourier") return SpaceKind::l0_fourier;
    if (s == "l0-omega") return SpaceKind::l0_omega;
    if (s == "periodic-omega") return SpaceKind::periodic_omega;
    throw InputError("unknown space kind '" + s + "'");
}

std::vector<int> TruncationSpace::modes() const
{
    std::vector<int> js{0};
    for (int k = 1; k <= m; ++k) {
        js.push_back(-k);
        js.push_back(k);
    }
    return js;
}

double TruncationSpace::frequency(int j) const
{
    return theta + (kind == SpaceKind::periodic_omega ? 2.0 * pi : pi) * j;
}

TruncationSpace build_truncation(SpaceKind kind, double theta, int m, int n)
{
    if (m < 0 || n < 1) throw InputError("build_truncation: need m >= 0 and n >= 1");
    if (kind == SpaceKind::l0_fourier && theta != 0.0) throw InputError("build_truncation: l0-fourier has theta = 0");
    if (kind == SpaceKind::l0_omega && !(theta >= 0.0 && theta < pi))
        throw InputError("build_truncation: l0-omega needs theta in [0, pi)");
    if (kind == SpaceKind::periodic_omega && !(theta >= 0.0 && theta < 2 * pi))
        throw InputError("build_truncation: periodic-omega needs theta in [0, 2 pi)");
    return {kind, theta, m, n};
}

namespace {

constexpr int gauss_points = 20;

struct Rule {
    std::vector<double> x, w; // on [-1, 1]
};

const Rule& gauss_rule()
{
    static const Rule rule = [] {
        using G = boost::math::quadrature::gauss<double, gauss_points>;
        Rule r;
        const auto& a = G::abscissa();
        const auto& w = G::weights();
        for (std::size_t i = 0; i < a.size(); ++i) {
            r.x.push_back(a[i]);
            r.w.push_back(w[i]);
            if (a[i] != 0.0) {
                r.x.push_back(-a[i]);
                r.w.push_back(w[i]);
            }
        }
        return r;
    }();
    return rule;
}

struct Nodes {
    std::vector<double> t, w;
    std::vector<Mat> b;
};

Nodes make_nodes(const CoefficientPath& b, int panels)
{
    std::vector<double> cuts{0.0};
    for (double s : b.breakpoints())
        if (s > cuts.back()) cuts.push_back(s);
    cuts.push_back(1.0);
    const Rule& rule = gauss_rule();
    Nodes nodes;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double len = cuts[c + 1] - cuts[c];
        const int p = std::max(1, static_cast<int>(std::ceil(panels * len - 1e-12)));
        const double h = len / p;
        for (int k = 0; k < p; ++k) {
            const double mid = cuts[c] + (k + 0.5) * h;
            for (std::size_t i = 0; i < rule.x.size(); ++i) {
                nodes.t.push_back(mid + 0.5 * h * rule.x[i]);
                nodes.w.push_back(0.5 * h * rule.w[i]);
            }
        }
    }
    nodes.b.reserve(nodes.t.size());
    for (double t : nodes.t) {
        Mat v = b(t);
        if (!v.allFinite()) throw InputError("assemble_forms: coefficient is not finite");
        nodes.b.push_back(std::move(v));
    }
    return nodes;
}

// cos and sin moments of B for each frequency
struct Moments {
    std::vector<Mat> c, s;
};

Moments moments(const Nodes& nodes, const std::vector<double>& freqs, int dim)
{
    Moments mo;
    mo.c.assign(freqs.size(), Mat::Zero(dim, dim));
    mo.s.assign(freqs.size(), Mat::Zero(dim, dim));
    for (std::size_t q = 0; q < nodes.t.size(); ++q) {
        for (std::size_t f = 0; f < freqs.size(); ++f) {
            const double arg = freqs[f] * nodes.t[q];
            mo.c[f].noalias() += (nodes.w[q] * std::cos(arg)) * nodes.b[q];
            mo.s[f].noalias() += (nodes.w[q] * std::sin(arg)) * nodes.b[q];
        }
    }
    return mo;
}

double max_change(const Moments& a, const Moments& b)
{
    double d = 0.0;
    for (std::size_t f = 0; f < a.c.size(); ++f) {
        d = std::max(d, (a.c[f] - b.c[f]).cwiseAbs().maxCoeff());
        d = std::max(d, (a.s[f] - b.s[f]).cwiseAbs().maxCoeff());
    }
    return d;
}

} // namespace

FormPair assemble_forms(const TruncationSpace& space, const CoefficientPath& b_unit, const QuadratureOptions& quad)
{
    if (b_unit.n() != space.n) throw InputError("assemble_forms: dimension mismatch");
    const int n = space.n, m = space.m, dim = 2 * n;
    const bool periodic = space.kind == SpaceKind::periodic_omega;

    // frequency table: index q in [0, 2m] for differences, [0, 4m] for sums (L0 kinds only)
    std::vector<double> freqs;
    const double step = periodic ? 2 * pi : pi;
    for (int q = 0; q <= 2 * m; ++q) freqs.push_back(step * q);
    if (!periodic)
        for (int q = -2 * m; q <= 2 * m; ++q) freqs.push_back(2 * space.theta + pi * q);
    double fmax = 0.0;
    for (double f : freqs) fmax = std::max(fmax, std::abs(f));

    int panels = std::max(4, static_cast<int>(std::ceil(fmax / pi)) + 2);
    Nodes nodes = make_nodes(b_unit, panels);
    Moments cur = moments(nodes, freqs, dim);
    double change = 0.0;
    double bscale = 1.0;
    for (const Mat& v : nodes.b) bscale = std::max(bscale, v.cwiseAbs().maxCoeff());
    for (int it = 0;; ++it) {
        Nodes finer = make_nodes(b_unit, 2 * panels);
        Moments next = moments(finer, freqs, dim);
        change = max_change(cur, next);
        panels *= 2;
        cur = std::move(next);
        if (change <= quad.tol * bscale) break;
        if (it + 1 >= quad.max_doublings) {
            std::ostringstream os;
            os << "assemble_forms: quadrature change " << change << " after " << panels << " panels";
            throw NumericalError(os.str());
        }
    }

    const std::vector<int> js = space.modes();
    const int blk = space.block();
    const int total = space.dimension();
    FormPair fp;
    fp.real = !periodic;
    fp.panels = panels;
    fp.quad_change = change;
    fp.a = CMat::Zero(total, total);
    fp.b = CMat::Zero(total, total);
    const Mat jm = standard_j(n);

    auto diff_moment = [&](int q, bool sine) -> Mat {
        const Mat& v = sine ? cur.s[std::abs(q)] : cur.c[std::abs(q)];
        return (sine && q < 0) ? Mat(-v) : v;
    };

    for (std::size_t col = 0; col < js.size(); ++col) {
        const int j = js[col];
        const double nu = space.frequency(j);
        if (periodic) {
            fp.a.block(col * blk, col * blk, blk, blk) = cplx(0.0, -nu) * jm.cast<cplx>();
        } else {
            fp.a.block(col * blk, col * blk, blk, blk) = nu * CMat::Identity(blk, blk);
        }
        for (std::size_t row = 0; row < js.size(); ++row) {
            const int l = js[row];
            const int dq = j - l;
            if (periodic) {
                const CMat v = diff_moment(dq, false).cast<cplx>() + cplx(0.0, 1.0) * diff_moment(dq, true).cast<cplx>();
                fp.b.block(row * blk, col * blk, blk, blk) = v;
            } else {
                const Mat cd = diff_moment(dq, false), sd = diff_moment(dq, true);
                const std::size_t sidx = 2 * m + 1 + static_cast<std::size_t>(j + l + 2 * m);
                const Mat& cs = cur.c[sidx];
                const Mat& ss = cur.s[sidx];
                const Mat x = 0.5 * (cd + cs) + 0.5 * (ss + sd) * jm - 0.5 * jm * (ss - sd) - 0.5 * jm * (cd - cs) * jm;
                fp.b.block(row * blk, col * blk, blk, blk) = x.bottomRightCorner(n, n).cast<cplx>();
            }
        }
    }
    fp.b = 0.5 * (fp.b + fp.b.adjoint()).eval();
    return fp;
}

Vec hermitian_eigenvalues(const CMat& h, bool real)
{
    if (real) {
        Eigen::SelfAdjointEigenSolver<Mat> es(h.real(), Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

MorseCounts d_morse(const Vec& ev, double d)
{
    MorseCounts c;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const double x = ev(i);
        if (x < -d) ++c.negative;
        else if (x > d) ++c.positive;
        else ++c.null;
        if (std::abs(std::abs(x) - d) < 0.1 * d) c.hazard = true;
    }
    return c;
}

int geometric_nullity(const Mat& mono, SpaceKind kind, double theta, double tol)
{
    switch (kind) {
    case SpaceKind::l0_fourier: return l0_nullity(mono, tol).nullity;
    case SpaceKind::l0_omega: return l0_nullity(exp_tj(static_cast<int>(mono.rows() / 2), -theta) * mono, tol).nullity;
    case SpaceKind::periodic_omega: return omega_nullity(mono, std::polar(1.0, theta), tol);
    }
    return 0;
}

void to_json(nlohmann::json& j, const RelativeIndexResult& r)
{
    nlohmann::json h = nlohmann::json::array();
    for (const auto& l : r.history)
        h.push_back({{"m", l.m}, {"minus_ab", l.minus_ab}, {"minus_a", l.minus_a}, {"null_ab", l.null_ab}});
    j = {{"kind", space_kind_name(r.kind)},
         {"theta", r.theta},
         {"value", r.value},
         {"nullity", r.nullity},
         {"geometric_nullity", r.geometric_nullity},
         {"d", r.d},
         {"m_star", r.m_star},
         {"m_top", r.m_top},
         {"hazard", r.hazard},
         {"nearest_eigenvalue", r.nearest_eigenvalue},
         {"history", h}};
}

namespace {

int a_minus_count(const TruncationSpace& sp, int m, double d)
{
    int count = 0;
    for (int j = -m; j <= m; ++j) {
        const double nu = sp.frequency(j);
        if (sp.kind == SpaceKind::periodic_omega) {
            // eigenvalues +-nu, each n times
            if (nu < -d) count += sp.n;
            if (-nu < -d) count += sp.n;
        } else if (nu < -d) {
            count += sp.n;
        }
    }
    return count;
}

double a_gap(const TruncationSpace& sp)
{
    double g = 1e300;
    for (int j = -sp.m; j <= sp.m; ++j) {
        const double nu = std::abs(sp.frequency(j));
        if (nu > 1e-12) g = std::min(g, nu);
    }
    return g;
}

// signed eigenvalue nearest zero after removing the nu smallest in modulus
double nearest_beyond_kernel(const Vec& ev, int nu, double* kernel_edge)
{
    std::vector<double> v(ev.data(), ev.data() + ev.size());
    std::sort(v.begin(), v.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (kernel_edge) *kernel_edge = nu > 0 ? std::abs(v[nu - 1]) : 0.0;
    return static_cast<std::size_t>(nu) < v.size() ? v[nu] : 1e300;
}

} // namespace

RelativeIndexResult relative_index(const CoefficientPath& b, double length, SpaceKind kind, double theta,
                                   const RelativeIndexPolicy& policy)
{
    const int n = b.n();
    const CoefficientPath bu = b.rescaled(length);
    const Mat mono = monodromy(bu, 1.0, policy.integ);

    RelativeIndexResult res;
    res.kind = kind;
    res.theta = theta;
    res.geometric_nullity = geometric_nullity(mono, kind, theta, policy.kernel_tol);
    const int nu = res.geometric_nullity;

    double bnorm = 0.0;
    for (int i = 0; i <= 64; ++i) bnorm = std::max(bnorm, bu(i / 64.0).norm());
    const double spacing = kind == SpaceKind::periodic_omega ? 2 * pi : pi;
    int m_top = policy.m_start > 0 ? policy.m_start
                                   : std::clamp(static_cast<int>(std::ceil(2.0 * bnorm / spacing)) + 6, 8, policy.m_max);
    m_top = std::min(m_top, policy.m_max);

    for (;;) {
        const TruncationSpace sp = build_truncation(kind, theta, m_top, n);
        const FormPair fp = assemble_forms(sp, bu, policy.quad);
        const CMat diff = fp.a - fp.b;
        const int blk = sp.block();

        auto level_eigs = [&](int m) {
            const int dim = (2 * m + 1) * blk;
            return hermitian_eigenvalues(diff.topLeftCorner(dim, dim), fp.real);
        };

        const Vec top = level_eigs(m_top);
        double kernel_edge = 0.0;
        const double mu = nearest_beyond_kernel(top, nu, &kernel_edge);
        const double d = 0.25 * std::min(std::abs(mu), a_gap(sp));

        // walk down from the top level until the relative count changes
        res.history.clear();
        res.hazard = false;
        double mu_prev = mu;
        int run = 0;
        int top_rel = 0;
        for (int m = m_top; m >= 1; --m) {
            const Vec ev = m == m_top ? top : level_eigs(m);
            const MorseCounts c = d_morse(ev, d);
            const LevelCount lc{m, c.negative, a_minus_count(sp, m, d), c.null};
            res.history.insert(res.history.begin(), lc);
            if (m == m_top) {
                res.hazard = c.hazard;
                top_rel = lc.minus_ab - lc.minus_a;
            }
            if (m == m_top - 2) mu_prev = nearest_beyond_kernel(ev, nu, nullptr);
            if (lc.minus_ab - lc.minus_a != top_rel) break;
            ++run;
        }
        const MorseCounts topc = d_morse(top, d);
        const bool stable = run >= policy.window;
        // a nearly-zero eigenvalue whose sign may still change under refinement
        const bool sentinel_ok = std::abs(mu) > m_top * std::abs(mu - mu_prev);
        const bool kernel_ok = kernel_edge <= 0.5 * d;

        if ((stable && sentinel_ok && kernel_ok) || m_top >= policy.m_max) {
            if (!stable) {
                std::ostringstream os;
                os << "relative_index: counts did not stabilize up to m=" << m_top;
                throw NumericalError(os.str());
            }
            res.value = top_rel;
            res.m_star = m_top - run + 1;
            res.m_top = m_top;
            res.d = d;
            res.nullity = topc.null;
            res.nearest_eigenvalue = mu;
            res.hazard = res.hazard || !sentinel_ok || !kernel_ok;
            return res;
        }
        m_top = std::min(2 * m_top, policy.m_max);
    }
}

IndexPair index_l0_galerkin(const CoefficientPath& b, double length, const RelativeIndexPolicy& policy)
{
    const auto r = relative_index(b, length, SpaceKind::l0_fourier, 0.0, policy);
    IndexPair p;
    p.index = r.value - b.n();
    p.nullity = r.geometric_nullity;
    p.flavor = "L0";
    p.provenance = {{"method", "galerkin"}, {"relative", r}};
    return p;
}

IndexPair index_l0_omega(const CoefficientPath& b, double length, double theta, const RelativeIndexPolicy& policy)
{
    const auto r = relative_index(b, length, SpaceKind::l0_omega, theta, policy);
    IndexPair p;
    p.index = r.value;
    p.nullity = r.geometric_nullity;
    p.flavor = "L0-omega";
    p.provenance = {{"method", "galerkin"}, {"theta", theta}, {"relative", r}};
    return p;
}

IndexPair index_omega(const CoefficientPath& b, double length, double theta, const RelativeIndexPolicy& policy)
{
    theta = std::fmod(theta, 2 * pi);
    if (theta < 0) theta += 2 * pi;
    const auto r = relative_index(b, length, SpaceKind::periodic_omega, theta, policy);
    IndexPair p;
    p.index = theta == 0.0 ? r.value - b.n() : r.value;
    p.nullity = r.geometric_nullity;
    p.flavor = "omega";
    p.provenance = {{"method", "galerkin"}, {"theta", theta}, {"relative", r}};
    return p;
}

std::vector<ScanPoint> index_function_scan(const CoefficientPath& b, double length, const std::vector<double>& thetas,
                                           const RelativeIndexPolicy& policy)
{
    std::vector<ScanPoint> out;
    for (double th : thetas) {
        const auto r = relative_index(b, length, SpaceKind::l0_omega, th, policy);
        out.push_back({th, r.value, r.geometric_nullity});
    }
    return out;
}

std::vector<std::pair<double, int>> l0_omega_crossings(const Mat& mono)
{
    const int n = static_cast<int>(mono.rows() / 2);
    const Blocks bl = blocks_of(mono);
    const CMat u = bl.u.cast<cplx>(), v = bl.v.cast<cplx>();
    const CMat q = (u - cplx(0, 1) * v) * (u + cplx(0, 1) * v).inverse();
    Eigen::ComplexEigenSolver<CMat> es(q);
    std::vector<double> th;
    for (int i = 0; i < n; ++i) {
        double a = std::arg(es.eigenvalues()(i));
        if (a < 0) a += 2 * pi;
        double t = 0.5 * a;
        if (t >= pi - 1e-12) t = 0.0;
        th.push_back(t);
    }
    std::sort(th.begin(), th.end());
    std::vector<std::pair<double, int>> out;
    for (double t : th) {
        if (!out.empty() && std::abs(out.back().first - t) < 1e-7) ++out.back().second;
        else out.push_back({t, 1});
    }
    return out;
}

} // namespace maslov
