#include "maslov/winding.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace maslov {

void to_json(nlohmann::json& j, const IndexPair& p)
{
    j = {{"flavor", p.flavor}, {"index", p.index}, {"nullity", p.nullity}, {"provenance", p.provenance}};
}

namespace {

cplx det_u_minus_iv(const Mat& m)
{
    const Blocks b = blocks_of(m);
    const CMat z = b.u.cast<cplx>() - cplx(0.0, 1.0) * b.v.cast<cplx>();
    return z.determinant();
}

double wrap(double a)
{
    a = std::fmod(a + pi, 2 * pi);
    if (a < 0) a += 2 * pi;
    return a - pi;
}

// Appends samples of f on (a, b], bisecting wherever the phase moves more than pi/4.
void sample_adaptive(const std::function<Mat(double)>& f, double a, double b, int initial,
                     SymplecticPath& out, double offset)
{
    std::function<void(double, const Mat&, double, const Mat&, int)> rec =
        [&](double s0, const Mat& m0, double s1, const Mat& m1, int depth) {
            const double step = wrap(std::arg(det_u_minus_iv(m1)) - std::arg(det_u_minus_iv(m0)));
            if (std::abs(step) > pi / 4 && depth < 30) {
                const double sm = 0.5 * (s0 + s1);
                const Mat mm = f(sm);
                rec(s0, m0, sm, mm, depth + 1);
                rec(sm, mm, s1, m1, depth + 1);
                return;
            }
            out.grid.push_back(offset + s1);
            out.frames.push_back(m1);
        };
    Mat prev = f(a);
    for (int k = 1; k <= initial; ++k) {
        const double s = a + (b - a) * k / initial;
        Mat cur = f(s);
        rec(a + (b - a) * (k - 1) / initial, prev, s, cur, 0);
        prev = std::move(cur);
    }
}

Mat lower_unit(const Mat& x)
{
    const Eigen::Index n = x.rows();
    Mat l = Mat::Identity(2 * n, 2 * n);
    l.bottomLeftCorner(n, n) = x;
    return l;
}

Mat antidiag_frame(const Mat& v)
{
    const Eigen::Index n = v.rows();
    Mat k = Mat::Zero(2 * n, 2 * n);
    k.topRightCorner(n, n) = v;
    k.bottomLeftCorner(n, n) = -v.inverse().transpose();
    return k;
}

// Contraction of an orthogonal matrix with det +1 to the identity, sigma in [0, 1].
using OrthoContraction = std::function<Mat(double)>;

OrthoContraction schur_contraction(const Mat& q)
{
    const Eigen::Index n = q.rows();
    Eigen::RealSchur<Mat> schur(q);
    const Mat z = schur.matrixU();
    const Mat t = schur.matrixT();
    // rotation planes (i, j) with angles
    std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> planes;
    std::vector<Eigen::Index> minus;
    for (Eigen::Index i = 0; i < n;) {
        if (i + 1 < n && std::abs(t(i + 1, i)) > 1e-14) {
            const double phi = std::atan2(0.5 * (t(i + 1, i) - t(i, i + 1)), 0.5 * (t(i, i) + t(i + 1, i + 1)));
            planes.emplace_back(i, i + 1, phi);
            i += 2;
        } else {
            if (t(i, i) < 0) minus.push_back(i);
            ++i;
        }
    }
    for (std::size_t k = 0; k + 1 < minus.size(); k += 2) planes.emplace_back(minus[k], minus[k + 1], pi);
    return [z, planes, n](double sigma) {
        Mat r = Mat::Identity(n, n);
        for (auto [i, j, phi] : planes) {
            const double a = (1.0 - sigma) * phi;
            r(i, i) = std::cos(a);
            r(j, j) = std::cos(a);
            r(i, j) = -std::sin(a);
            r(j, i) = std::sin(a);
        }
        return Mat(z * r * z.transpose());
    };
}

Mat givens(Eigen::Index n, Eigen::Index p, Eigen::Index q, double phi)
{
    Mat g = Mat::Identity(n, n);
    g(p, p) = std::cos(phi);
    g(q, q) = std::cos(phi);
    g(p, q) = -std::sin(phi);
    g(q, p) = std::sin(phi);
    return g;
}

OrthoContraction givens_contraction(const Mat& q)
{
    const Eigen::Index n = q.rows();
    Mat a = q;
    std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> rots;
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        for (Eigen::Index i = n - 1; i > j; --i) {
            const double phi = std::atan2(a(i, j), a(i - 1, j));
            a = givens(n, i - 1, i, phi).transpose() * a;
            rots.emplace_back(i - 1, i, phi);
        }
    }
    std::vector<Eigen::Index> minus;
    for (Eigen::Index i = 0; i < n; ++i)
        if (a(i, i) < 0) minus.push_back(i);
    for (std::size_t k = 0; k + 1 < minus.size(); k += 2) rots.emplace_back(minus[k], minus[k + 1], pi);
    return [rots, n](double sigma) {
        Mat r = Mat::Identity(n, n);
        for (auto [p, qq, phi] : rots) r = r * givens(n, p, qq, (1.0 - sigma) * phi);
        return r;
    };
}

} // namespace

RotationTrace rotation_trace(const SymplecticPath& path, double max_step)
{
    RotationTrace tr;
    tr.times = path.grid;
    tr.delta.reserve(path.size());
    tr.rho.reserve(path.size());
    double prev_arg = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const cplx d = det_u_minus_iv(path.frames[i]);
        const double a = std::arg(d);
        if (i == 0) {
            tr.delta.push_back(a);
        } else {
            const double step = wrap(a - prev_arg);
            if (std::abs(step) >= max_step) {
                std::ostringstream os;
                os << "rotation_trace: phase jump " << step << " at t=" << path.grid[i];
                throw NumericalError(os.str());
            }
            tr.delta.push_back(tr.delta.back() + step);
        }
        tr.rho.push_back(std::abs(d));
        prev_arg = a;
    }
    return tr;
}

NullityInfo l0_nullity(const Mat& m, double tol)
{
    const Blocks b = blocks_of(m);
    Eigen::JacobiSVD<Mat> svd(b.v);
    const Vec& s = svd.singularValues();
    const double cut = tol * std::max(1.0, m.cwiseAbs().maxCoeff());
    NullityInfo info;
    info.smallest_singular = s(s.size() - 1);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) <= cut) ++info.nullity;
        if (s(i) > cut / 10 && s(i) < cut * 10) info.borderline = true;
    }
    return info;
}

SymplecticPath beta_path(const Mat& m, BetaBranch branch)
{
    const int n = static_cast<int>(m.rows() / 2);
    const Blocks b = blocks_of(m);
    Eigen::FullPivLU<Mat> lu(b.v);
    if (!lu.isInvertible()) throw InputError("beta_path: endpoint is not in Sp*(2n)");
    const Mat vinv = lu.inverse();
    Mat x1 = b.u * vinv;
    Mat x2 = vinv * b.s;
    x1 = 0.5 * (x1 + x1.transpose()).eval();
    x2 = 0.5 * (x2 + x2.transpose()).eval();
    const Mat k = antidiag_frame(b.v);

    std::function<Mat(double)> stage1 = [=](double s) {
        return Mat(lower_unit((1.0 - s) * x1) * k * lower_unit((1.0 - s) * x2));
    };

    const Mat jn = standard_matrices(n).jn;
    const bool flip = b.v.determinant() < 0;
    std::function<Mat(double)> v_of;
    if (branch == BetaBranch::polar) {
        Eigen::JacobiSVD<Mat> svd(b.v, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Mat o = svd.matrixU() * svd.matrixV().transpose();
        const Mat zz = svd.matrixV();
        const Vec sig = svd.singularValues();
        const OrthoContraction rot = schur_contraction(flip ? Mat(o * jn) : o);
        v_of = [=](double s) {
            const Vec pw = sig.array().pow(1.0 - s).matrix();
            Mat oo = rot(s);
            if (flip) oo = oo * jn;
            return Mat(oo * zz * pw.asDiagonal() * zz.transpose());
        };
    } else {
        Eigen::HouseholderQR<Mat> qr(b.v);
        Mat q = qr.householderQ();
        Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int i = 0; i < n; ++i) {
            if (r(i, i) < 0) {
                r.row(i) *= -1.0;
                q.col(i) *= -1.0;
            }
        }
        const OrthoContraction rot = givens_contraction(flip ? Mat(q * jn) : q);
        v_of = [=](double s) {
            Mat oo = rot(s);
            if (flip) oo = oo * jn;
            return Mat(oo * ((1.0 - s) * r + s * Mat::Identity(n, n)));
        };
    }
    std::function<Mat(double)> stage2 = [=](double s) { return antidiag_frame(v_of(s)); };

    SymplecticPath p;
    p.n = n;
    p.grid.push_back(0.0);
    p.frames.push_back(stage1(0.0));
    sample_adaptive(stage1, 0.0, 1.0, 32, p, 0.0);
    sample_adaptive(stage2, 0.0, 1.0, 64, p, 1.0);
    return p;
}

SymplecticPath extend_and_join(const SymplecticPath& gamma, BetaBranch branch)
{
    const int n = gamma.n;
    SymplecticPath out;
    out.n = n;
    // pre-path exp(sJ), s = pi/2 -> 0, parametrized on [t0 - 1, t0]
    const double t0 = gamma.start();
    const Mat g0 = gamma.frames.front();
    std::function<Mat(double)> pre = [n, g0](double u) { return Mat(exp_tj(n, (1.0 - u) * pi / 2) * g0); };
    out.grid.push_back(t0 - 1.0);
    out.frames.push_back(pre(0.0));
    sample_adaptive(pre, 0.0, 1.0, 16, out, t0 - 1.0);
    out.grid.pop_back();
    out.frames.pop_back();
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        out.grid.push_back(gamma.grid[i]);
        out.frames.push_back(gamma.frames[i]);
    }
    const SymplecticPath beta = beta_path(gamma.endpoint(), branch);
    const double t1 = gamma.end();
    for (std::size_t i = 1; i < beta.size(); ++i) {
        out.grid.push_back(t1 + beta.grid[i]);
        out.frames.push_back(beta.frames[i]);
    }
    return out;
}

IndexPair l0_index_nondegenerate(const SymplecticPath& gamma, const WindingOptions& opt)
{
    const NullityInfo nu = l0_nullity(gamma.endpoint(), opt.rank_tol);
    if (nu.nullity != 0) throw InputError("l0_index_nondegenerate: endpoint has L0 nullity");
    const SymplecticPath joined = extend_and_join(gamma, opt.branch);
    const RotationTrace tr = rotation_trace(joined, opt.max_phase_step);
    const double raw = (tr.delta.back() - tr.delta.front()) / pi;
    const double rounded = std::round(raw);
    if (std::abs(raw - rounded) > 1e-3) {
        std::ostringstream os;
        os << "l0_index_nondegenerate: winding " << raw << " is not an integer";
        throw NumericalError(os.str());
    }
    IndexPair p;
    p.index = static_cast<int>(rounded);
    p.nullity = 0;
    p.flavor = "L0";
    p.provenance = {{"method", "winding"},
                    {"branch", opt.branch == BetaBranch::polar ? "polar" : "givens"},
                    {"samples", joined.size()},
                    {"residual", std::abs(raw - rounded)},
                    {"min_rho", *std::min_element(tr.rho.begin(), tr.rho.end())}};
    return p;
}

IndexPair l0_index(const SymplecticPath& gamma, const WindingOptions& opt)
{
    const NullityInfo nu = l0_nullity(gamma.endpoint(), opt.rank_tol);
    if (nu.nullity == 0) {
        IndexPair p = l0_index_nondegenerate(gamma, opt);
        p.provenance["borderline"] = nu.borderline;
        return p;
    }
    // degenerate: gamma(t) exp(+-eps t J), whose endpoint crossing form is definite
    const double t0 = gamma.start(), len = gamma.end() - gamma.start();
    std::vector<int> plus, minus;
    for (double eps : opt.epsilons) {
        for (int sign : {1, -1}) {
            SymplecticPath pert = gamma;
            for (std::size_t i = 0; i < pert.size(); ++i)
                pert.frames[i] = pert.frames[i] * exp_tj(gamma.n, sign * eps * (pert.grid[i] - t0) / len);
            const int idx = l0_index_nondegenerate(pert, opt).index;
            (sign > 0 ? plus : minus).push_back(idx);
        }
    }
    const std::size_t k = plus.size();
    if (k >= 2 && (plus[k - 1] != plus[k - 2] || minus[k - 1] != minus[k - 2]))
        throw NumericalError("l0_index: perturbed indices did not stabilize over the epsilon ladder");
    IndexPair p;
    p.index = std::min(plus.back(), minus.back());
    p.nullity = nu.nullity;
    p.flavor = "L0";
    p.provenance = {{"method", "winding-perturbed"},
                    {"epsilons", opt.epsilons},
                    {"plus", plus},
                    {"minus", minus},
                    {"spread", std::abs(plus.back() - minus.back())},
                    {"borderline", nu.borderline}};
    return p;
}

IndexPair l0_index_of(const CoefficientPath& b, double length, const WindingOptions& opt, IntegratorOptions integ)
{
    // the phase turns at most about n |B| per unit time; alias-free sampling needs several samples per radian
    double bmax = 0.0;
    for (int i = 0; i <= 64; ++i) bmax = std::max(bmax, b(length * i / 64.0).norm());
    integ.steps_per_unit = std::max(integ.steps_per_unit, static_cast<int>(std::ceil(8.0 * b.n() * bmax)));
    for (int attempt = 0;; ++attempt) {
        try {
            const SymplecticPath path = integrate_fundamental(b, length, integ);
            IndexPair p = l0_index(path, opt);
            p.provenance["steps_per_unit"] = integ.steps_per_unit;
            return p;
        } catch (const NumericalError& e) {
            if (attempt >= opt.refinements || std::string(e.what()).find("rotation_trace") == std::string::npos)
                throw;
            integ.steps_per_unit *= 2;
        }
    }
}

} // namespace maslov
