#include "doctest.h"
#include "maslov/galerkin.hpp"
#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

using namespace maslov;

namespace {

// Brute-force form entry <B phi_col, phi_row> by adaptive quadrature of the basis functions.
CMat brute_force_b(const TruncationSpace& sp, const CoefficientPath& b)
{
    const int n = sp.n, blk = sp.block();
    const auto js = sp.modes();
    const Mat jm = oracle::jmat(n);
    auto basis = [&](int j, int a, double t) -> CVec {
        const double nu = sp.frequency(j);
        CVec v = CVec::Zero(2 * n);
        if (sp.kind == SpaceKind::periodic_omega) {
            v(a) = std::polar(1.0, nu * t);
        } else {
            Vec e = Vec::Zero(2 * n);
            e(n + a) = 1.0;
            v = (oracle::expm(nu * t * jm) * e).cast<cplx>();
        }
        return v;
    };
    CMat out(sp.dimension(), sp.dimension());
    for (std::size_t c = 0; c < js.size(); ++c)
        for (int a = 0; a < blk; ++a)
            for (std::size_t r = 0; r < js.size(); ++r)
                for (int bb = 0; bb < blk; ++bb) {
                    auto re = [&](double t) { return (basis(js[r], bb, t).adjoint() * b(t).cast<cplx>() * basis(js[c], a, t))(0, 0).real(); };
                    auto im = [&](double t) { return (basis(js[r], bb, t).adjoint() * b(t).cast<cplx>() * basis(js[c], a, t))(0, 0).imag(); };
                    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
                    out(r * blk + bb, c * blk + a) = cplx(GK::integrate(re, 0.0, 1.0, 8, 1e-13), GK::integrate(im, 0.0, 1.0, 8, 1e-13));
                }
    return out;
}

} // namespace

TEST_CASE("form assembly matches brute-force integration of the basis")
{
    const auto b = oracle::random_brake_path(2, 3.0, 7);
    const auto bu = b.rescaled(1.0, 0.2); // not brake symmetric on [0, 1]
    for (auto kind : {SpaceKind::l0_fourier, SpaceKind::l0_omega, SpaceKind::periodic_omega}) {
        const double theta = kind == SpaceKind::l0_fourier ? 0.0 : 0.9;
        const auto sp = build_truncation(kind, theta, 2, 2);
        const auto fp = assemble_forms(sp, bu);
        CHECK((fp.b - brute_force_b(sp, bu)).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((fp.a - fp.a.adjoint()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(fp.real == (kind != SpaceKind::periodic_omega));
    }
}

TEST_CASE("leading blocks are the smaller truncations")
{
    const auto b = oracle::random_brake_path(1, 2.0, 3);
    const auto big = assemble_forms(build_truncation(SpaceKind::l0_fourier, 0.0, 6, 1), b);
    const auto small = assemble_forms(build_truncation(SpaceKind::l0_fourier, 0.0, 3, 1), b);
    CHECK((big.b.topLeftCorner(7, 7) - small.b).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((big.a.topLeftCorner(7, 7) - small.a).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("d-Morse counts")
{
    Vec ev(5);
    ev << -2.0, -0.01, 0.0, 0.5, 3.0;
    auto c = d_morse(ev, 0.1);
    CHECK(c.negative == 1);
    CHECK(c.null == 2);
    CHECK(c.positive == 2);
    CHECK_FALSE(c.hazard);
    CHECK(d_morse(ev, 0.0105).hazard);
}

TEST_CASE("Galerkin L0 index equals the winding L0 index")
{
    int checked = 0;
    for (unsigned seed = 100; seed < 130; ++seed) {
        const int n = 1 + static_cast<int>(seed % 3);
        const double scale = 0.5 + (seed % 4) * 2.5;
        const auto b = oracle::random_brake_path(n, scale, seed);
        const auto w = l0_index_of(b, 1.0);
        const auto g = index_l0_galerkin(b, 1.0);
        CHECK(w.index == g.index);
        CHECK(w.nullity == g.nullity);
        ++checked;
    }
    CHECK(checked == 30);
}

TEST_CASE("Galerkin L0 index on non-symmetric paths and longer intervals")
{
    for (unsigned seed = 200; seed < 210; ++seed) {
        const auto b = oracle::random_brake_path(1 + seed % 2, 3.0, seed).rescaled(1.0, 0.37);
        CHECK(l0_index_of(b, 1.0).index == index_l0_galerkin(b, 1.0).index);
    }
    const auto rot = CoefficientPath::constant(Mat::Identity(2, 2));
    CHECK(index_l0_galerkin(rot, 4.0).index == 1);
    CHECK(index_l0_galerkin(rot, 7.0).index == 2);
}

TEST_CASE("periodic omega index calibration on B = eps I")
{
    const double eps = 0.05;
    for (int n = 1; n <= 2; ++n) {
        const auto b = CoefficientPath::constant(eps * Mat::Identity(2 * n, 2 * n));
        CHECK(index_omega(b, 1.0, 0.0).index == n);
        CHECK(index_omega(b, 1.0, 0.5 * eps).index == n);
        CHECK(index_omega(b, 1.0, 2 * pi - 0.5 * eps).index == n);
        CHECK(index_omega(b, 1.0, 1.0).index == 0);
        const auto zero = CoefficientPath::constant(Mat::Zero(2 * n, 2 * n));
        const auto i1 = index_omega(zero, 1.0, 0.0);
        CHECK(i1.index == -n);
        CHECK(i1.nullity == 2 * n);
    }
}

TEST_CASE("relative index is invariant under truncation refinement")
{
    const auto b = oracle::random_brake_path(2, 4.0, 11);
    const auto r = relative_index(b, 1.0, SpaceKind::l0_fourier, 0.0);
    const auto bu = b.rescaled(1.0);
    const auto fp = assemble_forms(build_truncation(SpaceKind::l0_fourier, 0.0, 2 * r.m_star, 2), bu);
    for (int m = r.m_star; m <= 2 * r.m_star; ++m) {
        const int dim = (2 * m + 1) * 2;
        const Vec ab = hermitian_eigenvalues(CMat(fp.a - fp.b).topLeftCorner(dim, dim), true);
        const Vec a = hermitian_eigenvalues(fp.a.topLeftCorner(dim, dim), true);
        CHECK(d_morse(ab, r.d).negative - d_morse(a, r.d).negative == r.value);
    }
}

TEST_CASE("L0-omega index function jumps only at crossings")
{
    for (unsigned seed : {21u, 22u, 23u}) {
        const auto b = oracle::random_brake_path(2, 5.0, seed);
        const Mat mono = monodromy(b, 1.0);
        const auto cross = l0_omega_crossings(mono);
        int total = 0;
        for (auto [t, mult] : cross) total += mult;
        CHECK(total == 2);
        // sample midpoints between consecutive crossings and compare with neighbours
        std::vector<double> cuts{0.0};
        for (auto [t, mult] : cross)
            if (t > 1e-6) cuts.push_back(t);
        cuts.push_back(pi);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double a = cuts[i] + 0.2 * (cuts[i + 1] - cuts[i]);
            const double c = cuts[i] + 0.8 * (cuts[i + 1] - cuts[i]);
            const auto ra = relative_index(b, 1.0, SpaceKind::l0_omega, a);
            const auto rc = relative_index(b, 1.0, SpaceKind::l0_omega, c);
            CHECK(ra.value == rc.value);
            CHECK(ra.geometric_nullity == 0);
            CHECK(ra.nullity == 0);
        }
        // nullity at a crossing matches the intersection dimension
        for (auto [t, mult] : cross) {
            const auto r = relative_index(b, 1.0, SpaceKind::l0_omega, t);
            CHECK(r.geometric_nullity == mult);
            CHECK(r.nullity == mult);
        }
        // endpoint relation with the L0 index
        const auto l0 = l0_index_of(b, 1.0);
        const auto near0 = relative_index(b, 1.0, SpaceKind::l0_omega, 0.5 * cuts[1]);
        CHECK(std::abs(l0.index + 2 - near0.value) <= l0.nullity);
    }
}
