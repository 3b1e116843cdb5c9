#include "doctest.h"
#include "maslov/symplectic.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace maslov;

TEST_CASE("standard matrices are symplectic and consistent")
{
    for (int n = 1; n <= 4; ++n) {
        const auto s = standard_matrices(n);
        CHECK(symplectic_defect(s.m_plus) < 1e-15);
        CHECK(symplectic_defect(s.m_minus) < 1e-15);
        CHECK((s.j * s.j + Mat::Identity(2 * n, 2 * n)).norm() < 1e-15);
        // N anti-commutes with J
        CHECK((s.n_refl * s.j + s.j * s.n_refl).norm() < 1e-15);
        CHECK((s.m_plus - oracle::expm(-pi / 2 * s.j)).norm() < 1e-12);
    }
}

TEST_CASE("diamond places blocks symplectically")
{
    const Mat a = rotation(0.3), b = n1(1.0, 2.0);
    const Mat d = diamond(a, b);
    CHECK(d.rows() == 4);
    CHECK(symplectic_defect(d) < 1e-14);
    CHECK(d(0, 2) == doctest::Approx(a(0, 1)));
    CHECK(d(1, 3) == doctest::Approx(b(0, 1)));
    CHECK(d(2, 0) == doctest::Approx(a(1, 0)));
    CHECK(d(0, 1) == 0.0);

    Mat bad(2, 2);
    bad << 2.0, 0.0, 0.0, 2.0;
    CHECK_THROWS_AS(diamond(a, bad), InputError);

    // diamond of exponentials is the exponential of the diamond generator
    Mat h1(2, 2), h2(2, 2);
    h1 << 1.0, 0.2, 0.2, 0.5;
    h2 << -0.3, 0.1, 0.1, 2.0;
    Mat h = Mat::Zero(4, 4);
    h(0, 0) = h1(0, 0); h(0, 2) = h1(0, 1); h(2, 0) = h1(1, 0); h(2, 2) = h1(1, 1);
    h(1, 1) = h2(0, 0); h(1, 3) = h2(0, 1); h(3, 1) = h2(1, 0); h(3, 3) = h2(1, 1);
    const Mat lhs = diamond(oracle::constant_flow(h1, 1.0), oracle::constant_flow(h2, 1.0));
    CHECK((lhs - oracle::constant_flow(h, 1.0)).norm() < 1e-12);
}

TEST_CASE("unit spectrum of normal forms")
{
    SUBCASE("N1(1,1) is a Jordan block at 1")
    {
        const auto sp = unit_spectrum(n1(1.0, 1.0));
        REQUIRE(sp.unit.size() == 1);
        CHECK(sp.unit[0].lambda == cplx(1.0, 0.0));
        CHECK(sp.unit[0].algebraic == 2);
        CHECK(sp.unit[0].geometric == 1);
    }
    SUBCASE("perturbed Jordan block still clusters")
    {
        Mat m = n1(1.0, 1.0);
        m(1, 0) = 1e-15;
        const auto sp = unit_spectrum(m);
        REQUIRE(sp.unit.size() == 1);
        CHECK(sp.unit[0].algebraic == 2);
    }
    SUBCASE("R(theta) diamond R(theta) is semisimple with negative Krein type")
    {
        const auto sp = unit_spectrum(diamond(rotation(0.7), rotation(0.7)));
        REQUIRE(sp.unit.size() == 2);
        for (const auto& u : sp.unit) {
            CHECK(u.algebraic == 2);
            CHECK(u.geometric == 2);
            if (u.lambda.imag() > 0) {
                CHECK(u.krein_p == 0);
                CHECK(u.krein_q == 2);
            }
        }
    }
    SUBCASE("hyperbolic matrix has no unit spectrum")
    {
        Mat m = Mat::Zero(2, 2);
        m(0, 0) = 2.0;
        m(1, 1) = 0.5;
        const auto sp = unit_spectrum(m);
        CHECK(sp.unit.empty());
        CHECK(sp.off_circle.size() == 2);
    }
}

TEST_CASE("Krein signature of rotations")
{
    const double th = 1.1;
    CHECK(krein_signature(rotation(th), std::polar(1.0, th)) == std::pair<int, int>{0, 1});
    CHECK(krein_signature(rotation(-th), std::polar(1.0, th)) == std::pair<int, int>{1, 0});
    const Mat mixed = diamond(rotation(th), rotation(-th));
    CHECK(krein_signature(mixed, std::polar(1.0, th)) == std::pair<int, int>{1, 1});
}

TEST_CASE("omega nullity")
{
    CHECK(omega_nullity(Mat::Identity(4, 4), 1.0) == 4);
    CHECK(omega_nullity(rotation(0.5), std::polar(1.0, 0.5)) == 1);
    CHECK(omega_nullity(rotation(0.5), std::polar(1.0, 0.6)) == 0);
}

TEST_CASE("integrator reproduces closed forms")
{
    SUBCASE("B = I gives exp(tJ)")
    {
        const auto path = integrate_fundamental(CoefficientPath::constant(Mat::Identity(4, 4)), 2 * pi);
        for (std::size_t i = 0; i < path.size(); i += 997)
            CHECK((path.frames[i] - exp_tj(2, path.grid[i])).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((path.endpoint() - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(path.max_defect() < 1e-10);
    }
    SUBCASE("constant B matches the matrix exponential")
    {
        Mat b(4, 4);
        b << 2.0, 0.3, 0.1, 0.0, 0.3, -1.0, 0.0, 0.4, 0.1, 0.0, 0.5, 0.2, 0.0, 0.4, 0.2, 1.5;
        const Mat m = monodromy(CoefficientPath::constant(b), 3.0);
        CHECK((m - oracle::constant_flow(b, 3.0)).cwiseAbs().maxCoeff() < 1e-10 * m.cwiseAbs().maxCoeff());
    }
    SUBCASE("implicit midpoint is second order")
    {
        Mat b(2, 2);
        b << 1.0, 0.5, 0.5, 2.0;
        const Mat exact = oracle::constant_flow(b, 1.0);
        IntegratorOptions o;
        o.stages = 1;
        o.steps_per_unit = 64;
        const double e1 = (monodromy(CoefficientPath::constant(b), 1.0, o) - exact).norm();
        o.steps_per_unit = 128;
        const double e2 = (monodromy(CoefficientPath::constant(b), 1.0, o) - exact).norm();
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
    }
    SUBCASE("time-dependent B: rotating-frame closed form")
    {
        // B(t) = phi I + R_t B0 R_t^T with R_t = exp(t phi J) has flow R_t exp(t J B0)
        const double phi = 0.8;
        Mat b0(2, 2);
        b0 << 0.0, 0.7, 0.7, 0.0;
        CoefficientPath p(1, [&](double t) {
            const Mat r = exp_tj(1, t * phi);
            return Mat(phi * Mat::Identity(2, 2) + r * b0 * r.transpose());
        });
        const Mat m = monodromy(p, 1.0);
        const Mat expected = exp_tj(1, phi) * oracle::constant_flow(b0, 1.0);
        CHECK((m - expected).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("brake symmetry check")
{
    Mat c = Mat::Zero(2, 2);
    c(0, 0) = 1.0;
    c(1, 1) = 3.0;
    const auto even = CoefficientPath::fourier(Mat::Zero(2, 2), {c}, {});
    CHECK(even.brake_symmetric());
    CHECK(check_brake_symmetry(even).ok(1e-13));
    const auto odd = CoefficientPath::fourier(Mat::Zero(2, 2), {}, {c});
    CHECK_FALSE(odd.brake_symmetric());
    CHECK(check_brake_symmetry(odd).reflection > 0.1);
    Mat e = Mat::Zero(2, 2);
    e(0, 1) = e(1, 0) = 1.0;
    CHECK(CoefficientPath::fourier(Mat::Zero(2, 2), {}, {e}).brake_symmetric());
}

TEST_CASE("brake-symmetric fundamental solution satisfies the reflection identity")
{
    // gamma(2 - t) = N gamma(t) gamma(1)^{-1} N gamma(1) style identity, checked at t = 2
    Mat c = Mat::Zero(4, 4);
    c << 1.0, 0.2, 0, 0, 0.2, 0.5, 0, 0, 0, 0, -0.3, 0.1, 0, 0, 0.1, 0.9;
    Mat e = Mat::Zero(4, 4);
    e.topRightCorner(2, 2) << 0.4, 0.1, 0.3, -0.2;
    e.bottomLeftCorner(2, 2) = e.topRightCorner(2, 2).transpose();
    const auto p = CoefficientPath::fourier(c, {c}, {e});
    REQUIRE(p.brake_symmetric());
    const auto path = integrate_fundamental(p, 2.0);
    const Mat g1 = path.at(1.0);
    const Mat nr = reflection_n(2);
    CHECK((path.endpoint() - nr * g1.inverse() * nr * g1).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("rescaling preserves the fundamental solution endpoint")
{
    Mat b(2, 2);
    b << 0.4, 0.1, 0.1, 1.3;
    const auto p = CoefficientPath::fourier(b, {b}, {});
    const Mat full = monodromy(p, 2.0);
    const Mat scaled = monodromy(p.rescaled(2.0), 1.0);
    CHECK((full - scaled).cwiseAbs().maxCoeff() < 1e-11);
}
