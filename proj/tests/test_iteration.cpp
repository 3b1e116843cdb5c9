#include "doctest.h"
#include "maslov/iteration.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace maslov;

namespace {

// B(t) = phi I + R(phi t) B0 R(phi t)^T has gamma(t) = exp(t phi J) exp(t J B0).
CoefficientPath rotating_frame(double phi, const Mat& b0)
{
    const int n = static_cast<int>(b0.rows() / 2);
    return CoefficientPath(n, [phi, b0, n](double t) {
        const Mat r = exp_tj(n, phi * t);
        return Mat(phi * Mat::Identity(2 * n, 2 * n) + r * b0 * r.transpose());
    });
}

Mat diag2(double a, double b)
{
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

} // namespace

TEST_CASE("assembled iterates agree with direct integration")
{
    IntegratorOptions opt;
    opt.steps_per_unit = 512;
    for (unsigned seed : {1u, 2u, 3u}) {
        const auto b = oracle::random_brake_path(1 + seed % 3, 3.0, seed);
        const auto base = integrate_fundamental(b, 1.0, opt);
        for (int k = 1; k <= 6; ++k) {
            const auto ip = iterate_path(base, k);
            const auto direct = integrate_fundamental(b, k, opt);
            REQUIRE(ip.full.size() == direct.size());
            double worst = 0.0;
            for (std::size_t i = 0; i < direct.size(); ++i)
                worst = std::max(worst, (ip.full.frames[i] - direct.frames[i]).cwiseAbs().maxCoeff() /
                                            std::max(1.0, direct.frames[i].cwiseAbs().maxCoeff()));
            CHECK(worst < 1e-8);
            CHECK(ip.junction_mismatch < 1e-10);
        }
    }
}

TEST_CASE("root angles reduce the fraction")
{
    CHECK(root_angle(4, 2) == root_angle(2, 1));
    CHECK(root_angle(6, 2) == root_angle(3, 1));
    CHECK(root_angle(5, 1) == doctest::Approx(2 * pi / 5));
}

TEST_CASE("splitting numbers of the basic normal forms")
{
    const std::vector<double> ladder{1e-2, 1e-3, 1e-4};
    SUBCASE("N1(1, b) at 1")
    {
        for (double b : {1.0, 0.0, -1.0}) {
            const auto path = CoefficientPath::constant(diag2(0.0, -b));
            CHECK((monodromy(path, 1.0) - n1(1.0, b)).cwiseAbs().maxCoeff() < 1e-9);
            const auto s = splitting_numbers(path, 1.0, 0.0, ladder);
            const int expect = b >= 0 ? 1 : 0;
            CHECK(s.plus == expect);
            CHECK(s.minus == expect);
        }
    }
    SUBCASE("N1(-1, b) at -1")
    {
        for (double b : {-1.0, 0.0, 1.0}) {
            const auto path = rotating_frame(pi, diag2(0.0, b));
            CHECK((monodromy(path, 1.0) - n1(-1.0, b)).cwiseAbs().maxCoeff() < 1e-9);
            const auto s = splitting_numbers(path, 1.0, pi, ladder);
            const int expect = b <= 0 ? 1 : 0;
            CHECK(s.plus == expect);
            CHECK(s.minus == expect);
        }
    }
    SUBCASE("rotation at exp(i theta)")
    {
        for (double th : {0.7, 2.0, 4.0, 5.5}) {
            const auto path = CoefficientPath::constant(th * Mat::Identity(2, 2));
            const auto s = splitting_numbers(path, 1.0, th, ladder);
            CHECK(s.nullity == 1);
            CHECK(s.plus == 0);
            CHECK(s.minus == 1);
        }
    }
    SUBCASE("hyperbolic")
    {
        Mat b0 = Mat::Zero(2, 2);
        b0(0, 1) = b0(1, 0) = 0.8;
        const auto path = CoefficientPath::constant(b0);
        for (double th : {0.0, 1.0, pi, 5.0}) {
            const auto s = splitting_numbers(path, 1.0, th, ladder);
            CHECK(s.plus == 0);
            CHECK(s.minus == 0);
        }
    }
}

TEST_CASE("splitting numbers match the jump of the index function")
{
    const auto b = oracle::random_brake_path(2, 6.0, 41);
    const Mat m = monodromy(b, 1.0);
    for (const auto& u : unit_spectrum(m).unit) {
        const double th = std::arg(u.lambda) < 0 ? std::arg(u.lambda) + 2 * pi : std::arg(u.lambda);
        const auto s = splitting_numbers(b, 1.0, th);
        const int jump = index_omega(b, 1.0, th + 1e-4).index - index_omega(b, 1.0, th - 1e-4).index;
        CHECK(jump == s.plus - s.minus);
        CHECK(s.plus + s.minus <= 2 * s.nullity);
    }
}

TEST_CASE("Bott-type formula on random brake systems")
{
    for (unsigned seed = 300; seed < 306; ++seed) {
        IterationAnalysis a(oracle::random_brake_path(1 + seed % 2, 2.0 + seed % 3, seed));
        for (int k = 1; k <= 5; ++k) {
            const auto r = bott_l0_check(a, k);
            CHECK_MESSAGE(r.index_equal, nlohmann::json(r).dump());
            CHECK(r.nullity_equal);
            CHECK(bott_nullity_check(a, k).equal);
        }
    }
}

TEST_CASE("Bott-type formula on degenerate systems")
{
    IterationAnalysis zero(CoefficientPath::constant(Mat::Zero(2, 2)));
    IterationAnalysis third(CoefficientPath::constant(pi / 3 * Mat::Identity(2, 2)));
    for (int k = 1; k <= 6; ++k) {
        CHECK(bott_l0_check(zero, k).ok());
        CHECK(bott_l0_check(third, k).ok());
        CHECK(bott_nullity_check(zero, k).equal);
        CHECK(bott_nullity_check(third, k).equal);
    }
    CHECK(bott_nullity_check(third, 3).lhs == 2);
}

TEST_CASE("nullity of long iterates of a strongly hyperbolic system")
{
    // gamma(2) has eigenvalues exp(+-6), so gamma(12) is of size 1e15
    IterationAnalysis a(CoefficientPath::constant(diag2(3.0, -3.0)));
    for (int k = 1; k <= 6; ++k) {
        CHECK(a.nu1_iterated_periodic(k) == 0);
        CHECK(bott_nullity_check(a, k).equal);
        CHECK(bott_l0_check(a, k).ok());
    }
}

TEST_CASE("iteration inequality")
{
    for (unsigned seed = 400; seed < 404; ++seed) {
        IterationAnalysis a(oracle::random_brake_path(1 + seed % 3, 3.0, seed));
        for (int k = 2; k <= 6; ++k) {
            const auto r = iteration_inequality_check(a, k);
            CHECK_MESSAGE(r.holds, nlohmann::json(r).dump());
            CHECK(r.omega_bounds_hold);
        }
    }
    IterationAnalysis zero(CoefficientPath::constant(Mat::Zero(4, 4)));
    for (int k = 2; k <= 4; ++k) {
        const auto r = iteration_inequality_check(zero, k);
        CHECK(r.holds);
        CHECK(r.verdict.identity);
    }
}

TEST_CASE("equality case classifier")
{
    auto v = equality_case_classify(Mat::Identity(4, 4));
    CHECK(v.identity);
    CHECK(v.left_candidate);
    CHECK(v.right_candidate);
    CHECK(v.p == 2);

    v = equality_case_classify(diamond(rotation(0.5), rotation(0.5)), 4);
    CHECK(v.left_candidate);
    CHECK_FALSE(v.right_candidate);
    CHECK(equality_case_classify(diamond(rotation(0.5), rotation(0.5)), 20).verdict == "generic");

    v = equality_case_classify(diamond(n1(1.0, 1.0), Mat::Identity(2, 2)));
    CHECK(v.right_candidate);
    CHECK(v.r == 1);
    CHECK(v.p == 1);

    v = equality_case_classify(diamond(n1(1.0, -1.0), rotation(0.3)), 8);
    CHECK(v.left_candidate);
    CHECK(v.q == 1);

    Mat hyp = Mat::Zero(2, 2);
    hyp(0, 0) = 2.0;
    hyp(1, 1) = 0.5;
    CHECK(equality_case_classify(hyp).verdict == "generic");
}
