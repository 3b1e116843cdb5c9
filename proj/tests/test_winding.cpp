#include "doctest.h"
#include "maslov/winding.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace maslov;

namespace {

SymplecticPath sampled(int n, double t1, int samples, const std::function<Mat(double)>& f)
{
    SymplecticPath p;
    p.n = n;
    for (int i = 0; i <= samples; ++i) {
        const double t = t1 * i / samples;
        p.grid.push_back(t);
        p.frames.push_back(f(t));
    }
    return p;
}

} // namespace

TEST_CASE("rotation path R(t) on [0,T]")
{
    for (double t1 : {0.5, 2.5, 4.0, 7.0, 10.0}) {
        const auto p = sampled(1, t1, 400, [](double t) { return rotation(t); });
        const auto idx = l0_index(p);
        CHECK(idx.nullity == 0);
        CHECK(idx.index == static_cast<int>(std::floor(t1 / pi)));
        CHECK(idx.index == oracle::l0_index_closed_form(p));
    }
    // degenerate endpoint at T = pi: infimum over perturbations
    const auto p = sampled(1, pi, 400, [](double t) { return rotation(t); });
    const auto idx = l0_index(p);
    CHECK(idx.nullity == 1);
    CHECK(idx.index == 0);
}

TEST_CASE("constant identity path")
{
    for (int n = 1; n <= 3; ++n) {
        const auto p = sampled(n, 1.0, 10, [n](double) { return Mat(Mat::Identity(2 * n, 2 * n)); });
        const auto idx = l0_index(p);
        CHECK(idx.index == -n);
        CHECK(idx.nullity == n);
    }
}

TEST_CASE("small rotations exp(+-eps t J)")
{
    const double eps = 1e-3;
    const auto up = sampled(1, 1.0, 50, [eps](double t) { return exp_tj(1, eps * t); });
    const auto down = sampled(1, 1.0, 50, [eps](double t) { return exp_tj(1, -eps * t); });
    CHECK(l0_index(up).index == 0);
    CHECK(l0_index(down).index == -1);
}

TEST_CASE("beta path stays in Sp* and ends at M+ or M-")
{
    for (unsigned seed = 1; seed <= 6; ++seed) {
        const int n = 1 + static_cast<int>(seed % 3);
        const Mat m = monodromy(oracle::random_brake_path(n, 2.0, seed), 1.0);
        if (l0_nullity(m).nullity) continue;
        const auto sm = standard_matrices(n);
        for (auto branch : {BetaBranch::polar, BetaBranch::givens}) {
            const auto b = beta_path(m, branch);
            CHECK((b.frames.front() - m).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, m.cwiseAbs().maxCoeff()));
            const Mat& e = b.endpoint();
            const bool plus = (e - sm.m_plus).cwiseAbs().maxCoeff() < 1e-10;
            const bool minus = (e - sm.m_minus).cwiseAbs().maxCoeff() < 1e-10;
            CHECK((plus || minus));
            double min_sv = 1e300;
            for (const Mat& f : b.frames) {
                min_sv = std::min(min_sv, l0_nullity(f).smallest_singular);
                CHECK(symplectic_defect(f) < 1e-8 * std::max(1.0, f.squaredNorm()));
            }
            CHECK(min_sv > 1e-8);
        }
    }
}

TEST_CASE("winding index agrees across closing-path branches and with the closed form")
{
    int compared = 0;
    for (unsigned seed = 10; seed < 40; ++seed) {
        const int n = 1 + static_cast<int>(seed % 3);
        const double scale = 0.5 + (seed % 5) * 2.0;
        const auto path = integrate_fundamental(oracle::random_brake_path(n, scale, seed), 1.0);
        if (l0_nullity(path.endpoint()).nullity) continue;
        WindingOptions a, b;
        b.branch = BetaBranch::givens;
        const int ia = l0_index(path, a).index;
        CHECK(ia == l0_index(path, b).index);
        CHECK(ia == oracle::l0_index_closed_form(path));
        ++compared;
    }
    CHECK(compared > 20);
}

TEST_CASE("index is additive under the symplectic direct sum")
{
    const auto p1 = integrate_fundamental(oracle::random_brake_path(1, 4.0, 3), 1.0);
    const auto p2 = integrate_fundamental(oracle::random_brake_path(2, 6.0, 4), 1.0);
    SymplecticPath sum;
    sum.n = 3;
    sum.grid = p1.grid;
    for (std::size_t i = 0; i < p1.size(); ++i) sum.frames.push_back(diamond(p1.frames[i], p2.frames[i]));
    CHECK(l0_index(sum).index == l0_index(p1).index + l0_index(p2).index);
}

TEST_CASE("phase jump on a coarse grid is reported, and coarse integration grids are raised")
{
    const auto coarse = sampled(1, 10.0, 5, [](double t) { return rotation(t); });
    CHECK_THROWS_AS(rotation_trace(coarse), NumericalError);

    IntegratorOptions integ;
    integ.steps_per_unit = 1;
    WindingOptions opt;
    const auto idx = l0_index_of(CoefficientPath::constant(Mat::Identity(2, 2) * 5.0), 1.0, opt, integ);
    CHECK(idx.index == 1);
    CHECK(idx.provenance["steps_per_unit"].get<int>() > 1);
}
