#include "doctest.h"
#include "maslov/checks.hpp"
#include "maslov/corpus.hpp"

#include <set>

using namespace maslov;

TEST_CASE("Philox4x32-10 known answers")
{
    const Philox zero(0);
    const auto a = zero({0, 0, 0, 0});
    CHECK(a == Philox::Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    const Philox ones(0xffffffffffffffffULL);
    const auto b = ones({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff});
    CHECK(b == Philox::Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
}

TEST_CASE("sample streams are reproducible and index-addressed")
{
    SampleStream s1(42, 7), s2(42, 7), s3(42, 8);
    for (int i = 0; i < 20; ++i) {
        const double u = s1.uniform();
        CHECK(u == s2.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        (void)s3.uniform();
    }
    CHECK(SampleStream(42, 7).normal() != SampleStream(42, 8).normal());
}

TEST_CASE("corpus samples are exactly brake symmetric and bounded")
{
    const auto corpus = generate_corpus({1, 2, 3}, 12, 5, 2.0);
    const auto again = generate_corpus({1, 2, 3}, 12, 5, 2.0);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        CHECK(nlohmann::json(corpus[i]).dump() == nlohmann::json(again[i]).dump());
        const auto p = corpus[i].path();
        CHECK(p.brake_symmetric());
        CHECK(corpus[i].symmetry_defect() == 0.0);
        const auto rep = check_brake_symmetry(p);
        CHECK(rep.ok(1e-13));
        CHECK(corpus[i].c0.norm() <= 2.0 + 1e-12);
        for (const auto& m : corpus[i].e) CHECK(m.norm() <= 2.0 + 1e-12);
    }
}

TEST_CASE("scale sweep covers several index values")
{
    std::set<int> values;
    for (double scale : {0.5, 2.0, 8.0})
        for (int i = 0; i < 6; ++i) values.insert(l0_index_of(generate_sample(9, i, 2, scale).path(), 1.0).index);
    CHECK(values.size() >= 3);
}

TEST_CASE("positivity checks")
{
    for (int i = 0; i < 6; ++i) {
        const int n = 1 + i % 3;
        CHECK(l0_positivity_check(positive_s22_path(3, i, n, 4.0, true)).holds);
        CHECK(l0_positivity_check(positive_s22_path(3, i, n, 4.0, false)).holds);
        CHECK(periodic_positivity_check(psd_path(4, i, n, 3.0, (2 * n + 2) / 3 + i % 2)).holds);
    }
}

TEST_CASE("monotonicity under a positive increment")
{
    for (int i = 0; i < 6; ++i) {
        const int n = 1 + i % 2;
        const auto b2 = generate_sample(6, i, n, 3.0).path();
        const auto p = psd_path(7, i, n, 2.0, 1 + i % 2);
        const CoefficientPath b1(n, [b2, p](double t) { return Mat(b2(t) + p(t)); });
        CHECK(monotonicity_check(b1, b2).holds);
    }
}

TEST_CASE("index function scan structure")
{
    for (int i = 0; i < 4; ++i) {
        const auto b = generate_sample(8, i, 1 + i % 3, 5.0).path();
        const auto r = scan_structure_check(b, 24);
        CHECK_MESSAGE(r.ok(), nlohmann::json(r).dump());
    }
}

TEST_CASE("positivity checks reject inputs outside their hypotheses")
{
    const auto zero = CoefficientPath::constant(Mat::Zero(2, 2));
    CHECK_THROWS_AS(periodic_positivity_check(zero), InputError);
    CHECK_THROWS_AS(psd_path(1, 0, 2, 1.0, 1), InputError);
    CHECK_THROWS_AS(l0_positivity_check(CoefficientPath::constant(-Mat::Identity(2, 2))), InputError);
}
