#pragma once

#include "maslov/symplectic.hpp"

#include <array>
#include <cstdint>

namespace maslov {

// Philox4x32-10 counter-based generator.
class Philox {
public:
    using Block = std::array<std::uint32_t, 4>;
    explicit Philox(std::uint64_t seed) : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}
    Block operator()(Block counter) const;

private:
    std::array<std::uint32_t, 2> key_;
};

// Draws for one sample: counter = (sample index, draw number), so samples are independent of
// how work is split between threads.
class SampleStream {
public:
    SampleStream(std::uint64_t seed, std::uint64_t index) : gen_(seed), index_(index) {}
    double uniform();     // [0, 1)
    double normal();

private:
    Philox gen_;
    std::uint64_t index_;
    std::uint64_t draw_ = 0;
    Philox::Block buf_{};
    int used_ = 4;
    std::uint32_t next_word();
};

// B(t) = C0 + sum_j cos(j pi t) C_j + sin(j pi t) E_j with C block-diagonal, E block-antidiagonal.
struct CorpusSample {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    int n = 1;
    int order = 2;
    double scale = 1.0;
    Mat c0;
    std::vector<Mat> c, e;

    CoefficientPath path() const;
    // max of |N C N - C|, |N E N + E| and asymmetry over all coefficients; exactly 0 by construction
    double symmetry_defect() const;
};

void to_json(nlohmann::json& j, const CorpusSample& s);

CorpusSample generate_sample(std::uint64_t seed, std::uint64_t index, int n, double scale, int order = 2);
// n cycles through ns by sample index
std::vector<CorpusSample> generate_corpus(const std::vector<int>& ns, int count, std::uint64_t seed, double scale,
                                          int order = 2);

// Random analytic path on [0, 1] with the lower-right block S22(t) positive definite (strict) or
// semi-definite with positive integral.
CoefficientPath positive_s22_path(std::uint64_t seed, std::uint64_t index, int n, double scale, bool strict);
// B(t) = G(t) G(t)^T, G of size 2n x rank with trigonometric entries; semi-definite for rank < 2n.
CoefficientPath psd_path(std::uint64_t seed, std::uint64_t index, int n, double scale, int rank);

} // namespace maslov
