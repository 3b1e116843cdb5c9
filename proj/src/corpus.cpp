#include "maslov/corpus.hpp"

#include <cmath>

namespace maslov {

Philox::Block Philox::operator()(Block ctr) const
{
    constexpr std::uint64_t m0 = 0xD2511F53, m1 = 0xCD9E8D57;
    constexpr std::uint32_t w0 = 0x9E3779B9, w1 = 0xBB67AE85;
    std::array<std::uint32_t, 2> k = key_;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = m0 * ctr[0], p1 = m1 * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k[1], static_cast<std::uint32_t>(p0)};
        k[0] += w0;
        k[1] += w1;
    }
    return ctr;
}

std::uint32_t SampleStream::next_word()
{
    if (used_ == 4) {
        buf_ = gen_({static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32),
                     static_cast<std::uint32_t>(draw_), static_cast<std::uint32_t>(draw_ >> 32)});
        ++draw_;
        used_ = 0;
    }
    return buf_[used_++];
}

double SampleStream::uniform()
{
    const std::uint64_t hi = next_word() >> 5, lo = next_word() >> 6; // 27 + 26 bits
    return (hi * 67108864.0 + lo) / 9007199254740992.0;
}

double SampleStream::normal()
{
    double u = uniform();
    while (u == 0.0) u = uniform();
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * pi * v);
}

namespace {

// Symmetric 2n x 2n with entries only in the diagonal blocks (or only the off-diagonal ones),
// Frobenius norm scaled to `norm`.
Mat random_block_symmetric(SampleStream& rs, int n, bool diag_blocks, double norm)
{
    Mat m = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i)
        for (int j = i; j < 2 * n; ++j)
            if (((i < n) == (j < n)) == diag_blocks) m(i, j) = m(j, i) = rs.normal();
    const double f = m.norm();
    return f > 0 ? Mat(m * (norm / f)) : m;
}

Mat random_symmetric(SampleStream& rs, int d, double norm)
{
    Mat m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) m(i, j) = m(j, i) = rs.normal();
    return m * (norm / m.norm());
}

} // namespace

CoefficientPath CorpusSample::path() const
{
    auto p = CoefficientPath::fourier(c0, c, e);
    nlohmann::json j;
    to_json(j, *this);
    p.source = j;
    return p;
}

double CorpusSample::symmetry_defect() const
{
    const Mat nr = reflection_n(n);
    auto defect = [&](const Mat& m, double sign) {
        return std::max((nr * m * nr - sign * m).cwiseAbs().maxCoeff(), (m - m.transpose()).cwiseAbs().maxCoeff());
    };
    double d = defect(c0, 1.0);
    for (const auto& m : c) d = std::max(d, defect(m, 1.0));
    for (const auto& m : e) d = std::max(d, defect(m, -1.0));
    return d;
}

void to_json(nlohmann::json& j, const CorpusSample& s)
{
    auto mat = [](const Mat& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            nlohmann::json r = nlohmann::json::array();
            for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
            rows.push_back(r);
        }
        return rows;
    };
    j = {{"seed", s.seed}, {"index", s.index}, {"n", s.n}, {"order", s.order}, {"scale", s.scale}, {"c0", mat(s.c0)}};
    j["cos"] = nlohmann::json::array();
    j["sin"] = nlohmann::json::array();
    for (const auto& m : s.c) j["cos"].push_back(mat(m));
    for (const auto& m : s.e) j["sin"].push_back(mat(m));
}

CorpusSample generate_sample(std::uint64_t seed, std::uint64_t index, int n, double scale, int order)
{
    if (n < 1 || order < 0 || !(scale >= 0.0)) throw InputError("generate_sample: bad parameters");
    SampleStream rs(seed, index);
    CorpusSample s;
    s.seed = seed;
    s.index = index;
    s.n = n;
    s.order = order;
    s.scale = scale;
    // each coefficient block gets its own norm in [scale/4, scale]
    auto norm = [&] { return scale * (0.25 + 0.75 * rs.uniform()); };
    s.c0 = random_block_symmetric(rs, n, true, norm());
    for (int j = 0; j < order; ++j) {
        s.c.push_back(random_block_symmetric(rs, n, true, norm()));
        s.e.push_back(random_block_symmetric(rs, n, false, norm()));
    }
    return s;
}

std::vector<CorpusSample> generate_corpus(const std::vector<int>& ns, int count, std::uint64_t seed, double scale,
                                          int order)
{
    if (count < 1 || ns.empty()) throw InputError("generate_corpus: count must be positive");
    std::vector<CorpusSample> out;
    for (int i = 0; i < count; ++i) out.push_back(generate_sample(seed, i, ns[i % ns.size()], scale, order));
    return out;
}

CoefficientPath positive_s22_path(std::uint64_t seed, std::uint64_t index, int n, double scale, bool strict)
{
    SampleStream rs(seed, index);
    const Mat a0 = random_symmetric(rs, 2 * n, scale), a1 = random_symmetric(rs, 2 * n, scale);
    Mat h0(n, n), h1(n, n);
    for (Mat* m : {&h0, &h1}) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) (*m)(i, j) = rs.normal();
        *m *= std::sqrt(scale) / m->norm();
    }
    // S22 = H H^T + margin; the semi-definite variant vanishes at t = 0 and t = 1
    auto f = [=](double t) {
        Mat b = a0 + std::cos(pi * t) * a1;
        const Mat h = h0 + std::cos(pi * t) * h1;
        const double w = strict ? 1.0 : std::sin(pi * t) * std::sin(pi * t);
        b.bottomRightCorner(n, n) = w * (h * h.transpose() + 0.1 * scale * Mat::Identity(n, n));
        return b;
    };
    return CoefficientPath(n, f);
}

CoefficientPath psd_path(std::uint64_t seed, std::uint64_t index, int n, double scale, int rank)
{
    // the integral of G G^T has rank at most 3 * rank
    if (rank < 1 || rank > 2 * n || 3 * rank < 2 * n) throw InputError("psd_path: rank out of range");
    SampleStream rs(seed, index);
    const int d = 2 * n;
    Mat g0(d, rank), g1(d, rank), g2(d, rank);
    for (Mat* m : {&g0, &g1, &g2}) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < rank; ++j) (*m)(i, j) = rs.normal();
        *m *= std::sqrt(scale) / m->norm();
    }
    auto f = [=](double t) {
        const Mat g = g0 + std::cos(pi * t) * g1 + std::sin(pi * t) * g2;
        return Mat(g * g.transpose());
    };
    return CoefficientPath(n, f);
}

} // namespace maslov
