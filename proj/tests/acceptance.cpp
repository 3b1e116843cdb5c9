#include "maslov/brake.hpp"
#include "maslov/checks.hpp"
#include "maslov/corpus.hpp"
#include "maslov/parallel.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

using namespace maslov;
using nlohmann::json;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0)
{
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

struct Line {
    int id;
    bool pass;
    std::string detail;
};

std::vector<Line> lines;

void report(int id, bool pass, const std::string& detail)
{
    lines.push_back({id, pass, detail});
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << detail << std::endl;
}

constexpr std::uint64_t corpus_seed = 2024;
constexpr int corpus_count = 120;

std::vector<CorpusSample> acceptance_corpus()
{
    const double scales[] = {1.0, 3.0, 6.0};
    std::vector<CorpusSample> out;
    for (int i = 0; i < corpus_count; ++i) out.push_back(generate_sample(corpus_seed, i, 1 + i % 3, scales[(i / 3) % 3]));
    return out;
}

// Per-sample results of criteria 1-3, serialized for the determinism check.
struct SampleResult {
    int n = 0;
    int winding = 0, winding_nu = 0, relative = 0, relative_nu = 0;
    bool engines = false;
    int bott_ok = 0, bott_total = 0;
    int nullity_ok = 0;
    int ineq_ok = 0;
    json log;
};

SampleResult analyse(const CorpusSample& s, bool iterate)
{
    SampleResult r;
    r.n = s.n;
    const auto b = s.path();
    const auto w = l0_index_of(b, 1.0);
    const auto rel = relative_index(b, 1.0, SpaceKind::l0_fourier, 0.0);
    r.winding = w.index;
    r.winding_nu = w.nullity;
    r.relative = rel.value;
    r.relative_nu = rel.geometric_nullity;
    r.engines = w.index + s.n == rel.value && w.nullity == rel.geometric_nullity;
    r.log = {{"index", s.index}, {"n", s.n}, {"i_L0", w.index}, {"nu_L0", w.nullity}, {"relative", rel.value}};
    if (!iterate) return r;
    IterationAnalysis a(b);
    json ks = json::array();
    for (int k = 2; k <= 6; ++k) {
        const auto bott = bott_l0_check(a, k);
        const auto nul = bott_nullity_check(a, k);
        const auto ineq = iteration_inequality_check(a, k);
        ++r.bott_total;
        r.bott_ok += bott.ok();
        r.nullity_ok += nul.equal;
        r.ineq_ok += ineq.holds && ineq.omega_bounds_hold;
        ks.push_back({{"k", k}, {"bott", bott}, {"nu1", nul}, {"ineq", ineq}});
    }
    r.log["iterates"] = ks;
    return r;
}

std::string dump_results(const std::vector<SampleResult>& rs)
{
    json all = json::array();
    for (const auto& r : rs) all.push_back(r.log);
    return all.dump();
}

} // namespace

int main()
{
    const auto t_all = clock_type::now();
    const auto corpus = acceptance_corpus();

    // 1: winding vs Galerkin on the corpus
    auto t0 = clock_type::now();
    std::vector<SampleResult> base;
    try {
        base = parallel_map(corpus.size(), [&](std::size_t i) { return analyse(corpus[i], false); });
        const double secs = seconds_since(t0);
        int agree = 0;
        std::set<int> values;
        for (const auto& r : base) {
            agree += r.engines;
            values.insert(r.winding);
        }
        std::ostringstream os;
        os << agree << "/" << base.size() << " systems, i_L0 values " << values.size() << " distinct, " << std::fixed
           << std::setprecision(1) << secs << " s";
        report(1, agree == static_cast<int>(base.size()) && base.size() >= 100 && secs <= 300.0, os.str());
    } catch (const std::exception& e) {
        report(1, false, e.what());
    }

    // 2, 3: Bott-type formulas and the iteration inequality on the same corpus, k = 2..6
    std::vector<SampleResult> full;
    try {
        full = parallel_map(corpus.size(), [&](std::size_t i) { return analyse(corpus[i], true); });
        int bott = 0, nul = 0, ineq = 0, total = 0;
        for (const auto& r : full) {
            bott += r.bott_ok;
            nul += r.nullity_ok;
            ineq += r.ineq_ok;
            total += r.bott_total;
        }
        std::ostringstream os2, os3;
        os2 << "L0 formula " << bott << "/" << total << ", nu_1 identity " << nul << "/" << total;
        report(2, bott == total && nul == total && total > 0, os2.str());
        os3 << ineq << "/" << total << " (sample, k) pairs without violation";
        report(3, ineq == total && total > 0, os3.str());
    } catch (const std::exception& e) {
        report(2, false, e.what());
        report(3, false, e.what());
    }

    // 4: splitting numbers of the normal forms
    try {
        const auto rows = splitting_table();
        int ok = 0;
        std::set<std::string> items;
        for (const auto& r : rows) {
            ok += r.match;
            items.insert(r.item);
        }
        std::ostringstream os;
        os << ok << "/" << rows.size() << " rows over items";
        for (const auto& it : items) os << " " << it;
        report(4, ok == static_cast<int>(rows.size()) && items.size() == 6, os.str());
    } catch (const std::exception& e) {
        report(4, false, e.what());
    }

    // 5: positivity and monotonicity
    try {
        auto pos = parallel_map(100, [](std::size_t i) {
            const int n = 1 + static_cast<int>(i % 3);
            const int rank = std::max((2 * n + 2) / 3, 1 + static_cast<int>(i % 2));
            const bool l0 = l0_positivity_check(positive_s22_path(31, i, n, 4.0, i % 2 == 0)).holds;
            const bool per = periodic_positivity_check(psd_path(32, i, n, 3.0, rank)).holds;
            const auto b2 = generate_sample(33, i, n, 3.0).path();
            const auto p = psd_path(34, i, n, 2.0, rank);
            const CoefficientPath b1(n, [b2, p](double t) { return Mat(b2(t) + p(t)); });
            const bool mono = monotonicity_check(b1, b2).holds;
            return std::array<int, 3>{l0, per, mono};
        });
        int a = 0, b = 0, c = 0;
        for (const auto& r : pos) {
            a += r[0];
            b += r[1];
            c += r[2];
        }
        std::ostringstream os;
        os << "i_L0 >= 0 on " << a << "/100, i_1 >= n on " << b << "/100, monotonicity on " << c << "/100 pairs";
        report(5, a == 100 && b == 100 && c == 100, os.str());
    } catch (const std::exception& e) {
        report(5, false, e.what());
    }

    // 6: index-function scans
    try {
        auto scans = parallel_map(12, [](std::size_t i) {
            return scan_structure_check(generate_sample(41, i, 1 + static_cast<int>(i % 3), 5.0).path(), 24);
        });
        int ok = 0;
        std::size_t jumps = 0;
        for (const auto& s : scans) {
            ok += s.ok();
            jumps += s.jumps.size();
        }
        std::ostringstream os;
        os << ok << "/" << scans.size() << " scans consistent, " << jumps << " jumps checked";
        report(6, ok == static_cast<int>(scans.size()) && jumps > 0, os.str());
    } catch (const std::exception& e) {
        report(6, false, e.what());
    }

    // 7, 8: the circle orbit of H = |z|^4
    std::string cert_dump;
    try {
        const auto cert = verify_first_order(builtin_hamiltonian("quartic-first-order"), 2.0);
        cert_dump = cert.clauses.dump();
        const auto& o = *cert.orbit;
        const double r = std::sqrt(pi) / 2;
        const double rel = (o.start.cwiseAbs() - Vec::Constant(1, r)).norm() / r;
        const auto& cl = cert.clauses;
        const int il0 = cl["index_bound"]["i_L0"].get<int>();
        const int nu1 = cl["nu1_positive"]["nu_1"].get<int>();
        const bool hx = cl["hx"]["holds"].get<bool>();
        const int kstar = cl["minimal_period"]["k_star"].get<int>();
        std::ostringstream os;
        os << "start error " << std::scientific << std::setprecision(2) << rel << std::defaultfloat << ", i_L0 = " << il0
           << ", nu_1 = " << nu1 << ", HX " << (hx ? "holds" : "fails") << ", tau_min = tau/" << kstar;
        report(7, rel <= 1e-6 && il0 <= 1 && nu1 >= 1 && hx && kstar == 1 && cert.pass, os.str());

        const auto& mr = cl["morse_identity"];
        bool all = mr["holds"].get<bool>();
        int levels = 0;
        for (const auto& l : mr["levels"]) {
            ++levels;
            all = all && l["negative"] == l["expected"] && l["null"] == mr["nu_L0"];
        }
        std::ostringstream os8;
        os8 << levels << " levels m = 8..16, count = m n + n + " << mr["i_L0"].get<int>()
            << ", null count = nu_L0 = " << mr["nu_L0"].get<int>();
        report(8, all && levels == 9, os8.str());
    } catch (const std::exception& e) {
        report(7, false, e.what());
        report(8, false, e.what());
    }

    // 9: second-order pipeline
    try {
        const auto odd = solve_second_order(builtin_hamiltonian("second-order-x4", ProblemKind::second_order_odd), 2.0);
        const auto& cl = odd.clauses;
        const bool nontrivial = odd.orbit && odd.orbit->amplitude > 1e-3;
        const bool morse = cl["morse_identity"]["pass"].get<bool>();
        const int kstar = cl["minimal_period"]["k_star"].get<int>();
        const auto neu = solve_second_order(builtin_hamiltonian("second-order-x4", ProblemKind::second_order_neumann), 2.0);
        bool guard = false;
        try {
            solve_second_order(builtin_hamiltonian("second-order-x4", ProblemKind::second_order_neumann), 2 * pi);
        } catch (const InputError&) {
            guard = true;
        }
        std::ostringstream os;
        os << "odd orbit amplitude " << std::setprecision(6) << odd.orbit->amplitude << ", Dirichlet Morse count "
           << cl["morse_identity"]["negative"].get<int>() << " = i_L0 " << cl["morse_identity"]["i_L0"].get<int>()
           << ", tau_min = tau/" << kstar << "; Neumann certificate " << (neu.pass ? "pass" : "fail") << ", guard "
           << (guard ? "rejects tau = 2 pi" : "missing");
        report(9, nontrivial && morse && (kstar == 1 || kstar == 2) && odd.pass && neu.pass && guard, os.str());
    } catch (const std::exception& e) {
        report(9, false, e.what());
    }

    // 10: rerun with the same seeds, single-threaded, and compare the serialized reports
    try {
        const std::vector<CorpusSample> sub(corpus.begin(), corpus.begin() + 12);
        auto again = parallel_map(sub.size(), [&](std::size_t i) { return analyse(sub[i], true); }, 1);
        const std::vector<SampleResult> first(full.begin(), full.begin() + std::min<std::size_t>(12, full.size()));
        const bool same_reports = !first.empty() && dump_results(first) == dump_results(again);
        const auto corpus2 = acceptance_corpus();
        const bool same_corpus = json(corpus).dump() == json(corpus2).dump();
        ShootOptions one;
        one.threads = 1;
        const auto cert = verify_first_order(builtin_hamiltonian("quartic-first-order"), 2.0, one);
        const bool same_cert = !cert_dump.empty() && cert.clauses.dump() == cert_dump;
        std::ostringstream os;
        os << "corpus " << (same_corpus ? "identical" : "differs") << ", index reports "
           << (same_reports ? "identical" : "differ") << ", certificate " << (same_cert ? "identical" : "differs");
        report(10, same_reports && same_corpus && same_cert, os.str());
    } catch (const std::exception& e) {
        report(10, false, e.what());
    }

    int failed = 0;
    for (const auto& l : lines) failed += !l.pass;
    std::cout << (failed ? "FAILED " : "ALL PASSED ") << lines.size() - failed << "/" << lines.size() << " criteria in "
              << std::fixed << std::setprecision(1) << seconds_since(t_all) << " s" << std::endl;
    return failed ? 1 : 0;
}
