#include "CLI11.hpp"
#include "json.hpp"
#include "maslov/brake.hpp"
#include "maslov/checks.hpp"
#include "maslov/corpus.hpp"
#include "maslov/parallel.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace maslov;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int schema_version = 1;
const char* const tool_version = "1.0.0";

const std::vector<std::string> task_names{"index", "iterate", "bott", "ineq", "split",
                                          "relindex", "solve", "verify", "corpus"};

// ---------------------------------------------------------------- config access

void only_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    if (!obj.is_object()) throw InputError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw InputError(where + ": unknown field '" + it.key() + "'");
}

template <class T>
T get_or(const json& obj, const std::string& key, T fallback)
{
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError("field '" + key + "': " + e.what());
    }
}

template <class T>
T get_req(const json& obj, const std::string& key, const std::string& where)
{
    if (!obj.contains(key)) throw InputError(where + ": missing field '" + key + "'");
    return get_or<T>(obj, key, T{});
}

double positive(double v, const std::string& what)
{
    if (!(v > 0.0)) throw InputError(what + " must be positive");
    return v;
}

Mat read_matrix(const json& j, const std::string& where)
{
    if (!j.is_array() || j.empty() || !j[0].is_array()) throw InputError(where + ": expected a row-major matrix");
    const std::size_t rows = j.size(), cols = j[0].size();
    Mat m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) throw InputError(where + ": ragged matrix");
        for (std::size_t k = 0; k < cols; ++k) {
            if (!j[i][k].is_number()) throw InputError(where + ": non-numeric entry");
            m(i, k) = j[i][k].get<double>();
        }
    }
    return m;
}

std::vector<Mat> read_matrices(const json& j, const std::string& where)
{
    std::vector<Mat> out;
    if (!j.is_array()) throw InputError(where + ": expected a list of matrices");
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_matrix(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

// {"n", "representation": constant | fourier | grid | corpus, "coefficients": {...}, "tol"}
CoefficientPath read_system(const json& s)
{
    only_keys(s, {"n", "representation", "coefficients", "tol"}, "system");
    const auto rep = get_req<std::string>(s, "representation", "system");
    const json c = s.contains("coefficients") ? s.at("coefficients") : json::object();
    CoefficientPath p;
    if (rep == "constant") {
        only_keys(c, {"b"}, "system.coefficients");
        p = CoefficientPath::constant(read_matrix(c.at("b"), "system.coefficients.b"));
    } else if (rep == "fourier") {
        only_keys(c, {"c0", "cos", "sin"}, "system.coefficients");
        p = CoefficientPath::fourier(read_matrix(c.at("c0"), "c0"), read_matrices(c.value("cos", json::array()), "cos"),
                                     read_matrices(c.value("sin", json::array()), "sin"));
    } else if (rep == "grid") {
        only_keys(c, {"times", "values"}, "system.coefficients");
        p = CoefficientPath::grid_samples(get_req<std::vector<double>>(c, "times", "system.coefficients"),
                                          read_matrices(c.at("values"), "values"));
    } else if (rep == "corpus") {
        only_keys(c, {"seed", "index", "scale", "order"}, "system.coefficients");
        const int n = get_req<int>(s, "n", "system");
        p = generate_sample(get_or<std::uint64_t>(c, "seed", 1), get_or<std::uint64_t>(c, "index", 0), n,
                            positive(get_or<double>(c, "scale", 2.0), "scale"), get_or<int>(c, "order", 2))
                .path();
    } else {
        throw InputError("system: unknown representation '" + rep + "'");
    }
    if (s.contains("n") && get_or<int>(s, "n", 0) != p.n()) throw InputError("system: n does not match coefficients");
    return p;
}

RelativeIndexPolicy read_policy(const json& cfg)
{
    RelativeIndexPolicy pol;
    // the system file may carry its own integration tolerance
    if (cfg.contains("system") && cfg.at("system").is_object() && cfg.at("system").contains("tol"))
        pol.integ.symplectic_tol = positive(get_or<double>(cfg.at("system"), "tol", 0.0), "system.tol");
    if (!cfg.contains("tolerances")) return pol;
    const json& t = cfg.at("tolerances");
    only_keys(t, {"kernel", "quadrature", "symplectic", "steps_per_unit", "m_max", "window"}, "tolerances");
    pol.kernel_tol = positive(get_or(t, "kernel", pol.kernel_tol), "tolerances.kernel");
    pol.quad.tol = positive(get_or(t, "quadrature", pol.quad.tol), "tolerances.quadrature");
    pol.integ.symplectic_tol = positive(get_or(t, "symplectic", pol.integ.symplectic_tol), "tolerances.symplectic");
    pol.integ.steps_per_unit = get_or(t, "steps_per_unit", pol.integ.steps_per_unit);
    pol.m_max = get_or(t, "m_max", pol.m_max);
    pol.window = get_or(t, "window", pol.window);
    if (pol.integ.steps_per_unit < 2 || pol.m_max < 1 || pol.window < 2) throw InputError("tolerances: bad integer value");
    return pol;
}

std::vector<PolyTerm> read_terms(const json& j)
{
    std::vector<PolyTerm> out;
    if (!j.is_array()) throw InputError("hamiltonian.terms: expected a list");
    for (const auto& t : j) {
        only_keys(t, {"c", "p", "w"}, "hamiltonian.terms");
        out.push_back({get_or<double>(t, "c", 1.0), read_matrix(t.at("w"), "hamiltonian.terms.w"), get_or<int>(t, "p", 2)});
    }
    return out;
}

ProblemKind variant_kind(const std::string& v)
{
    if (v == "odd") return ProblemKind::second_order_odd;
    if (v == "neumann") return ProblemKind::second_order_neumann;
    throw InputError("variant must be 'odd' or 'neumann'");
}

HamiltonianSpec read_hamiltonian(const json& cfg)
{
    const json& h = cfg.at("hamiltonian");
    const std::string variant = get_or<std::string>(cfg, "variant", "odd");
    if (h.is_string()) return builtin_hamiltonian(h.get<std::string>(), variant_kind(variant));
    only_keys(h, {"name", "kind", "n", "b", "terms", "mu", "r0"}, "hamiltonian");
    const auto kind = parse_problem_kind(get_or<std::string>(h, "kind", "first-order"));
    const auto name = get_or<std::string>(h, "name", "custom");
    const double mu = get_or(h, "mu", 4.0), r0 = positive(get_or(h, "r0", 1.0), "hamiltonian.r0");
    if (kind == ProblemKind::first_order)
        return first_order_hamiltonian(name, read_matrix(h.at("b"), "hamiltonian.b"), read_terms(h.at("terms")), mu, r0);
    return second_order_hamiltonian(name, get_req<int>(h, "n", "hamiltonian"), read_terms(h.at("terms")), kind, mu, r0);
}

std::vector<int> read_ks(const json& cfg, std::vector<int> fallback)
{
    if (!cfg.contains("k")) return fallback;
    const json& k = cfg.at("k");
    std::vector<int> out = k.is_array() ? k.get<std::vector<int>>() : std::vector<int>{k.get<int>()};
    for (int v : out)
        if (v < 1) throw InputError("k must be at least 1");
    return out;
}

// ---------------------------------------------------------------- output

std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

struct Artifacts {
    std::map<std::string, std::string> files;
    void put_json(const std::string& name, const json& j) { files[name] = j.dump(2) + "\n"; }
    void put(const std::string& name, const std::string& s) { files[name] = s; }
};

struct Outcome {
    Artifacts art;
    bool pass = true;
    std::string summary;
};

// samples of a corpus request, or the single configured system
struct SystemSet {
    std::vector<CoefficientPath> paths;
    json described = json::array();
};

SystemSet read_system_set(const json& cfg, std::uint64_t seed)
{
    SystemSet s;
    if (cfg.contains("system") == cfg.contains("corpus")) throw InputError("give exactly one of 'system' and 'corpus'");
    if (cfg.contains("system")) {
        s.paths.push_back(read_system(cfg.at("system")));
        s.described.push_back(cfg.at("system"));
        return s;
    }
    const json& c = cfg.at("corpus");
    only_keys(c, {"count", "n", "scale", "order"}, "corpus");
    const int count = get_or(c, "count", 100);
    if (count < 1) throw InputError("corpus.count must be at least 1");
    const json nj = c.value("n", json::array({1, 2, 3}));
    const std::vector<int> ns = nj.is_array() ? nj.get<std::vector<int>>() : std::vector<int>{nj.get<int>()};
    for (const auto& sample : generate_corpus(ns, count, seed, positive(get_or(c, "scale", 2.0), "corpus.scale"),
                                              get_or(c, "order", 2))) {
        s.paths.push_back(sample.path());
        s.described.push_back(sample);
    }
    return s;
}

// ---------------------------------------------------------------- tasks

Outcome task_index(const json& cfg, std::uint64_t seed, unsigned)
{
    only_keys(cfg, {"schema_version", "task", "seed", "system", "flavor", "omega", "method", "length", "tolerances"},
              "config");
    const auto b = read_system(cfg.at("system"));
    const auto pol = read_policy(cfg);
    const auto flavor = get_or<std::string>(cfg, "flavor", "l0");
    const auto method = get_or<std::string>(cfg, "method", "both");
    const double theta = get_or(cfg, "omega", 0.0), length = positive(get_or(cfg, "length", 1.0), "length");
    Outcome o;
    json r = {{"seed", seed}, {"flavor", flavor}, {"method", method}, {"length", length}};
    if (flavor == "l0") {
        if (method != "winding" && method != "galerkin" && method != "both") throw InputError("unknown method " + method);
        std::optional<IndexPair> w, g;
        if (method != "galerkin") w = l0_index_of(b, length, {}, pol.integ);
        if (method != "winding") g = index_l0_galerkin(b, length, pol);
        if (w) r["winding"] = *w;
        if (g) r["galerkin"] = *g;
        if (w && g) {
            r["agree"] = w->index == g->index && w->nullity == g->nullity;
            o.pass = r["agree"].get<bool>();
        }
        const IndexPair& v = w ? *w : *g;
        r["index"] = v.index;
        r["nullity"] = v.nullity;
    } else if (flavor == "omega" || flavor == "l0-omega") {
        if (method == "winding") throw InputError("the winding engine computes the L0 index only");
        r["omega"] = theta;
        const IndexPair v = flavor == "omega" ? index_omega(b, length, theta, pol) : index_l0_omega(b, length, theta, pol);
        r["galerkin"] = v;
        r["index"] = v.index;
        r["nullity"] = v.nullity;
    } else {
        throw InputError("flavor must be l0, omega or l0-omega");
    }
    o.art.put_json("index.json", r);
    o.summary = "index " + std::to_string(r["index"].get<int>()) + ", nullity " + std::to_string(r["nullity"].get<int>());
    return o;
}

Outcome task_iterate(const json& cfg, std::uint64_t seed, unsigned)
{
    only_keys(cfg, {"schema_version", "task", "seed", "system", "k", "tolerances"}, "config");
    IterationAnalysis a(read_system(cfg.at("system")), read_policy(cfg));
    Outcome o;
    json rows = json::array();
    std::ostringstream csv;
    csv << "k,i_L0,nu_L0,junction_mismatch\n";
    for (int k : read_ks(cfg, {1, 2, 3, 4, 5, 6})) {
        const IndexPair& p = a.l0_iterated(k);
        const double mm = a.junction_mismatch(k);
        rows.push_back({{"k", k}, {"i_L0", p.index}, {"nu_L0", p.nullity}, {"junction_mismatch", mm}});
        csv << k << "," << p.index << "," << p.nullity << "," << fmt(mm) << "\n";
    }
    o.art.put_json("iterate.json", {{"seed", seed}, {"iterates", rows}});
    o.art.put("iterate.csv", csv.str());
    o.summary = std::to_string(rows.size()) + " iterates";
    return o;
}

Outcome task_bott_or_ineq(const json& cfg, std::uint64_t seed, unsigned threads, bool bott)
{
    only_keys(cfg, {"schema_version", "task", "seed", "system", "corpus", "k", "tolerances"}, "config");
    const auto set = read_system_set(cfg, seed);
    const auto pol = read_policy(cfg);
    const auto ks = read_ks(cfg, {2, 3, 4, 5, 6});
    struct Row {
        json j;
        std::string csv;
        bool ok = true;
    };
    auto rows = parallel_map(
        set.paths.size(),
        [&](std::size_t i) {
            IterationAnalysis a(set.paths[i], pol);
            std::vector<Row> out;
            for (int k : ks) {
                Row r;
                std::ostringstream csv;
                if (bott) {
                    const auto rep = bott_l0_check(a, k);
                    const auto nul = bott_nullity_check(a, k);
                    r.ok = rep.ok() && nul.equal;
                    r.j = {{"sample", i}, {"k", k}, {"l0", rep}, {"nu1", nul}, {"verdict", r.ok ? "equal" : "unequal"}};
                    csv << i << "," << a.n() << "," << k << "," << rep.lhs_index << "," << rep.rhs_index << ","
                        << rep.lhs_nullity << "," << rep.rhs_nullity << "," << nul.lhs << "," << nul.rhs << ","
                        << (r.ok ? "equal" : "unequal") << "\n";
                } else {
                    const auto rep = iteration_inequality_check(a, k);
                    r.ok = rep.holds && rep.omega_bounds_hold;
                    r.j = {{"sample", i}, {"k", k}, {"report", rep}, {"verdict", r.ok ? "holds" : "violated"}};
                    csv << i << "," << a.n() << "," << k << "," << rep.lhs << "," << rep.mid << "," << rep.rhs2 << ","
                        << rep.left_equal << "," << rep.right_equal << "," << rep.verdict.verdict << ","
                        << (r.ok ? "holds" : "violated") << "\n";
                }
                r.csv = csv.str();
                out.push_back(r);
            }
            return out;
        },
        threads);
    Outcome o;
    json all = json::array();
    std::string csv = bott ? "sample,n,k,lhs_index,rhs_index,lhs_nullity,rhs_nullity,nu1_lhs,nu1_rhs,verdict\n"
                           : "sample,n,k,lhs,mid,rhs_doubled,left_equal,right_equal,classifier,verdict\n";
    int bad = 0, total = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (auto& r : rows[i]) {
            r.j["system"] = set.described[i];
            all.push_back(r.j);
            csv += r.csv;
            ++total;
            if (!r.ok) ++bad;
        }
    const std::string name = bott ? "bott" : "ineq";
    o.art.put_json(name + ".json", {{"seed", seed}, {"checks", total}, {"failures", bad}, {"samples", all}});
    o.art.put(name + "_summary.csv", csv);
    o.pass = bad == 0;
    o.summary = std::to_string(total - bad) + "/" + std::to_string(total) + " checks passed";
    return o;
}

Outcome task_split(const json& cfg, std::uint64_t seed, unsigned)
{
    only_keys(cfg, {"schema_version", "task", "seed", "system", "theta", "length", "ladder", "tolerances"}, "config");
    const auto pol = read_policy(cfg);
    const auto ladder = get_or<std::vector<double>>(cfg, "ladder", {1e-2, 1e-3, 1e-4});
    for (double e : ladder) positive(e, "ladder entries");
    Outcome o;
    json r = {{"seed", seed}};
    std::ostringstream csv;
    csv << "item,form,theta,expected_plus,expected_minus,plus,minus,nullity,match\n";
    if (cfg.contains("system")) {
        const auto s = splitting_numbers(read_system(cfg.at("system")), positive(get_or(cfg, "length", 1.0), "length"),
                                         get_or(cfg, "theta", 0.0), ladder, pol);
        r["splitting"] = s;
        o.summary = "S+ = " + std::to_string(s.plus) + ", S- = " + std::to_string(s.minus);
    } else {
        const auto rows = splitting_table(ladder, pol);
        int bad = 0;
        for (const auto& row : rows) {
            csv << row.item << "," << row.form << "," << fmt(row.theta) << "," << row.expected_plus << ","
                << row.expected_minus << "," << row.computed.plus << "," << row.computed.minus << ","
                << row.computed.nullity << "," << row.match << "\n";
            if (!row.match) ++bad;
        }
        r["table"] = rows;
        o.pass = bad == 0;
        o.art.put("split.csv", csv.str());
        o.summary = std::to_string(rows.size() - bad) + "/" + std::to_string(rows.size()) + " table rows reproduced";
    }
    o.art.put_json("split.json", r);
    return o;
}

Outcome task_relindex(const json& cfg, std::uint64_t seed, unsigned threads)
{
    only_keys(cfg, {"schema_version", "task", "seed", "system", "kind", "theta", "m_max", "scan", "length", "tolerances"},
              "config");
    const auto b = read_system(cfg.at("system"));
    auto pol = read_policy(cfg);
    pol.m_max = get_or(cfg, "m_max", pol.m_max);
    const auto kind = parse_space_kind(get_or<std::string>(cfg, "kind", "l0-fourier"));
    const double length = positive(get_or(cfg, "length", 1.0), "length");
    Outcome o;
    const auto rel = relative_index(b, length, kind, get_or(cfg, "theta", 0.0), pol);
    json r = {{"seed", seed}, {"result", rel}};
    if (cfg.contains("scan")) {
        // "theta0:theta1:steps"
        const auto spec = cfg.at("scan").get<std::string>();
        double t0 = 0, t1 = 0;
        int steps = 0;
        char c1 = 0, c2 = 0;
        std::istringstream is(spec);
        if (!(is >> t0 >> c1 >> t1 >> c2 >> steps) || c1 != ':' || c2 != ':' || steps < 1)
            throw InputError("scan must look like theta0:theta1:steps");
        std::vector<double> thetas;
        for (int i = 0; i <= steps; ++i) thetas.push_back(t0 + (t1 - t0) * i / steps);
        auto pts = parallel_map(
            thetas.size(), [&](std::size_t i) { return index_function_scan(b, length, {thetas[i]}, pol).front(); },
            threads);
        std::ostringstream csv;
        csv << "theta,i,nu\n";
        json arr = json::array();
        for (const auto& p : pts) {
            csv << fmt(p.theta) << "," << p.index << "," << p.nullity << "\n";
            arr.push_back({{"theta", p.theta}, {"i", p.index}, {"nu", p.nullity}});
        }
        r["scan"] = arr;
        o.art.put("scan.csv", csv.str());
    }
    o.art.put_json("relindex.json", r);
    o.summary = "relative index " + std::to_string(rel.value);
    return o;
}

ShootOptions read_shoot(const json& cfg, std::uint64_t seed, unsigned threads)
{
    ShootOptions opt;
    opt.seed = seed;
    opt.threads = threads;
    if (cfg.contains("seeds")) {
        const json& s = cfg.at("seeds");
        only_keys(s, {"radii", "directions", "steps_half", "tol"}, "seeds");
        opt.radii = get_or(s, "radii", opt.radii);
        opt.directions = get_or(s, "directions", opt.directions);
        opt.steps_half = get_or(s, "steps_half", opt.steps_half);
        opt.tol = positive(get_or(s, "tol", opt.tol), "seeds.tol");
        for (double r : opt.radii) positive(r, "seed radii");
        if (opt.directions < 0) throw InputError("seeds.directions must be non-negative");
    }
    return opt;
}

Outcome task_solve(const json& cfg, std::uint64_t seed, unsigned threads, bool verify)
{
    only_keys(cfg, {"schema_version", "task", "seed", "hamiltonian", "tau", "variant", "seeds", "tolerances"}, "config");
    if (!cfg.contains("hamiltonian")) throw InputError("config: missing field 'hamiltonian'");
    const auto h = read_hamiltonian(cfg);
    const double tau = positive(get_or(cfg, "tau", 2.0), "tau");
    const auto opt = read_shoot(cfg, seed, threads);
    const auto pol = read_policy(cfg);
    if (verify && h.kind != ProblemKind::first_order) throw InputError("verify needs a first-order Hamiltonian");
    const Certificate cert =
        h.kind == ProblemKind::first_order ? verify_first_order(h, tau, opt, pol) : solve_second_order(h, tau, opt, pol);
    Outcome o;
    o.pass = cert.pass;
    o.art.put_json("certificate.json",
                   {{"seed", seed}, {"hamiltonian", h}, {"tau", tau}, {"pass", cert.pass}, {"clauses", cert.clauses}});
    if (cert.orbit) {
        std::ostringstream csv;
        csv << "t";
        for (int i = 1; i <= 2 * h.n; ++i) csv << ",z" << i;
        csv << "\n";
        const auto& full = cert.orbit->full;
        const std::size_t stride = std::max<std::size_t>(1, full.size() / 2000);
        for (std::size_t i = 0; i < full.size(); i += stride) {
            csv << fmt(i * cert.orbit->step());
            for (Eigen::Index c = 0; c < full[i].size(); ++c) csv << "," << fmt(full[i](c));
            csv << "\n";
        }
        o.art.put("orbit.csv", csv.str());
    }
    std::ostringstream spec;
    spec << "k,eigenvalue\n";
    for (Eigen::Index i = 0; i < cert.hessian_spectrum.size(); ++i) spec << i << "," << fmt(cert.hessian_spectrum(i)) << "\n";
    o.art.put("hessian_spectrum.csv", spec.str());
    o.summary = std::string("certificate ") + (cert.pass ? "pass" : "FAIL");
    return o;
}

Outcome task_corpus(const json& cfg, std::uint64_t seed, unsigned threads)
{
    only_keys(cfg, {"schema_version", "task", "seed", "corpus", "indices", "tolerances"}, "config");
    if (!cfg.contains("corpus")) throw InputError("config: missing field 'corpus'");
    const json& c = cfg.at("corpus");
    only_keys(c, {"count", "n", "scale", "order"}, "corpus");
    const int count = get_or(c, "count", 100);
    if (count < 1) throw InputError("corpus.count must be at least 1");
    const json nj = c.value("n", json::array({1, 2, 3}));
    const auto ns = nj.is_array() ? nj.get<std::vector<int>>() : std::vector<int>{nj.get<int>()};
    const auto samples = generate_corpus(ns, count, seed, positive(get_or(c, "scale", 2.0), "corpus.scale"),
                                         get_or(c, "order", 2));
    const bool indices = get_or(cfg, "indices", true);
    const auto pol = read_policy(cfg);
    struct Row {
        int winding = 0, galerkin_rel = 0, nu_w = 0, nu_g = 0;
        double defect = 0.0;
    };
    auto rows = parallel_map(
        samples.size(),
        [&](std::size_t i) {
            Row r;
            r.defect = samples[i].symmetry_defect();
            if (indices) {
                const auto b = samples[i].path();
                const auto w = l0_index_of(b, 1.0, {}, pol.integ);
                const auto rel = relative_index(b, 1.0, SpaceKind::l0_fourier, 0.0, pol);
                r.winding = w.index;
                r.nu_w = w.nullity;
                r.galerkin_rel = rel.value;
                r.nu_g = rel.geometric_nullity;
            }
            return r;
        },
        threads);
    Outcome o;
    std::ostringstream csv;
    csv << "index,n,symmetry_defect" << (indices ? ",i_L0_winding,relative_index,nu_L0,agree" : "") << "\n";
    int bad = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& r = rows[i];
        csv << i << "," << samples[i].n << "," << fmt(r.defect);
        bool ok = r.defect == 0.0;
        if (indices) {
            ok = ok && r.winding + samples[i].n == r.galerkin_rel && r.nu_w == r.nu_g;
            csv << "," << r.winding << "," << r.galerkin_rel << "," << r.nu_w << "," << ok;
        }
        csv << "\n";
        if (!ok) ++bad;
    }
    o.art.put_json("corpus.json", {{"seed", seed}, {"samples", samples}});
    o.art.put("corpus_summary.csv", csv.str());
    o.pass = bad == 0;
    o.summary = std::to_string(samples.size() - bad) + "/" + std::to_string(samples.size()) + " samples consistent";
    return o;
}

Outcome run_task(const std::string& task, const json& cfg, std::uint64_t seed, unsigned threads)
{
    if (task == "index") return task_index(cfg, seed, threads);
    if (task == "iterate") return task_iterate(cfg, seed, threads);
    if (task == "bott") return task_bott_or_ineq(cfg, seed, threads, true);
    if (task == "ineq") return task_bott_or_ineq(cfg, seed, threads, false);
    if (task == "split") return task_split(cfg, seed, threads);
    if (task == "relindex") return task_relindex(cfg, seed, threads);
    if (task == "solve") return task_solve(cfg, seed, threads, false);
    if (task == "verify") return task_solve(cfg, seed, threads, true);
    if (task == "corpus") return task_corpus(cfg, seed, threads);
    throw InputError("unknown task " + task);
}

json load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    json cfg;
    try {
        cfg = json::parse(text);
    } catch (const json::parse_error& e) {
        // translate the byte offset into a line number
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
        throw InputError(path + ":" + std::to_string(line) + ": " + e.what());
    }
    if (!cfg.is_object()) throw InputError("config must be a JSON object");
    if (!cfg.contains("schema_version")) throw InputError("config: missing field 'schema_version'");
    if (get_or<int>(cfg, "schema_version", 0) != schema_version)
        throw InputError("config: unsupported schema_version (expected " + std::to_string(schema_version) + ")");
    return cfg;
}

void write_artifacts(const fs::path& out, const Artifacts& art, const json& meta)
{
    fs::create_directories(out);
    for (const auto& [name, content] : art.files) {
        std::ofstream f(out / name, std::ios::binary);
        f << content;
        if (!f) throw std::runtime_error("cannot write " + (out / name).string());
    }
    std::ofstream m(out / "metadata.json");
    m << meta.dump(2) << "\n";
}

std::string timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Maslov-type indices, Bott-type iteration checks and brake orbit certificates"};
    std::string task, config, out = "out";
    std::optional<std::uint64_t> seed_flag;
    unsigned threads = 0;
    app.add_option("task", task, "task to run")->required()->check(CLI::IsMember(task_names));
    app.add_option("--config", config, "JSON run configuration")->required();
    app.add_option("--seed", seed_flag, "override the configured seed");
    app.add_option("--out", out, "output directory");
    app.add_option("--threads", threads, "worker threads, 0 = hardware concurrency");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    try {
        const json cfg = load_config(config);
        if (cfg.contains("task") && cfg.at("task") != task)
            throw InputError("config task '" + cfg.at("task").dump() + "' does not match '" + task + "'");
        const std::uint64_t seed = seed_flag ? *seed_flag : get_or<std::uint64_t>(cfg, "seed", 1);
        Outcome o = run_task(task, cfg, seed, threads);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const json meta = {{"tool", "maslov-brake"}, {"version", tool_version},
                           {"task", task},           {"seed", seed},
                           {"config", config},       {"created", timestamp()},
                           {"seconds", secs},        {"pass", o.pass}};
        o.art.put("summary.txt", task + ": " + o.summary + "\n");
        write_artifacts(out, o.art, meta);
        std::cout << task << ": " << o.summary << "\n";
        return o.pass ? 0 : 1;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const TheoryViolation& e) {
        std::cerr << "theory violation: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
