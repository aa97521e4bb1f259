#include "invcone/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "invcone/algebra.hpp"
#include "invcone/bellman.hpp"
#include "invcone/closed_forms.hpp"
#include "invcone/cone.hpp"
#include "invcone/error.hpp"
#include "invcone/registry.hpp"

namespace invcone::cli {

namespace {

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorCode::Schema, what); }

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) schema(std::string("missing field '") + key + "'");
    return j.at(key);
}

std::size_t count_of(const Json& j, const char* key, std::size_t min) {
    const Json& v = field(j, key);
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min))
        schema(std::string("'") + key + "' must be an integer >= " + std::to_string(min));
    return v.get<std::size_t>();
}

std::vector<double> numbers(const Json& j, const char* what) {
    if (!j.is_array()) schema(std::string(what) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) schema(std::string(what) + " must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    auto [end, ec] = std::to_chars(buf, buf + 16, v, 16);
    std::string s(buf, end);
    return std::string(16 - s.size(), '0') + s;
}

// FNV-1a over the canonical (sorted-key) dump.
std::string digest(const Json& inputs) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : inputs.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return hex64(h);
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Json envelope(const std::string& command, const Json& inputs, std::optional<std::uint64_t> seed) {
    Json r;
    r["command"] = command;
    r["tool_version"] = kToolVersion;
    r["inputs_digest"] = digest(inputs);
    r["seed"] = seed ? Json(*seed) : Json(nullptr);
    r["verdicts"] = Json::object();
    r["certificates"] = Json::object();
    r["witnesses"] = Json::object();
    r["timings"] = Json::object();
    return r;
}

Json cert_to_json(const ConeCertificate& c) {
    return {{"Q", mat_to_json(c.q)},
            {"P", mat_to_json(c.p)},
            {"k", c.k},
            {"betas", c.betas},
            {"checks",
             {{"diagonalized", c.checks.diagonalized},
              {"p_rows_nonneg", c.checks.p_rows_nonneg},
              {"conj_coop", c.checks.conj_coop}}}};
}

Json validation_to_json(const CertificateValidation& v) {
    return {{"ok", v.ok},
            {"inverse_residual", v.inverse_residual},
            {"eigen_residual", v.eigen_residual},
            {"row_residual", v.row_residual},
            {"min_p_entry", v.min_p_entry},
            {"zero_block", v.zero_block},
            {"coop_literal", v.coop.literal},
            {"coop_scaling", v.coop.d},
            {"failures", v.failures}};
}

Json synthesis_to_json(const SynthesisResult& s) {
    Json j{{"status", to_string(s.status)},
           {"failed_condition", s.failed_condition},
           {"note", s.note},
           {"stats",
            {{"common_eigenvectors", s.stats.common_eigenvectors},
             {"candidates", s.stats.candidates},
             {"subsets", s.stats.subsets},
             {"sign_patterns", s.stats.sign_patterns},
             {"completions", s.stats.completions},
             {"repeated_eigenspace", s.stats.repeated_eigenspace},
             {"seed", s.stats.seed}}},
           {"best_checks",
            {{"diagonalized", s.best_checks.diagonalized},
             {"p_rows_nonneg", s.best_checks.p_rows_nonneg},
             {"conj_coop", s.best_checks.conj_coop}}}};
    j["certificate"] = s.certificate ? cert_to_json(*s.certificate) : Json(nullptr);
    return j;
}

Json witness_check_to_json(const WitnessCheck& w) {
    return {{"valid", w.valid},
            {"min_residual", w.min_residual},
            {"max_boundary", w.max_boundary},
            {"max_interior", w.max_interior},
            {"tau", w.tau}};
}

Json verdict_to_json(const Verdict& v) {
    Json j{{"outcome", to_string(v.outcome)},
           {"margin", v.margin},
           {"tau", v.tau},
           {"max_positive", v.max_positive},
           {"max_source", v.max_source},
           {"max_row", v.max_row},
           {"max_col", v.max_col},
           {"note", v.note},
           {"discrete", true}};
    if (v.witness) j["witness_check"] = witness_check_to_json(v.witness_check);
    return j;
}

Json bound_to_json(const EigenBound& b) {
    return {{"lower", b.lower},
            {"upper", b.upper},
            {"gamma", b.gamma},
            {"delta", b.delta},
            {"verification_per_axis", b.verification_per_axis},
            {"check",
             {{"ok", b.check.ok},
              {"max_residual", b.check.max_residual},
              {"min_psi", b.check.min_psi},
              {"nodes", b.check.nodes}}}};
}

GridDomain grid_for(const Problem& p, std::optional<double> h) {
    if (!p.grid) schema("this command needs a 'domain'");
    if (!h) return *p.grid;
    return GridDomain::with_spacing(p.grid->kind, p.grid->lo, p.grid->hi, *h);
}

// Row r of P proportional to t, in any order of rows.
bool rows_proportional(const Mat& p, const std::vector<std::vector<double>>& targets, double tol) {
    std::vector<bool> used(targets.size(), false);
    for (std::size_t r = 0; r < p.rows(); ++r) {
        bool hit = false;
        for (std::size_t t = 0; t < targets.size() && !hit; ++t) {
            if (used[t]) continue;
            double cross = 0.0, scale = 0.0;
            for (std::size_t a = 0; a < p.cols(); ++a)
                for (std::size_t b = a + 1; b < p.cols(); ++b)
                    cross = std::max(cross, std::fabs(p(r, a) * targets[t][b] - p(r, b) * targets[t][a]));
            for (std::size_t a = 0; a < p.cols(); ++a) scale = std::max(scale, std::fabs(p(r, a)));
            if (cross <= tol * scale) used[t] = hit = true;
        }
        if (!hit) return false;
    }
    return true;
}

Json check(const std::string& name, bool ok, Json detail = Json::object()) {
    detail["name"] = name;
    detail["ok"] = ok;
    return detail;
}

bool all_ok(const Json& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const Json& c) { return c.at("ok").get<bool>(); });
}

}  // namespace

// ---------------------------------------------------------------- I/O

Json mat_to_json(const Mat& m) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat mat_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) schema("matrix must be a non-empty array of rows");
    std::vector<std::vector<double>> rows;
    for (const auto& r : j) rows.push_back(numbers(r, "matrix row"));
    for (const auto& r : rows)
        if (r.size() != rows[0].size() || r.empty()) schema("matrix rows must have equal, non-zero length");
    return Mat::from_rows(rows);
}

Json grid_to_json(const GridDomain& g) {
    return {{"kind", g.kind == GridDomain::Kind::interval ? "interval" : "rectangle"},
            {"lo", g.lo},
            {"hi", g.hi},
            {"resolution", g.resolution}};
}

GridDomain grid_from_json(const Json& j) {
    const Json& kind = field(j, "kind");
    GridDomain g;
    if (kind == "interval") g.kind = GridDomain::Kind::interval;
    else if (kind == "rectangle") g.kind = GridDomain::Kind::rectangle;
    else schema("domain kind must be 'interval' or 'rectangle'");
    g.lo = numbers(field(j, "lo"), "domain lo");
    g.hi = numbers(field(j, "hi"), "domain hi");
    const Json& res = field(j, "resolution");
    if (!res.is_array()) schema("domain resolution must be an array");
    for (const auto& v : res) {
        if (!v.is_number_integer() || v.get<long long>() < 0) schema("resolution entries must be integers");
        g.resolution.push_back(v.get<std::size_t>());
    }
    try {
        g.validate();
    } catch (const Error& e) {
        schema(e.what());
    }
    return g;
}

Json field_to_json(const DiscreteField& f) {
    Json comps = Json::array();
    for (std::size_t j = 0; j < f.m; ++j) {
        std::vector<double> c(f.grid.nodes());
        for (std::size_t p = 0; p < c.size(); ++p) c[p] = f.at(p, j);
        comps.push_back(c);
    }
    return {{"grid", grid_to_json(f.grid)}, {"m", f.m}, {"components", comps}};
}

DiscreteField field_from_json(const Json& j) {
    DiscreteField f;
    f.grid = grid_from_json(field(j, "grid"));
    f.m = count_of(j, "m", 1);
    const Json& comps = field(j, "components");
    if (!comps.is_array() || comps.size() != f.m) schema("field needs m component arrays");
    f.values.assign(f.m * f.grid.nodes(), 0.0);
    for (std::size_t c = 0; c < f.m; ++c) {
        const auto v = numbers(comps[c], "field component");
        if (v.size() != f.grid.nodes()) schema("field component length differs from the node count");
        for (std::size_t p = 0; p < v.size(); ++p) f.values[f.m * p + c] = v[p];
    }
    return f;
}

std::string field_csv(const DiscreteField& f) {
    std::ostringstream os;
    os << (f.grid.dim() == 1 ? "x" : "x,y") << ",component,value\n";
    auto num = [](double v) {
        char buf[32];
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, end);
    };
    for (std::size_t p = 0; p < f.grid.nodes(); ++p) {
        const auto x = f.grid.coords(p);
        for (std::size_t j = 0; j < f.m; ++j) {
            for (double xi : x) os << num(xi) << ',';
            os << j << ',' << num(f.at(p, j)) << '\n';
        }
    }
    return os.str();
}

Problem parse_problem(const Json& j) {
    if (!j.is_object()) schema("problem file must be a JSON object");
    Problem p;
    p.source = j;
    p.system.n = count_of(j, "n", 1);
    p.system.m = count_of(j, "m", 1);
    const Json& b = field(j, "B");
    if (!b.is_array() || b.size() != p.system.n)
        schema("'B' must list exactly n = " + std::to_string(p.system.n) + " matrices");
    for (const auto& bi : b) p.system.b.push_back(mat_from_json(bi));
    p.system.c = mat_from_json(field(j, "C"));
    p.system.validate();
    if (j.contains("domain")) {
        p.grid = grid_from_json(j.at("domain"));
        if (p.grid->dim() != p.system.n) schema("domain dimension differs from n");
    }
    if (j.contains("cone")) {
        const Json& c = j.at("cone");
        p.cone_p = mat_from_json(field(c, "P"));
        p.cone_k = count_of(c, "k", 1);
        if (p.cone_p->rows() != p.system.m || p.cone_p->cols() != p.system.m || p.cone_k > p.system.m)
            schema("cone P must be m x m with 1 <= k <= m");
    }
    if (j.contains("q_candidate")) {
        p.q_candidate = mat_from_json(j.at("q_candidate"));
        if (p.q_candidate->rows() != p.system.m || p.q_candidate->cols() != p.system.m)
            schema("q_candidate must be m x m");
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) schema("seed must be a non-negative integer");
        p.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("trials")) p.trials = count_of(j, "trials", 1);
    return p;
}

Json problem_to_json(const Problem& p) {
    Json j{{"n", p.system.n}, {"m", p.system.m}, {"C", mat_to_json(p.system.c)}};
    j["B"] = Json::array();
    for (const auto& b : p.system.b) j["B"].push_back(mat_to_json(b));
    if (p.grid) j["domain"] = grid_to_json(*p.grid);
    if (p.cone_p) j["cone"] = {{"P", mat_to_json(*p.cone_p)}, {"k", p.cone_k}};
    if (p.q_candidate) j["q_candidate"] = mat_to_json(*p.q_candidate);
    if (p.seed) j["seed"] = *p.seed;
    if (p.trials) j["trials"] = *p.trials;
    return j;
}

Problem builtin_problem(const std::string& id) {
    Problem p;
    if (id == "prop1.4") {
        p.system = prop14_system(1.0, 0.0, 1.0, 0.0);
        p.grid = GridDomain::interval(0, 1, 401);
    } else {
        const auto e = example_registry(id);
        p.system = e.system;
        if (e.lo.size() == 1) {
            p.grid = GridDomain::interval(e.lo[0], e.hi[0], 101);
        } else {
            // disks are analyzed on their bounding box
            p.grid = GridDomain::rectangle(e.lo[0], e.hi[0], e.lo[1], e.hi[1], 31, 31);
        }
        if (e.cone_p) {
            p.cone_p = *e.cone_p;
            p.cone_k = e.cone_k;
        }
        p.q_candidate = e.q_candidate;
    }
    p.source = problem_to_json(p);
    return p;
}

Json strip_timings(Json report) {
    report.erase("timings");
    return report;
}

// ---------------------------------------------------------------- commands

Json cmd_analyze(const Problem& p) {
    const auto t0 = Clock::now();
    Json r = envelope("analyze", p.source, kDefaultSeed);
    const auto& sys = p.system;
    r["verdicts"]["commute"] = commute_check(sys);

    Json eig = Json::array();
    for (std::size_t i = 0; i < sys.n; ++i) {
        const auto d = eigen(sys.b[i]);
        Json values = Json::array();
        for (const auto& z : d.eigenvalues) values.push_back({{"re", z.real()}, {"im", z.imag()}});
        Json clusters = Json::array();
        for (const auto& c : d.clusters)
            clusters.push_back({{"value", c.value},
                                {"real", c.real},
                                {"algebraic", c.algebraic_multiplicity},
                                {"geometric", c.geometric_multiplicity}});
        eig.push_back({{"matrix", "B" + std::to_string(i + 1)},
                       {"eigenvalues", values},
                       {"clusters", clusters},
                       {"real_eigenbasis", d.real_eigenbasis ? mat_to_json(*d.real_eigenbasis) : Json(nullptr)},
                       {"basis_condition", d.basis_condition}});
    }
    r["eigen"] = eig;

    const auto coop = is_cooperative(sys.c);
    r["verdicts"]["c_cooperative"] = coop.is_cooperative;
    r["cooperativity"] = {{"is_cooperative", coop.is_cooperative},
                          {"worst_offdiag_margin", coop.worst_offdiag_margin},
                          {"worst_rowsum_margin", coop.worst_rowsum_margin},
                          {"strict_level", coop.strict_level}};
    const auto flux = flux_condition_orthant(sys.c, 200);
    r["flux"] = {{"holds", flux.holds}, {"samples_checked", flux.samples_checked}, {"worst_value", flux.worst.value}};

    if (p.q_candidate) {
        const auto mm = is_m_matrix(*p.q_candidate);
        r["m_matrix"] = {{"is_m_matrix", mm.is_m_matrix},
                         {"s", mm.s},
                         {"spectral_radius", mm.spectral_radius},
                         {"offdiag_nonpositive", mm.offdiag_nonpositive},
                         {"inverse_nonnegative", mm.inverse_nonnegative}};
        r["verdicts"]["q_m_matrix"] = mm.is_m_matrix;
    }

    const auto full = synthesize_full_cone(sys);
    r["synthesis"]["full"] = synthesis_to_json(full);
    r["verdicts"]["full_cone"] = to_string(full.status);
    if (full.certificate) r["certificates"]["full"] = cert_to_json(*full.certificate);
    if (!full.found()) {
        const auto partial = synthesize_partial_cone(sys);
        r["synthesis"]["partial"] = synthesis_to_json(partial);
        r["verdicts"]["partial_cone"] = to_string(partial.status);
        if (partial.certificate) r["certificates"]["partial"] = cert_to_json(*partial.certificate);
    }
    if (p.cone_p) {
        const auto cert = certificate_from_cone(sys, *p.cone_p, p.cone_k);
        const auto v = validate_certificate(sys, cert);
        r["certificates"]["user"] = cert_to_json(cert);
        r["user_cone"] = validation_to_json(v);
        r["verdicts"]["user_cone_valid"] = v.ok;
    }
    r["timings"]["total_ms"] = ms_since(t0);
    return r;
}

Json cmd_wmp(const Problem& p, std::optional<double> h, Scheme scheme) {
    const auto t0 = Clock::now();
    const GridDomain g = grid_for(p, h);
    Json inputs{{"problem", p.source}, {"grid", grid_to_json(g)}, {"scheme", to_string(scheme)}};
    Json r = envelope("wmp", inputs, std::nullopt);
    const auto op = assemble(p.system, g, scheme);
    const auto v = wmp_certificate(op);
    r["grid"] = grid_to_json(g);
    r["scheme"] = to_string(scheme);
    r["cfl_ratio"] = op.cfl_ratio;
    r["warnings"] = op.warnings;
    r["verdicts"]["wmp"] = verdict_to_json(v);
    if (v.witness) r["witnesses"]["wmp"] = field_to_json(*v.witness);
    r["timings"]["total_ms"] = ms_since(t0);
    return r;
}

Json cmd_invariance(const Problem& p, std::optional<std::size_t> trials, std::optional<std::uint64_t> seed,
                    std::optional<double> h, Scheme scheme) {
    const auto t0 = Clock::now();
    const GridDomain g = grid_for(p, h);
    const std::size_t nt = trials.value_or(p.trials.value_or(200));
    const std::uint64_t sd = seed.value_or(p.seed.value_or(kDefaultSeed));
    Json inputs{{"problem", p.source}, {"grid", grid_to_json(g)}, {"scheme", to_string(scheme)}, {"trials", nt}};
    Json r = envelope("invariance", inputs, sd);
    r["grid"] = grid_to_json(g);
    r["scheme"] = to_string(scheme);
    r["trials"] = nt;

    std::optional<ConeCertificate> cert;
    if (p.cone_p) {
        cert = certificate_from_cone(p.system, *p.cone_p, p.cone_k);
        r["certificates"]["source"] = "problem file";
    } else {
        const auto s = synthesize_partial_cone(p.system);
        r["synthesis"] = synthesis_to_json(s);
        cert = s.certificate;
        r["certificates"]["source"] = "synthesized";
    }
    if (!cert) {
        r["verdicts"]["invariance"] = {{"outcome", "no_cone"}, {"note", "no cone given and none synthesized"}};
        r["timings"]["total_ms"] = ms_since(t0);
        return r;
    }
    r["certificates"]["cone"] = cert_to_json(*cert);
    r["certificates"]["validation"] = validation_to_json(validate_certificate(p.system, *cert));
    const auto v = monte_carlo_invariance(p.system, *cert, g, nt, sd, scheme);
    r["verdicts"]["invariance"] = verdict_to_json(v);
    if (v.witness) r["witnesses"]["invariance"] = field_to_json(*v.witness);
    if (cert->k == p.system.m && g.interior_nodes().size() * p.system.m <= kMaxDenseUnknowns) {
        const auto full = cone_certificate(p.system, *cert, g, scheme);
        r["verdicts"]["cone_certificate"] = verdict_to_json(full);
        if (full.witness) r["witnesses"]["cone_certificate"] = field_to_json(*full.witness);
    }
    r["timings"]["total_ms"] = ms_since(t0);
    return r;
}

Json cmd_eigen(const Problem& p) {
    const auto t0 = Clock::now();
    if (!p.grid) schema("this command needs a 'domain'");
    Json r = envelope("eigen", p.source, kDefaultSeed);
    std::optional<ConeCertificate> cert;
    if (p.cone_p && p.cone_k == p.system.m) {
        cert = certificate_from_cone(p.system, *p.cone_p, p.cone_k);
    } else {
        const auto s = synthesize_full_cone(p.system);
        r["synthesis"] = synthesis_to_json(s);
        cert = s.certificate;
    }
    if (!cert) {
        r["verdicts"]["eigen"] = {{"outcome", "no_full_cone"}, {"note", "the reduction needs a full cone"}};
        r["timings"]["total_ms"] = ms_since(t0);
        return r;
    }
    auto bp = reduce_to_bellman(p.system, *cert);
    bp.lo = p.grid->lo;
    bp.hi = p.grid->hi;
    const auto b = supersolution_lower_bound(bp);
    r["certificates"]["cone"] = cert_to_json(*cert);
    r["drifts"] = bp.drifts;
    r["domain"] = {{"lo", bp.lo}, {"hi", bp.hi}};
    r["bound"] = bound_to_json(b);
    r["verdicts"]["eigen"] = {{"outcome", b.lower > 0 && b.check.ok ? "positive" : "unresolved"},
                              {"lower", b.lower},
                              {"upper", b.upper}};
    r["timings"]["total_ms"] = ms_since(t0);
    return r;
}

// ---------------------------------------------------------------- reproduce

namespace {

Json analytic_witness_checks(const RegistryEntry& e) {
    const auto& w = *e.witness;
    const auto pts = interior_points(e, 1000);
    const auto bd = boundary_points(e, 4000);
    double rmin = INFINITY, rabs = 0.0, bmax = -INFINITY, imax = -INFINITY;
    for (const auto& x : pts) {
        for (double v : residual_at(e.system, w, x)) {
            rmin = std::min(rmin, v);
            rabs = std::max(rabs, std::fabs(v));
        }
        for (std::size_t j = 0; j < w.m(); ++j) imax = std::max(imax, w.value(j, x));
    }
    for (const auto& x : bd)
        for (std::size_t j = 0; j < w.m(); ++j) bmax = std::max(bmax, w.value(j, x));
    return {{"field", w.name()},
            {"min_residual", rmin},
            {"max_abs_residual", rabs},
            {"boundary_max", bmax},
            {"interior_max", imax},
            {"interior_points", pts.size()},
            {"boundary_points", bd.size()}};
}

Reproduction reproduce_ex11() {
    const auto e = example_registry("ex1.1");
    Json checks = Json::array();
    const auto a = analytic_witness_checks(e);
    const auto& w = *e.witness;
    double u1b = 0.0, u2b = -INFINITY;
    for (const auto& x : boundary_points(e, 4000)) {
        u1b = std::max(u1b, std::fabs(w.value(0, x)));
        u2b = std::max(u2b, w.value(1, x));
    }
    checks.push_back(check("residuals vanish", a["max_abs_residual"].get<double>() <= 1e-10, a));
    checks.push_back(check("u1 = 0 on the circle", u1b <= 1e-12, {{"max_abs", u1b}}));
    checks.push_back(check("u2 <= 1/3 + 4 - 20 on the circle", u2b <= 1.0 / 3 + 4 - 20 + 1e-12, {{"max", u2b}}));
    const double center = w.value(0, Point{0, 0});
    checks.push_back(check("u1(0,0) = 1", center == 1.0, {{"value", center}}));
    checks.push_back(check("C cooperative", is_cooperative(e.system.c).is_cooperative));
    Reproduction out;
    out.reproduced = all_ok(checks);
    out.report["checks"] = checks;
    out.report["verdicts"]["expected"] = "wmp_fails";
    out.report["verdicts"]["observed"] = out.reproduced ? "wmp_fails" : "unconfirmed";
    return out;
}

Reproduction reproduce_ex13() {
    Json checks = Json::array();
    const auto e = example_registry("ex1.3");
    const auto a = analytic_witness_checks(e);
    checks.push_back(check("strict subsolution", a["min_residual"].get<double>() > 0, a));
    checks.push_back(check("nonpositive on the boundary", a["boundary_max"].get<double>() <= 0));
    checks.push_back(check("positive inside", a["interior_max"].get<double>() > 0));
    const auto full = synthesize_full_cone(e.system);
    checks.push_back(check("no full cone", !full.found(), {{"failed_condition", full.failed_condition}}));
    const auto partial = synthesize_partial_cone(e.system);
    Json pj = synthesis_to_json(partial);
    checks.push_back(check("partial cone found", partial.found(), {{"synthesis", pj}}));
    const auto g = GridDomain::rectangle(0, 1, 0, 1, 17, 17);
    const auto decoupled = wmp_certificate(assemble(example_1_3(0, 0).system, g));
    checks.push_back(check("decoupled system satisfies the discrete wMP", decoupled.outcome == Outcome::holds,
                           {{"verdict", verdict_to_json(decoupled)}}));
    Reproduction out;
    out.reproduced = all_ok(checks);
    out.report["checks"] = checks;
    out.report["verdicts"]["expected"] = "wmp_fails for eps, eps' != 0; holds at eps = eps' = 0";
    out.report["verdicts"]["observed"] = out.reproduced ? "reproduced" : "unconfirmed";
    return out;
}

Reproduction reproduce_ex18() {
    Json checks = Json::array();
    const auto e = example_registry("ex1.8");
    const auto s = synthesize_full_cone(e.system);
    Json cert = s.certificate ? cert_to_json(*s.certificate) : Json(nullptr);
    bool rows = false, diag = false;
    if (s.certificate) {
        rows = rows_proportional(s.certificate->p, {{1, 0.5}, {4, 1}}, 1e-10);
        const Mat d = s.certificate->p * e.system.b[0] * s.certificate->q;
        diag = max_abs_diff(d, Mat{{2, 0}, {0, 4}}) <= 1e-10;
    }
    checks.push_back(check("full cone synthesized", s.found(), {{"certificate", cert}}));
    checks.push_back(check("Q^-1 B1 Q = diag(2, 4)", diag));
    checks.push_back(check("cone rows (1, 1/2), (4, 1)", rows));
    if (s.certificate) {
        const auto g = GridDomain::with_spacing(GridDomain::Kind::rectangle, {0, 0}, {1, 1}, 1.0 / 30);
        const auto v = cone_certificate(e.system, *s.certificate, g);
        checks.push_back(check("discrete cone certificate at h = 1/30", v.outcome == Outcome::holds,
                               {{"verdict", verdict_to_json(v)}}));
        const auto mc = monte_carlo_invariance(e.system, *s.certificate, g, 200, 42);
        checks.push_back(check("Monte-Carlo, 200 trials", mc.outcome == Outcome::holds && mc.margin >= -kMcTol,
                               {{"verdict", verdict_to_json(mc)}}));
        auto bp = reduce_to_bellman(e.system, *s.certificate);
        const auto b = supersolution_lower_bound(bp);
        checks.push_back(check("Bellman eigenvalue lower bound > 0", b.lower > 0 && b.check.ok,
                               {{"bound", bound_to_json(b)}}));
    }
    Reproduction out;
    out.reproduced = all_ok(checks);
    out.report["checks"] = checks;
    out.report["verdicts"]["expected"] = "cone_invariant";
    out.report["verdicts"]["observed"] = out.reproduced ? "cone_invariant" : "unconfirmed";
    return out;
}

Reproduction reproduce_ex110() {
    Json checks = Json::array();
    const auto e = example_registry("ex1.10");
    const auto half = certificate_from_cone(e.system, *e.cone_p, e.cone_k);
    const auto val = validate_certificate(e.system, half);
    checks.push_back(check("half-space certificate validates", val.ok, {{"validation", validation_to_json(val)}}));
    const auto g = GridDomain::with_spacing(GridDomain::Kind::rectangle, {0, 0}, {1, 1}, 1.0 / 30);
    const auto mc = monte_carlo_invariance(e.system, half, g, 200, 42);
    checks.push_back(check("half-space invariant over 200 trials", mc.outcome == Outcome::holds,
                           {{"verdict", verdict_to_json(mc)}}));
    const ConeCertificate orthant{Mat::identity(2), Mat::identity(2), 2, {}, {}};
    const auto o = monte_carlo_invariance(e.system, orthant, g, 200, 42);
    checks.push_back(check("orthant not invariant", o.outcome == Outcome::fails && o.witness_check.valid,
                           {{"verdict", verdict_to_json(o)}}));
    const auto& w = *e.witness;
    const double u1 = w.value(0, Point{0.5, 0.5});
    checks.push_back(check("u1(1/2, 1/2) = 1/256", u1 == 1.0 / 256, {{"value", u1}}));
    const auto a = analytic_witness_checks(e);
    checks.push_back(check("pair is a subsolution", a["min_residual"].get<double>() >= -1e-10, a));
    checks.push_back(check("pair nonpositive on the boundary", a["boundary_max"].get<double>() <= 0));
    Reproduction out;
    out.reproduced = all_ok(checks);
    out.report["checks"] = checks;
    out.report["verdicts"]["expected"] = "half-space invariant, wMP fails";
    out.report["verdicts"]["observed"] = out.reproduced ? "reproduced" : "unconfirmed";
    return out;
}

Reproduction reproduce_remark() {
    Json checks = Json::array();
    const auto e = example_registry("remark1.8-matrices");
    const Mat q = *e.q_candidate;
    const Mat conj = conjugate(e.system.c, q);
    const double err = max_abs_diff(conj, Mat{{-4, 3}, {0, -1}});
    checks.push_back(check("Q^-1 C Q = [[-4, 3], [0, -1]]", err <= 1e-12,
                           {{"max_error", err}, {"conjugate", mat_to_json(conj)}}));
    checks.push_back(check("Q is an M-matrix", is_m_matrix(q).is_m_matrix));
    checks.push_back(check("C cooperative", is_cooperative(e.system.c).is_cooperative));
    checks.push_back(check("Q^-1 C Q cooperative", is_cooperative(conj).is_cooperative));
    const auto cert = certificate_from_cone(e.system, *e.cone_p, e.cone_k);
    const auto v = cone_certificate(e.system, cert, GridDomain::interval(0, 1, 101));
    checks.push_back(check("discrete cone certificate", v.outcome == Outcome::holds, {{"verdict", verdict_to_json(v)}}));
    Reproduction out;
    out.reproduced = all_ok(checks);
    out.report["checks"] = checks;
    out.report["verdicts"]["expected"] = "cone_invariant";
    out.report["verdicts"]["observed"] = out.reproduced ? "cone_invariant" : "unconfirmed";
    return out;
}

Reproduction reproduce_figure1() {
    const auto samples = figure1_samples();
    Json curves = Json::object();
    bool increasing = true;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        char buf[32];
        const std::string key(buf, std::to_chars(buf, buf + sizeof buf, s.rho).ptr);
        if (!curves.contains(key)) curves[key] = {{"count", 0}};
        curves[key]["count"] = curves[key]["count"].get<int>() + 1;
        if (i > 0 && samples[i - 1].rho == s.rho && !(s.value > samples[i - 1].value)) increasing = false;
    }
    Json checks = Json::array();
    checks.push_back(check("4 curves x 400 samples", samples.size() == 1600, {{"samples", samples.size()}}));
    checks.push_back(check("strictly increasing in c", increasing));
    Reproduction out;
    out.reproduced = all_ok(checks);
    out.report["checks"] = checks;
    out.report["curves"] = curves;
    out.report["verdicts"]["expected"] = "increasing curves";
    out.report["verdicts"]["observed"] = increasing ? "increasing curves" : "not monotone";
    out.csv = figure1_csv(samples);
    return out;
}

Reproduction reproduce_prop14() {
    Json checks = Json::array();
    const ZetaQuery q{1.0, 1.0, 0.0};
    const double z = zeta(1.0);
    checks.push_back(check("zeta(1) = 3.0998 +- 1e-3", std::fabs(z - 3.0998) <= 1e-3, {{"value", z}}));
    const auto pred = wmp_fails_prediction(q);
    checks.push_back(check("failure predicted", pred.fails, {{"value", pred.value}, {"margin", pred.margin}}));
    const auto uk = u_k_family(q, 1.0, 50);
    const double u0 = uk.value(0, Point{0.0}), du0 = uk.gradient(0, Point{0.0})[0], u1 = uk.value(0, Point{1.0});
    const auto sys = prop14_system(1.0, 0.0, 1.0, 0.0);
    double res = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double x = (i + 0.5) / 1000;
        for (double r : residual_at(sys, uk, Point{x})) res = std::max(res, std::fabs(r));
    }
    checks.push_back(check("u_k(0) = 0", u0 == 0.0, {{"value", u0}}));
    checks.push_back(check("u_k'(0) > 0", du0 > 0, {{"value", du0}}));
    checks.push_back(check("u_k(1) <= 0", u1 <= 0, {{"value", u1}}));
    checks.push_back(check("residual <= 1e-8", res <= 1e-8, {{"max_abs", res}}));
    for (int inv : {400, 200, 100}) {
        const auto g = GridDomain::with_spacing(GridDomain::Kind::interval, {0}, {1}, 1.0 / inv);
        const auto v = wmp_certificate(assemble(sys, g));
        checks.push_back(check("discrete wMP fails at h = 1/" + std::to_string(inv),
                               v.outcome == Outcome::fails && v.witness_check.valid, {{"verdict", verdict_to_json(v)}}));
    }
    Reproduction out;
    out.reproduced = all_ok(checks);
    out.report["checks"] = checks;
    out.report["verdicts"]["expected"] = "wmp_fails";
    out.report["verdicts"]["observed"] = out.reproduced ? "wmp_fails" : "unconfirmed";
    return out;
}

Reproduction reproduce_prop16() {
    Json checks = Json::array();
    const auto r = prop16_construct({});
    const auto& pp = r.params;
    const auto& c = r.checks;
    Json params{{"eps", pp.eps},         {"eps_tilde", pp.eps_tilde}, {"alpha", pp.alpha},
                {"beta", pp.beta},       {"c_tilde", pp.c_tilde},     {"x_star", pp.x_star},
                {"sigma1", pp.sigma1},   {"sigma2", pp.sigma2},       {"sigma", pp.sigma},
                {"c_threshold", pp.c_threshold}, {"delta", pp.delta}, {"c", r.c}};
    checks.push_back(check("strict residuals", c.min_residual_u > 0 && c.min_residual_v > 0,
                           {{"min_residual_u", c.min_residual_u}, {"min_residual_v", c.min_residual_v}}));
    const double bmax = std::max({c.u_at_0, c.u_at_1, c.v_at_0, c.v_at_1});
    checks.push_back(check("boundary values <= 0", bmax <= 0, {{"max", bmax}}));
    checks.push_back(check("u + delta x positive inside", c.max_interior_u > 0,
                           {{"max", c.max_interior_u}, {"argmax", c.argmax_interior_u}}));
    const auto s = prop16_restricted(r, pp.c_threshold / 2);
    checks.push_back(check("restricted pair violates wMP at c0 / 2", s.violates_wmp(),
                           {{"lo", s.lo}, {"hi", s.hi}, {"min_residual_u", s.min_residual_u},
                            {"min_residual_v", s.min_residual_v}, {"max_interior", s.max_interior}}));
    Reproduction out;
    out.reproduced = all_ok(checks);
    out.report["parameters"] = params;
    out.report["checks"] = checks;
    out.report["verdicts"]["expected"] = "wmp_fails";
    out.report["verdicts"]["observed"] = out.reproduced ? "wmp_fails" : "unconfirmed";
    return out;
}

}  // namespace

Reproduction cmd_reproduce(const std::string& id) {
    const auto t0 = Clock::now();
    Reproduction out;
    if (id == "ex1.1") out = reproduce_ex11();
    else if (id == "ex1.3") out = reproduce_ex13();
    else if (id == "ex1.8") out = reproduce_ex18();
    else if (id == "ex1.10") out = reproduce_ex110();
    else if (id == "remark1.8-matrices") out = reproduce_remark();
    else if (id == "figure1") out = reproduce_figure1();
    else if (id == "prop1.4") out = reproduce_prop14();
    else if (id == "prop1.6") out = reproduce_prop16();
    else throw Error(ErrorCode::UnknownId, "unknown reproduction id '" + id + "'");
    Json r = envelope("reproduce", Json{{"id", id}}, id == "ex1.8" || id == "ex1.10" ? std::optional<std::uint64_t>(42)
                                                                                     : std::nullopt);
    r["id"] = id;
    for (auto& [k, v] : out.report.items()) r[k] = v;
    r["reproduced"] = out.reproduced;
    r["timings"]["total_ms"] = ms_since(t0);
    out.report = std::move(r);
    return out;
}

// ---------------------------------------------------------------- entry point

namespace {

Problem load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Schema, "cannot open '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::Schema, std::string("invalid JSON: ") + e.what());
    }
    return parse_problem(j);
}

int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::ConvergenceFailure: return kInternal;
        default: return kInput;
    }
}

void emit(const Json& report, const std::string& out_dir, const std::string& name, std::ostream& out) {
    const std::string text = report.dump(2) + "\n";
    if (out_dir.empty()) {
        out << text;
        return;
    }
    std::filesystem::create_directories(out_dir);
    std::ofstream f(std::filesystem::path(out_dir) / name);
    f << text;
    if (!f) throw std::runtime_error("cannot write report to " + out_dir);
}

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
    const std::filesystem::path d = dir.empty() ? "." : dir;
    std::filesystem::create_directories(d);
    std::ofstream f(d / name);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + (d / name).string());
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Invariant cones and maximum principles for linear elliptic systems"};
    app.require_subcommand(1);
    std::string file, id, out_dir, scheme_name = "centered";
    std::optional<double> grid_h;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    bool csv = false;

    auto* analyze = app.add_subcommand("analyze", "matrix conditions and cone synthesis");
    auto* wmp = app.add_subcommand("wmp", "discrete maximum-principle certificate");
    auto* inv = app.add_subcommand("invariance", "Monte-Carlo cone invariance");
    auto* eig = app.add_subcommand("eigen", "Bellman principal eigenvalue bounds");
    auto* rep = app.add_subcommand("reproduce", "run a worked example end to end");
    auto* exp = app.add_subcommand("export", "print the problem file of a worked example");
    for (auto* sc : {analyze, wmp, inv, eig}) sc->add_option("file", file, "problem file (JSON)")->required();
    rep->add_option("id", id, "ex1.1 | ex1.3 | ex1.8 | ex1.10 | remark1.8-matrices | figure1 | prop1.4 | prop1.6")
        ->required();
    exp->add_option("id", id, "ex1.1 | ex1.3 | ex1.8 | ex1.10 | remark1.8-matrices | prop1.4")->required();
    for (auto* sc : {wmp, inv}) {
        sc->add_option("--grid", grid_h, "grid spacing h (overrides the file resolution)")->check(CLI::PositiveNumber);
        sc->add_option("--scheme", scheme_name, "centered | upwind")->check(CLI::IsMember({"centered", "upwind"}));
    }
    inv->add_option("--trials", trials, "number of Monte-Carlo trials")->check(CLI::PositiveNumber);
    inv->add_option("--seed", seed, "random seed");
    for (auto* sc : {analyze, wmp, inv, eig, rep}) sc->add_option("--out", out_dir, "write the report into this directory");
    wmp->add_flag("--csv", csv, "also write the witness as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInput;
    }
    const Scheme scheme = scheme_name == "upwind" ? Scheme::upwind : Scheme::centered;
    try {
        if (analyze->parsed()) {
            emit(cmd_analyze(load(file)), out_dir, "report.json", out);
        } else if (wmp->parsed()) {
            const Json r = cmd_wmp(load(file), grid_h, scheme);
            emit(r, out_dir, "report.json", out);
            if (csv && r["witnesses"].contains("wmp"))
                write_file(out_dir, "witness.csv", field_csv(field_from_json(r["witnesses"]["wmp"])));
        } else if (inv->parsed()) {
            emit(cmd_invariance(load(file), trials, seed, grid_h, scheme), out_dir, "report.json", out);
        } else if (eig->parsed()) {
            emit(cmd_eigen(load(file)), out_dir, "report.json", out);
        } else if (rep->parsed()) {
            const auto r = cmd_reproduce(id);
            emit(r.report, out_dir, "report.json", out);
            if (r.csv) write_file(out_dir, "figure1.csv", *r.csv);
            if (!r.reproduced) {
                err << "reproduction of " << id << " did not match the asserted verdict\n";
                return kMismatch;
            }
        } else if (exp->parsed()) {
            out << problem_to_json(builtin_problem(id)).dump(2) << "\n";
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kOk;
}

}  // namespace invcone::cli
