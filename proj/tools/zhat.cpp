// Command-line front end: density, measure, verify and sn subcommands.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zhat.hpp"

namespace {

using zhat::Json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!trim(item).empty()) out.push_back(trim(item));
    return out;
}

/// Integer that may be written as 1e7.
std::int64_t parse_count(const std::string& s) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used == s.size()) return v;
        const double d = std::stod(s, &used);
        if (used == s.size() && d == std::floor(d) && std::fabs(d) < 9e18) return static_cast<std::int64_t>(d);
    } catch (const std::exception&) {
    }
    throw UsageError("expected an integer, got '" + s + "'");
}

double parse_real(const std::string& s) {
    try {
        std::size_t used = 0;
        const double d = std::stod(s, &used);
        if (used == s.size()) return d;
    } catch (const std::exception&) {
    }
    throw UsageError("expected a number, got '" + s + "'");
}

std::vector<std::int64_t> int_list(const std::string& s) {
    std::vector<std::int64_t> v;
    for (const auto& t : split(s, ',')) v.push_back(parse_count(t));
    return v;
}

std::vector<std::uint64_t> posint_list(const std::string& s) {
    std::vector<std::uint64_t> v;
    for (auto x : int_list(s)) {
        if (x < 1) throw UsageError("expected positive integers in '" + s + "'");
        v.push_back(static_cast<std::uint64_t>(x));
    }
    return v;
}

std::vector<double> real_list(const std::string& s) {
    std::vector<double> v;
    for (const auto& t : split(s, ',')) v.push_back(parse_real(t));
    return v;
}

/// Options shared by all subcommands.
struct Globals {
    std::string config;
    std::string format = "json";
    unsigned threads = 1;
    std::uint64_t seed = 42;
    std::string budget = "1e8";
    std::string box = "auto";
    std::string radius = "0";
};

zhat::SetOptions set_options(const Globals& g) {
    zhat::SetOptions o;
    o.threads = std::max(1u, g.threads);
    const auto b = parse_count(g.budget);
    if (b < 1) throw UsageError("budget must be positive");
    o.budget = static_cast<std::uint64_t>(b);
    if (g.box == "positive") o.positive_only = true;
    else if (g.box == "symmetric") o.positive_only = false;
    else if (g.box != "auto") throw UsageError("--box must be auto, positive or symmetric");
    o.preimage_radius = parse_count(g.radius);
    return o;
}

zhat::CompiledSet compile_set(const std::string& text, unsigned dim, const Globals& g) {
    if (text.empty()) throw UsageError("--set is required");
    zhat::SetExpr e = zhat::parse_set(text);
    if (dim) {
        const unsigned f = zhat::fixed_dim(e.root);
        if (f && f != dim) throw UsageError("--dim " + std::to_string(dim) + " conflicts with the expression dimension " + std::to_string(f));
        e.dim = dim;
    }
    return zhat::compile(e, set_options(g));
}

/// Default chain: primorial^k for a k-free atom, primorial otherwise.
zhat::ModulusChain chain_for(const std::string& spec, const zhat::CompiledSet& set) {
    if (spec != "auto") return zhat::ModulusChain::parse(spec);
    if (const auto* k = std::get_if<zhat::KFree>(&set.expr().root->v)) return zhat::ModulusChain::primorial_power(k->k);
    return zhat::ModulusChain::primorial();
}

/// Result of a subcommand before formatting.
struct Output {
    Json result;
    std::string csv;     ///< native CSV, if the result is tabular
    std::string text;    ///< native table/plain text, if any
    int exit_code = 0;
};

void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), rows);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", rows);
    } else {
        rows.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
    }
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

int verdict_code(zhat::Verdict v) {
    switch (v) {
    case zhat::Verdict::Pass: return 0;
    case zhat::Verdict::Fail: return 1;
    case zhat::Verdict::Inconclusive: return 3;
    }
    return 1;
}

std::string density_csv(const std::vector<zhat::DensityReport>& reps) {
    std::ostringstream os;
    os << "method,grid,value,lo,hi\n";
    char buf[128];
    for (const auto& r : reps)
        for (std::size_t i = 0; i < r.grid.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s,%.10g,%.12g,", r.method.c_str(), r.grid[i], r.values[i]);
            os << buf;
            if (i < r.values_lo.size()) os << r.values_lo[i];
            os << ',';
            if (i < r.values_hi.size()) os << r.values_hi[i];
            os << '\n';
        }
    return os.str();
}

// ---------------------------------------------------------------------------

struct DensityArgs {
    std::string set, method = "asymptotic", r = "1e6", grid, step = "[0,1]", L, R, s = "1.5,1.2,1.1,1.05,1.01,1.001", N, chain = "auto";
    double alpha = -1;
    bool alpha_given = false;
    std::size_t tail = 5, levels = 4;
    unsigned dim = 0;
};

Output cmd_density(const DensityArgs& a, const Globals& g) {
    if (a.set.empty()) throw UsageError("--set is required");
    const zhat::CompiledSet X = compile_set(a.set, a.dim, g);
    const std::int64_t r = parse_count(a.r);
    if (r < 1) throw UsageError("--r must be >= 1");
    const std::vector<std::int64_t> grid = a.grid.empty() ? zhat::geometric_grid(r) : int_list(a.grid);
    const std::vector<std::int64_t> log_grid = a.grid.empty() ? zhat::decade_grid(r) : grid;
    std::vector<std::string> methods;
    if (a.method == "all") methods = {"asymptotic", "log", "uniform", "analytic", "buck", "weighted"};
    else methods = {a.method};
    std::vector<zhat::DensityReport> reps;
    for (const auto& m : methods) {
        if (m == "asymptotic") reps.push_back(zhat::density_alpha(X, 0, grid, a.tail));
        else if (m == "alpha") reps.push_back(zhat::density_alpha(X, a.alpha, a.alpha < 0 ? log_grid : grid, a.tail));
        else if (m == "log") reps.push_back(zhat::density_alpha(X, -1, log_grid, a.tail));
        else if (m == "uniform") {
            const std::int64_t R = a.R.empty() ? r : parse_count(a.R);
            const auto L = a.L.empty() ? zhat::default_window_grid(R) : int_list(a.L);
            reps.push_back(zhat::density_uniform(X, L, R, a.tail));
        } else if (m == "analytic") {
            const std::int64_t N = a.N.empty() ? r : parse_count(a.N);
            if (N < 4) throw UsageError("--N must be >= 4");
            reps.push_back(zhat::density_analytic(X, real_list(a.s), static_cast<std::uint64_t>(N), std::min<std::size_t>(a.tail, 2)));
        } else if (m == "buck") {
            reps.push_back(zhat::density_buck(X, chain_for(a.chain, X), a.levels, a.N.empty() ? 0 : parse_count(a.N)));
        } else if (m == "weighted") {
            reps.push_back(zhat::density_weighted(X, zhat::StepFunction::parse(a.step), grid, a.tail));
        } else {
            throw UsageError("unknown method '" + m + "'; expected asymptotic, alpha, log, uniform, analytic, buck, weighted or all");
        }
    }
    Output out;
    Json arr = Json::array();
    for (const auto& rep : reps) arr.push_back(zhat::to_json(rep));
    out.result = Json{{"set", X.text()}, {"dim", X.dim()}, {"mode", zhat::to_string(X.mode())}, {"reports", arr}};
    if (X.assumes_dirichlet()) out.result["assumes_dirichlet"] = true;
    out.csv = density_csv(reps);
    return out;
}

// ---------------------------------------------------------------------------

struct MeasureArgs {
    std::string set, chain = "auto", N = "0", multiples, euler, cutoff = "10000", zeta, haar;
    std::size_t levels = 4;
    unsigned dim = 0;
};

Output cmd_measure(const MeasureArgs& a, const Globals& g) {
    const int modes = !a.set.empty() + !a.multiples.empty() + !a.euler.empty() + !a.zeta.empty() + !a.haar.empty();
    if (modes != 1) throw UsageError("measure needs exactly one of --set, --multiples, --euler, --zeta, --haar");
    Output out;
    if (!a.set.empty()) {
        const zhat::CompiledSet X = compile_set(a.set, a.dim, g);
        const auto tr = zhat::closure_measure_trace(X, chain_for(a.chain, X), a.levels, parse_count(a.N));
        out.result = zhat::to_json(tr);
        out.result["set"] = X.text();
        out.csv = zhat::trace_csv(tr);
        for (const auto& n : tr.notes) out.csv += "# note: " + n + "\n";
    } else if (!a.multiples.empty()) {
        const auto mods = posint_list(a.multiples);
        const zhat::Rational q = zhat::multiples_measure_ie(mods);
        out.result = {{"moduli", mods}, {"measure", zhat::to_string(q)}, {"float", zhat::to_double(q)}};
        out.text = zhat::to_string(q) + "\n";
    } else if (!a.euler.empty()) {
        const auto P = parse_count(a.cutoff);
        if (P < 2) throw UsageError("--cutoff must be >= 2");
        const auto b = zhat::euler_product(zhat::LocalFactor::parse(a.euler), static_cast<std::uint64_t>(P));
        out.result = {{"factor", a.euler}, {"bracket", zhat::to_json(b)}};
    } else if (!a.zeta.empty()) {
        const auto N = parse_count(a.cutoff);
        if (N < 2) throw UsageError("--cutoff must be >= 2");
        const auto b = zhat::zeta_bracket(parse_real(a.zeta), static_cast<std::uint64_t>(N), g.threads);
        out.result = {{"s", parse_real(a.zeta)}, {"bracket", zhat::to_json(b)}};
    } else {
        const auto m = parse_count(a.haar);
        if (m < 1) throw UsageError("--haar must be >= 1");
        const auto q = zhat::haar_ideal(static_cast<std::uint64_t>(m), a.dim ? a.dim : 1);
        out.result = {{"modulus", m}, {"dim", a.dim ? a.dim : 1}, {"measure", zhat::to_string(q)}};
        out.text = zhat::to_string(q) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------

const std::vector<std::string> kTheorems = {"davenport-erdos", "dirichlet", "omega", "eulerian", "asdmltp",
                                            "poonen-stoll", "mt", "counterexample", "union-dense", "axioms"};

struct VerifyArgs {
    std::string id, family = "p^2", pmax = "31", r, tol, mmax = "100", pbound = "1e5", P = "7,13,19", set, m, N, mcheck = "0",
                                moduli, spec = "squarefree", cutoffs = "10,100,1000,10000", chain = "auto", a = "4", K = "10",
                                supports, s;
    unsigned k = 1, dim = 0;
    std::size_t levels = 4, cases = 100, estimator_cases = 5;
    bool family_flag = false;
};

Output cmd_verify(const VerifyArgs& a, const Globals& g) {
    zhat::VerificationReport rep;
    auto tol_or = [&](double d) { return a.tol.empty() ? d : parse_real(a.tol); };
    if (a.id == "davenport-erdos") {
        zhat::DavenportErdosInput in;
        if (a.family == "p") in.power = 1;
        else if (a.family.rfind("p^", 0) == 0) {
            const auto k = parse_count(a.family.substr(2));
            if (k < 1 || k > 63) throw UsageError("bad family exponent");
            in.power = static_cast<unsigned>(k);
        } else in.moduli = posint_list(a.family);
        in.pmax = static_cast<std::uint64_t>(parse_count(a.pmax));
        in.r_max = a.r.empty() ? 10'000'000 : parse_count(a.r);
        in.tol = tol_or(5e-3);
        if (!a.s.empty()) in.s_grid = real_list(a.s);
        in.threads = g.threads;
        rep = zhat::davenport_erdos(in);
    } else if (a.id == "dirichlet") {
        rep = zhat::dirichlet_coverage(static_cast<std::uint64_t>(parse_count(a.mmax)), static_cast<std::uint64_t>(parse_count(a.pbound)));
    } else if (a.id == "omega") {
        rep = zhat::omega_bound_measure(a.k, posint_list(a.P), set_options(g).budget);
    } else if (a.id == "eulerian") {
        const auto X = compile_set(a.set, a.dim, g);
        rep = zhat::eulerian_check(X, posint_list(a.m.empty() ? "12,360" : a.m), a.N.empty() ? 0 : parse_count(a.N));
    } else if (a.id == "asdmltp") {
        zhat::AsdmltpInput in;
        in.moduli = posint_list(a.moduli.empty() ? "4,9,25" : a.moduli);
        in.r_max = a.r.empty() ? 1'000'000 : parse_count(a.r);
        in.m_check = static_cast<std::uint64_t>(parse_count(a.mcheck));
        in.N = a.N.empty() ? 1'000'000 : parse_count(a.N);
        in.tol = tol_or(1e-2);
        in.threads = g.threads;
        rep = zhat::asdmltp_verify(in);
    } else if (a.id == "poonen-stoll") {
        rep = zhat::poonen_stoll_tail(zhat::LocalSpec::preset(a.spec), posint_list(a.cutoffs), a.r.empty() ? 1'000'000 : parse_count(a.r),
                                      tol_or(1e-3));
    } else if (a.id == "mt") {
        const auto X = compile_set(a.set, a.dim, g);
        rep = zhat::mt_criterion(X, chain_for(a.chain, X), a.levels, a.r.empty() ? 1'000'000 : parse_count(a.r), tol_or(1e-2));
    } else if (a.id == "counterexample") {
        const auto av = parse_count(a.a), K = parse_count(a.K);
        if (av < 1 || K < 1 || K > 64) throw UsageError("--a and --K must be positive");
        rep = zhat::counterexample_cover(static_cast<std::uint64_t>(av), static_cast<unsigned>(K), set_options(g).budget);
    } else if (a.id == "union-dense") {
        if (a.supports.empty()) throw UsageError("--supports is required, e.g. \"2,3;3,5;2,5\"");
        std::vector<std::vector<std::uint64_t>> sup;
        for (const auto& part : split(a.supports, ';')) sup.push_back(posint_list(part));
        rep = zhat::union_dense_check(sup, a.family_flag);
    } else if (a.id == "axioms") {
        rep = zhat::verify_axioms(a.cases, g.seed, a.estimator_cases, g.threads);
    } else {
        std::string ids;
        for (const auto& t : kTheorems) ids += (ids.empty() ? "" : ", ") + t;
        throw UsageError("unknown theorem id '" + a.id + "'; valid ids: " + ids);
    }
    Output out;
    out.result = zhat::to_json(rep);
    out.exit_code = verdict_code(rep.verdict);
    return out;
}

// ---------------------------------------------------------------------------

struct SnArgs {
    std::vector<std::string> args;
    std::string seq;
    std::string pmax = "7";
    std::size_t terms = 30, window = 0;
};

Output cmd_sn(const SnArgs& a) {
    if (a.args.empty()) throw UsageError("sn needs an operation: mul, rho, divides, gcd, lcm, omega, Omega, parse, limit");
    const std::string op = a.args[0];
    auto operand = [&](std::size_t i) {
        if (a.args.size() <= i) throw UsageError("sn " + op + ": missing operand");
        return zhat::Supernatural::parse(a.args[i]);
    };
    Output out;
    std::string res;
    if (op == "mul") res = zhat::mul(operand(1), operand(2)).str();
    else if (op == "rho") {
        if (a.args.size() < 2) throw UsageError("sn rho: missing integer");
        res = zhat::rho(parse_count(a.args[1])).str();
    } else if (op == "divides") res = zhat::divides(operand(1), operand(2)) ? "true" : "false";
    else if (op == "gcd") res = zhat::gcd_lcm(operand(1), operand(2)).first.str();
    else if (op == "lcm") res = zhat::gcd_lcm(operand(1), operand(2)).second.str();
    else if (op == "omega") res = zhat::omega(operand(1)).str();
    else if (op == "Omega") res = zhat::Omega(operand(1)).str();
    else if (op == "parse") res = operand(1).str();
    else if (op == "limit") {
        if (a.seq.empty()) throw UsageError("sn limit needs --seq");
        const auto& reg = zhat::SequenceRegistry::instance();
        if (!reg.contains(a.seq)) throw UsageError("unknown sequence '" + a.seq + "'");
        const auto P = parse_count(a.pmax);
        if (P < 1) throw UsageError("--pmax must be >= 1");
        const auto prof = zhat::limit_profile([&](std::size_t k) { return reg.term(a.seq, k); }, static_cast<std::uint64_t>(P), a.terms,
                                              a.window);
        Json tracks = Json::array();
        std::ostringstream csv, table;
        csv << "prime,status,valuations\n";
        table << "prime  status      first..last valuation\n";
        for (const auto& t : prof.tracks) {
            tracks.push_back({{"prime", t.prime}, {"status", zhat::to_string(t.status)}, {"valuations", t.valuations}});
            std::string vals;
            for (auto v : t.valuations) vals += (vals.empty() ? "" : " ") + std::to_string(v);
            csv << t.prime << ',' << zhat::to_string(t.status) << ',' << vals << '\n';
            char buf[96];
            std::snprintf(buf, sizeof buf, "%-6llu %-11s %u..%u\n", static_cast<unsigned long long>(t.prime), zhat::to_string(t.status),
                          t.valuations.front(), t.valuations.back());
            table << buf;
        }
        out.result = {{"op", op}, {"seq", a.seq}, {"prime_bound", P}, {"terms", prof.terms}, {"window", prof.window}, {"tracks", tracks}};
        out.csv = csv.str();
        out.text = table.str();
        return out;
    } else {
        throw UsageError("unknown sn operation '" + op + "'");
    }
    Json operands = Json::array();
    for (std::size_t i = 1; i < a.args.size(); ++i) operands.push_back(a.args[i]);
    out.result = {{"op", op}, {"operands", operands}, {"result", res}};
    out.text = res + "\n";
    return out;
}

// ---------------------------------------------------------------------------

/// key=value lines; '#' starts a comment.  Values fill options not given on
/// the command line.
void apply_config(const std::string& path, CLI::App& app, CLI::App* sub) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (const auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(no) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        CLI::Option* opt = sub ? sub->get_option_no_throw("--" + key) : nullptr;
        if (!opt) opt = app.get_option_no_throw("--" + key);
        if (!opt || key == "config") throw UsageError(path + ":" + std::to_string(no) + ": unknown key '" + key + "'");
        if (opt->count() == 0) {
            opt->add_result(value);
            opt->run_callback();
        }
    }
}

bool is_flag(const CLI::Option* opt) { return opt->get_type_size_max() == 0 || opt->get_items_expected_max() == 0; }

Json effective_config(const CLI::App& app, const CLI::App* sub) {
    Json cfg = Json::object();
    auto collect = [&](const CLI::App& a) {
        for (const CLI::Option* opt : a.get_options()) {
            if (opt->get_lnames().empty()) {
                if (opt->get_positional() && opt->count()) {
                    Json vals = Json::array();
                    for (const auto& v : opt->results()) vals.push_back(v);
                    cfg[opt->get_name()] = vals;
                }
                continue;
            }
            const std::string key = opt->get_lnames().front();
            if (key == "help" || key == "config") continue;
            if (opt->count()) {
                const auto& res = opt->results();
                if (is_flag(opt)) {
                    const std::string v = res.empty() ? "" : res.back();
                    cfg[key] = !(v == "false" || v == "0" || v == "off" || v == "no");
                } else {
                    cfg[key] = res.size() == 1 ? Json(res.front()) : Json(res);
                }
            } else if (is_flag(opt)) {
                cfg[key] = false;
            } else {
                cfg[key] = opt->get_default_str();
            }
        }
    };
    collect(app);
    if (sub) collect(*sub);
    return cfg;
}

void emit(const Output& out, const std::string& command, const Json& cfg, const std::string& format) {
    if (format == "json") {
        Json j{{"command", command}, {"config", cfg}, {"result", out.result}};
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::vector<std::pair<std::string, std::string>> cfg_rows;
    flatten(cfg, "", cfg_rows);
    if (format == "csv") {
        for (const auto& [k, v] : cfg_rows) std::cout << "# " << k << "=" << v << '\n';
        if (!out.csv.empty()) {
            std::cout << out.csv;
            return;
        }
        std::vector<std::pair<std::string, std::string>> rows;
        flatten(out.result, "", rows);
        std::cout << "key,value\n";
        for (const auto& [k, v] : rows) std::cout << csv_quote(k) << ',' << csv_quote(v) << '\n';
        return;
    }
    // table
    std::cout << "# " << command;
    for (const auto& [k, v] : cfg_rows) std::cout << ' ' << k << '=' << v;
    std::cout << '\n';
    if (!out.text.empty()) {
        std::cout << out.text;
        return;
    }
    std::vector<std::pair<std::string, std::string>> rows;
    flatten(out.result, "", rows);
    std::size_t w = 0;
    for (const auto& r : rows) w = std::max(w, r.first.size());
    for (const auto& [k, v] : rows) std::cout << k << std::string(w - k.size() + 2, ' ') << v << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Profinite densities, Haar measures and their verification harnesses", "zhat"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "key=value file supplying defaults for options not given on the command line");
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv", "table"}));
    app.add_option("--threads", g.threads, "Worker threads (results do not depend on it)")->check(CLI::Range(1u, 1024u));
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--budget", g.budget, "Enumeration budget (residue tuples or box points)");
    app.add_option("--box", g.box, "Box convention: auto, positive or symmetric");
    app.add_option("--radius", g.radius, "Preimage search radius for multivariate polynomial images (0: default)");

    DensityArgs da;
    auto* dens = app.add_subcommand("density", "Density estimators");
    dens->add_option("--set", da.set, "Set expression");
    dens->add_option("--method", da.method, "asymptotic, alpha, log, uniform, analytic, buck, weighted or all");
    dens->add_option("--alpha", da.alpha, "Exponent for --method alpha, in [-1, 0]");
    dens->add_option("--r", da.r, "Largest radius of the default grid (ratio 2; 10^k and 2*10^k for negative alpha)");
    dens->add_option("--grid", da.grid, "Explicit increasing radius grid, comma separated");
    dens->add_option("--tail", da.tail, "Tail window size");
    dens->add_option("--L", da.L, "Window lengths for uniform density");
    dens->add_option("--R", da.R, "Range for uniform density (default: r)");
    dens->add_option("--s", da.s, "Decreasing s grid for analytic density");
    dens->add_option("--N", da.N, "Cutoff for analytic density / truncation for Buck lower bound");
    dens->add_option("--chain", da.chain, "Chain for Buck density: auto, primorial, factorial, primorialK or a list");
    dens->add_option("--levels", da.levels, "Number of chain levels");
    dens->add_option("--step", da.step, "Step function for weighted density, e.g. 2*[0,0.5]+(0.5,1]");
    dens->add_option("--dim", da.dim, "Dimension for dimension-polymorphic expressions");

    MeasureArgs ma;
    auto* meas = app.add_subcommand("measure", "Haar measures, traces and brackets");
    meas->add_option("--set", ma.set, "Set expression (level-measure trace)");
    meas->add_option("--chain", ma.chain, "auto, primorial, factorial, primorialK or an explicit divisibility list");
    meas->add_option("--levels", ma.levels, "Number of chain levels");
    meas->add_option("--N", ma.N, "Truncation bound for TRUNCATED sets (0: automatic)");
    meas->add_option("--dim", ma.dim, "Dimension");
    meas->add_option("--multiples", ma.multiples, "Moduli a_i: exact measure of the complement of their multiples");
    meas->add_option("--euler", ma.euler, "Local factor 1-c/p^k for an Euler product bracket");
    meas->add_option("--zeta", ma.zeta, "s for a zeta bracket");
    meas->add_option("--cutoff", ma.cutoff, "Prime cutoff (euler) or summation cutoff (zeta)");
    meas->add_option("--haar", ma.haar, "Modulus m: Haar measure of m Zhat^n");

    VerifyArgs va;
    auto* ver = app.add_subcommand("verify", "Theorem harnesses");
    ver->add_option("id", va.id, "Theorem id")->required();
    ver->add_option("--family", va.family, "davenport-erdos: p, p^k or explicit moduli");
    ver->add_option("--pmax", va.pmax, "davenport-erdos: largest prime of a generated family");
    ver->add_option("--r", va.r, "Largest radius for empirical densities");
    ver->add_option("--tol", va.tol, "Tolerance");
    ver->add_option("--s", va.s, "davenport-erdos: s grid");
    ver->add_option("--mmax", va.mmax, "dirichlet: largest modulus");
    ver->add_option("--pbound", va.pbound, "dirichlet: prime bound");
    ver->add_option("--k", va.k, "omega: bound on the number of prime divisors");
    ver->add_option("--P", va.P, "omega: increasing prime cutoffs");
    ver->add_option("--set", va.set, "eulerian, mt: set expression");
    ver->add_option("--dim", va.dim, "Dimension for dimension-polymorphic expressions");
    ver->add_option("--m", va.m, "eulerian: levels");
    ver->add_option("--N", va.N, "Truncation bound");
    ver->add_option("--moduli", va.moduli, "asdmltp: pairwise coprime moduli");
    ver->add_option("--mcheck", va.mcheck, "asdmltp: level for the residue check (0: lcm)");
    ver->add_option("--spec", va.spec, "poonen-stoll: squarefree, units, trivial or kfree:K");
    ver->add_option("--cutoffs", va.cutoffs, "poonen-stoll: prime cutoffs");
    ver->add_option("--chain", va.chain, "mt: chain");
    ver->add_option("--levels", va.levels, "mt: chain levels");
    ver->add_option("--a", va.a, "counterexample: base a >= 3");
    ver->add_option("--K", va.K, "counterexample: number of cosets");
    ver->add_option("--supports", va.supports, "union-dense: prime supports, e.g. 2,3;3,5;2,5");
    ver->add_flag("--family-flag", va.family_flag, "union-dense: supports are a prefix of a disjoint family escaping every finite set");
    ver->add_option("--cases", va.cases, "axioms: number of random periodic sets");
    ver->add_option("--estimator-cases", va.estimator_cases, "axioms: sets also run through the estimators");

    SnArgs sa;
    auto* sn = app.add_subcommand("sn", "Supernatural numbers");
    sn->add_option("args", sa.args, "Operation and operands, e.g. mul 2^inf*3 3^2*5");
    sn->add_option("--seq", sa.seq, "limit: registered sequence");
    sn->add_option("--pmax", sa.pmax, "limit: prime bound");
    sn->add_option("--terms", sa.terms, "limit: number of terms");
    sn->add_option("--window", sa.window, "limit: window (0: all terms)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    CLI::App* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
    try {
        if (!g.config.empty()) apply_config(g.config, app, sub);
        if (g.format != "json" && g.format != "csv" && g.format != "table") throw UsageError("--format must be json, csv or table");
        Output out;
        if (sub == dens) out = cmd_density(da, g);
        else if (sub == meas) out = cmd_measure(ma, g);
        else if (sub == ver) out = cmd_verify(va, g);
        else out = cmd_sn(sa);
        emit(out, sub->get_name(), effective_config(app, sub), g.format);
        return out.exit_code;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const zhat::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const zhat::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
