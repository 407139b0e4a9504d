// Command-line front end: clear, nash, compare, sample, check.
//
// Exit codes: 0 success, 1 `check` found the allocation is not a Nash
// allocation, 2 bad input, 3 solver failure.

#include "sysrisk/aggregation.hpp"
#include "sysrisk/clearing.hpp"
#include "sysrisk/errors.hpp"
#include "sysrisk/linprog.hpp"
#include "sysrisk/nash.hpp"
#include "sysrisk/network.hpp"
#include "sysrisk/risk.hpp"
#include "sysrisk/scenarios.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace sysrisk;
using json = nlohmann::ordered_json;

namespace {

constexpr int kNotNash = 1;
constexpr int kInputError = 2;
constexpr int kSolverError = 3;

// ---------------------------------------------------------------------------
// small helpers

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

class Clock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Printer {
    int precision = 6;

    std::string operator()(double v) const {
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        std::ostringstream os;
        os << std::fixed << std::setprecision(precision) << v;
        std::string s = os.str();
        // no "-0.000000"
        if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
        return s;
    }
};

std::string pad(const std::string& s, std::size_t width, bool left = false) {
    if (s.size() >= width) return s;
    return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

/// Writes `j` to path ("-" is stdout). Returns true when stdout was used.
bool emit_json(const std::string& path, const json& j) {
    if (path.empty()) return false;
    if (path == "-") {
        std::cout << j.dump(2) << "\n";
        return true;
    }
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << j.dump(2) << "\n";
    return false;
}

std::vector<std::string> bank_labels(const std::optional<FinancialNetwork>& net, int n) {
    if (net && static_cast<int>(net->names().size()) == n) return net->names();
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back("bank_" + std::to_string(i + 1));
    return out;
}

// ---------------------------------------------------------------------------
// problem inputs shared by nash, check and compare

struct Inputs {
    std::string network;
    std::string aggregator;
    std::string scenarios;
    std::vector<double> deterministic;
    std::string risk = "expectation";
    std::string lift = "sensitive";
    double gamma = 0.95;
    double eps = 0.5;
    double lambda = 1.0;
};

struct SolverFlags {
    double tol = 1e-8;
    double inner_tol = 1e-10;
    int max_iter = 10000;
    double damping = 1.0;

    SolverConfig config() const {
        SolverConfig cfg;
        cfg.outer_tol = tol;
        cfg.inner_tol = inner_tol;
        cfg.max_outer = max_iter;
        cfg.damping = damping;
        cfg.validate();
        return cfg;
    }
};

struct Problem {
    std::optional<FinancialNetwork> net;
    std::string aggregator_text;
    ScenarioSet scen;
    AggregationSystem sys;
    RiskMeasure spec;
    bool deterministic = false;

    std::string hash() const {
        return hex(fnv1a(net ? network_to_json(*net) : aggregator_text));
    }
    const EisenbergNoe* en() const { return std::get_if<EisenbergNoe>(&sys.base.kind()); }
};

void add_inputs(CLI::App* cmd, Inputs& in, bool with_lift = true) {
    cmd->add_option("-N,--network", in.network, "network JSON file");
    cmd->add_option("-a,--aggregator", in.aggregator,
                    "aggregator: inline JSON, a JSON file, or 'mean_field' (default: Eisenberg-Noe on --network)");
    auto* s = cmd->add_option("-s,--scenarios", in.scenarios, "scenario CSV file");
    auto* d = cmd->add_option("-d,--deterministic", in.deterministic, "single deterministic shock, comma separated")
                  ->delimiter(',');
    s->excludes(d);
    cmd->add_option("-r,--risk", in.risk, "expectation | avar:A | oce:G1:G2 | entropic:T")->capture_default_str();
    if (with_lift) cmd->add_option("-l,--lift", in.lift, "sensitive | insensitive")->capture_default_str();
    cmd->add_option("-g,--gamma", in.gamma, "share of society obligations that must be met")->capture_default_str();
    cmd->add_option("--eps", in.eps, "mean_field shorthand: log shift")->capture_default_str();
    cmd->add_option("--lambda", in.lambda, "mean_field shorthand: weight of the externality term")
        ->capture_default_str();
}

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
    cmd->add_option("--tol", f.tol, "fixed-point tolerance")->capture_default_str();
    cmd->add_option("--inner-tol", f.inner_tol, "best-response bracket tolerance")->capture_default_str();
    cmd->add_option("--max-iter", f.max_iter, "fixed-point iteration cap")->capture_default_str();
    cmd->add_option("--damping", f.damping, "initial damping in (0, 1]")->capture_default_str();
}

ScenarioSet load_shocks(const Inputs& in) {
    if (!in.scenarios.empty()) return load_scenarios(in.scenarios);
    if (!in.deterministic.empty()) return ScenarioSet::deterministic(to_eigen(in.deterministic));
    throw InputError("one of --scenarios or --deterministic is required");
}

Problem load_problem(const Inputs& in) {
    std::optional<FinancialNetwork> net;
    if (!in.network.empty()) net = load_network(in.network);
    ScenarioSet scen = load_shocks(in);

    std::string text;
    if (in.aggregator.empty()) {
        if (!net) throw InputError("either --network or --aggregator is required");
        json j{{"kind", "eisenberg_noe"}, {"gamma", in.gamma}};
        text = j.dump();
    } else if (in.aggregator == "mean_field") {
        json u{{"kind", "shifted_log"}, {"eps", in.eps}, {"weight", 1.0}};
        json ubar{{"kind", "shifted_log"}, {"eps", in.eps}, {"weight", in.lambda}};
        json j{{"kind", "mean_field"}, {"utilities", json::array()}, {"ubar", ubar}};
        for (int i = 0; i < scen.banks(); ++i) j["utilities"].push_back(u);
        text = j.dump();
    } else if (in.aggregator.front() == '{') {
        text = in.aggregator;
    } else {
        text = read_file(in.aggregator);
    }

    AggregationSystem sys{parse_aggregator(text, net ? &*net : nullptr), parse_lift(in.lift)};
    if (sys.size() != scen.banks())
        throw InputError("aggregator has " + std::to_string(sys.size()) + " banks but the scenarios have " +
                         std::to_string(scen.banks()));
    return Problem{std::move(net), text, std::move(scen), std::move(sys), parse_risk_measure(in.risk),
                   !in.deterministic.empty()};
}

json report_json(const std::string& method, const AllocationReport& r, double seconds) {
    json j;
    j["method"] = method;
    j["m"] = to_std(r.m);
    j["rho"] = to_std(r.rho_values);
    j["residuals"] = to_std(r.residuals);
    j["total"] = r.total;
    j["system_rho"] = r.system_rho;
    j["system_acceptable"] = r.system_acceptable;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["seconds"] = seconds;
    return j;
}

json inputs_json(const Problem& p, const std::string& command) {
    json j;
    j["command"] = command;
    j["network_hash"] = p.hash();
    j["aggregator"] = p.sys.base.name();
    j["banks"] = p.sys.size();
    j["scenarios"] = p.scen.size();
    j["risk"] = p.spec.to_string();
    j["lift"] = to_string(p.sys.lift);
    return j;
}

void require_verified(const AllocationReport& r, const std::string& what) {
    if (!r.system_acceptable)
        throw SolverError(what + " allocation failed re-verification: system rho " + std::to_string(r.system_rho));
}

// ---------------------------------------------------------------------------
// clear

struct ClearArgs {
    std::string network;
    std::vector<double> assets;
    double gamma = 0.95;
    int precision = 6;
    std::string json_path;
};

int cmd_clear(const ClearArgs& a) {
    const auto net = load_network(a.network);
    const Eigen::VectorXd x = to_eigen(a.assets);
    if (x.size() != net.size())
        throw InputError("--assets has " + std::to_string(x.size()) + " entries, network has " +
                         std::to_string(net.size()) + " banks");
    const Clock clock;
    const auto res = clearing_vector(net, x);
    const Eigen::VectorXd surplus = society_payment_components(net, x, a.gamma);
    const double secs = clock.seconds();
    const Eigen::VectorXd to_society = net.society_share().cwiseProduct(res.payments);

    json j;
    j["command"] = "clear";
    j["network_hash"] = hex(fnv1a(network_to_json(net)));
    j["gamma"] = a.gamma;
    j["assets"] = a.assets;
    j["payments"] = to_std(res.payments);
    j["defaults"] = json::array();
    for (int i = 0; i < net.size(); ++i) j["defaults"].push_back(static_cast<bool>(res.defaults[i]));
    j["society_payments"] = to_std(to_society);
    j["society_surplus"] = to_std(surplus);
    j["residual"] = clearing_residual(net, x, res.payments);
    j["seconds"] = secs;
    if (emit_json(a.json_path, j)) return 0;

    const Printer num{a.precision};
    const auto names = bank_labels(net, net.size());
    std::cout << pad("bank", 10, true) << pad("assets", 14) << pad("owed", 14) << pad("payment", 14)
              << pad("default", 9) << pad("to_society", 14) << pad("surplus", 14) << "\n";
    for (int i = 0; i < net.size(); ++i)
        std::cout << pad(names[i], 10, true) << pad(num(x[i]), 14) << pad(num(net.total_obligations()[i]), 14)
                  << pad(num(res.payments[i]), 14) << pad(res.defaults[i] ? "yes" : "no", 9)
                  << pad(num(to_society[i]), 14) << pad(num(surplus[i]), 14) << "\n";
    std::cout << "defaults: " << res.defaults.count() << " of " << net.size() << "; society surplus "
              << num(surplus.sum()) << " at gamma " << a.gamma << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// nash

struct NashArgs {
    Inputs in;
    SolverFlags solver;
    std::string method = "auto";
    bool allow_noncoherent = false;
    std::vector<double> at;  // capital for the acceptability demo
    std::string dump_lp;
    int precision = 6;
    std::string json_path;
};

void print_allocation(const Problem& p, const std::string& method, const AllocationReport& r, double secs,
                      const Printer& num) {
    const auto names = bank_labels(p.net, p.sys.size());
    std::cout << "method " << method << ", lift " << to_string(p.sys.lift) << ", risk " << p.spec.to_string()
              << ", " << p.scen.size() << " scenario(s), network " << p.hash() << "\n";
    std::cout << pad("bank", 10, true) << pad("m", 14) << pad("rho", 14) << pad("residual", 14) << "\n";
    for (int i = 0; i < p.sys.size(); ++i)
        std::cout << pad(names[i], 10, true) << pad(num(r.m[i]), 14) << pad(num(r.rho_values[i]), 14)
                  << pad(num(r.residuals[i]), 14) << "\n";
    std::cout << pad("total", 10, true) << pad(num(r.total), 14) << "\n";
    std::cout << "system rho " << num(r.system_rho) << ", acceptable " << (r.system_acceptable ? "yes" : "no")
              << "; " << r.iterations << " iteration(s), " << std::setprecision(3) << secs << " s\n";
}

/// Per-bank versus system acceptability at a given m, without solving.
int acceptability_demo(const Problem& p, const NashArgs& a) {
    const Eigen::VectorXd m = a.at.empty() ? Eigen::VectorXd::Zero(p.sys.size()) : to_eigen(a.at);
    if (m.size() != p.sys.size()) throw InputError("--at has the wrong length");
    const Eigen::MatrixXd comps = eval_components(p.sys, p.scen, m);
    const Eigen::VectorXd total = eval_total(p.sys, p.scen, m);
    const auto& probs = p.scen.probs();
    const bool entropic = p.spec.kind == RiskMeasure::Kind::Entropic;
    // E[1 - exp(-theta Y)] = 1 - exp(theta rho(Y)); nonnegative iff acceptable
    auto expected_utility = [&](double r) { return 1.0 - std::exp(p.spec.theta * r); };

    json j = inputs_json(p, "nash");
    j["demo"] = "acceptability";
    j["m"] = to_std(m);
    j["banks_detail"] = json::array();
    bool all_banks = true;
    for (int i = 0; i < p.sys.size(); ++i) {
        const double r = rho(p.spec, comps.row(i).transpose(), probs);
        const bool ok = is_acceptable(p.spec, comps.row(i).transpose(), probs);
        all_banks = all_banks && ok;
        json b{{"rho", r}, {"acceptable", ok}};
        if (entropic) b["expected_utility"] = expected_utility(r);
        j["banks_detail"].push_back(b);
    }
    const double rs = rho(p.spec, total, probs);
    const bool sys_ok = is_acceptable(p.spec, total, probs);
    j["system_rho"] = rs;
    j["system_acceptable"] = sys_ok;
    if (entropic) j["system_expected_utility"] = expected_utility(rs);
    if (emit_json(a.json_path, j)) return 0;

    const Printer num{a.precision};
    const auto names = bank_labels(p.net, p.sys.size());
    std::cout << "acceptability at the given capital (no solve), risk " << p.spec.to_string() << "\n";
    std::cout << pad("", 10, true) << pad("rho", 14) << (entropic ? pad("E[1-e^-tY]", 14) : "")
              << pad("acceptable", 12) << "\n";
    for (int i = 0; i < p.sys.size(); ++i) {
        const auto& b = j["banks_detail"][i];
        std::cout << pad(names[i], 10, true) << pad(num(b["rho"].get<double>()), 14)
                  << (entropic ? pad(num(b["expected_utility"].get<double>()), 14) : "")
                  << pad(b["acceptable"].get<bool>() ? "yes" : "no", 12) << "\n";
    }
    std::cout << pad("system", 10, true) << pad(num(rs), 14) << (entropic ? pad(num(expected_utility(rs)), 14) : "")
              << pad(sys_ok ? "yes" : "no", 12) << "\n";
    if (all_banks && !sys_ok) std::cout << "every bank is acceptable but the system is not\n";
    return 0;
}

int cmd_nash(const NashArgs& a) {
    const Problem p = load_problem(a.in);
    if (!p.spec.coherent()) {
        if (!a.allow_noncoherent)
            throw NonCoherentRiskMeasure(p.spec.to_string() +
                                         " is not coherent; pass --allow-noncoherent for the acceptability demo");
        return acceptability_demo(p, a);
    }

    const SolverConfig cfg = a.solver.config();
    std::string method = a.method;
    const bool insensitive = p.sys.lift == Lift::Insensitive;
    if (method == "auto") {
        if (insensitive)
            method = "closed-form";
        else if (p.en() && p.deterministic && (p.scen.values().array() >= 0.0).all())
            method = "exact";
        else
            method = "fixed-point";
    }
    if (method != "closed-form" && method != "exact" && method != "fixed-point" && method != "lp")
        throw InputError("unknown method '" + method + "'");
    if (insensitive != (method == "closed-form"))
        throw InputError("method " + method + " does not apply to the " + to_string(p.sys.lift) + " lift");
    if ((method == "exact" || method == "lp") && !p.en())
        throw InputError("method " + method + " needs the Eisenberg-Noe aggregator");
    if (method == "exact" && !p.deterministic) throw InputError("method exact needs --deterministic");

    std::unique_ptr<std::ofstream> dump;
    if (!a.dump_lp.empty()) {
        if (method != "lp") throw InputError("--dump-lp needs --method lp");
        dump = std::make_unique<std::ofstream>(a.dump_lp);
        if (!*dump) throw InputError("cannot write " + a.dump_lp);
    }

    const Clock clock;
    AllocationReport r;
    if (method == "closed-form") {
        r = nash_insensitive(p.scen, p.sys.base, p.spec);
    } else if (method == "exact") {
        r = nash_deterministic_en(p.en()->network, p.scen.scenario(0), p.en()->gamma, p.spec, cfg);
    } else if (method == "lp") {
        r = nash_lp_en(p.en()->network, p.scen, p.spec, p.en()->gamma, cfg, dump.get());
    } else {
        r = nash_fixed_point(p.scen, p.sys, p.spec, cfg);
    }
    const double secs = clock.seconds();
    require_verified(r, method);

    json j = inputs_json(p, "nash");
    j["rows"] = json::array({report_json(method, r, secs)});
    if (emit_json(a.json_path, j)) return 0;
    print_allocation(p, method, r, secs, Printer{a.precision});
    return 0;
}

// ---------------------------------------------------------------------------
// check

struct CheckArgs {
    Inputs in;
    SolverFlags solver;
    std::vector<double> m;
    int precision = 6;
    std::string json_path;
};

int cmd_check(const CheckArgs& a) {
    const Problem p = load_problem(a.in);
    const Eigen::VectorXd m = to_eigen(a.m);
    if (m.size() != p.sys.size()) throw InputError("--m has the wrong length");
    const SolverConfig cfg = a.solver.config();
    const Clock clock;
    const auto r = verify_nash(m, p.scen, p.sys, p.spec, cfg);
    const double secs = clock.seconds();
    const bool nash = r.max_residual() <= cfg.acceptance_tol() && r.system_acceptable;

    json j = inputs_json(p, "check");
    j["rows"] = json::array({report_json("check", r, secs)});
    j["nash"] = nash;
    if (!emit_json(a.json_path, j)) {
        print_allocation(p, "check", r, secs, Printer{a.precision});
        std::cout << "nash allocation: " << (nash ? "yes" : "no") << " (tolerance " << cfg.acceptance_tol() << ")\n";
    }
    return nash ? 0 : kNotNash;
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
    Inputs in;
    SolverFlags solver;
    std::string method = "fixed-point";
    std::string dump_lp;
    std::string csv;
    int precision = 6;
    std::string json_path;
};

struct Column {
    std::string name;
    std::optional<Eigen::VectorXd> m;  // absent when only the total is determined
    double total = 0.0;
    double rho_under_x = 0.0;
    double seconds = 0.0;
    std::optional<AllocationReport> report;
};

json column_json(const Column& c) {
    json j;
    j["method"] = c.name;
    j["m"] = c.m ? json(to_std(*c.m)) : json(nullptr);
    j["total"] = c.total;
    j["system_rho"] = c.rho_under_x;
    j["system_acceptable"] = c.rho_under_x <= 1e-8;
    if (c.report) {
        j["rho"] = to_std(c.report->rho_values);
        j["residuals"] = to_std(c.report->residuals);
        j["iterations"] = c.report->iterations;
    }
    j["seconds"] = c.seconds;
    return j;
}

std::vector<Column> compare_insensitive(const Problem& p, const ScenarioSet& como) {
    const AggregationSystem sys{p.sys.base, Lift::Insensitive};
    const auto& probs = p.scen.probs();
    auto under_x = [&](const Eigen::VectorXd& m) { return rho(p.spec, eval_total(sys, p.scen, m), probs); };

    std::vector<Column> cols;
    {
        const Clock clock;
        Column c{"minimal", std::nullopt, 0.0, 0.0, 0.0, std::nullopt};
        c.total = rho(p.spec, eval_total(sys, p.scen, Eigen::VectorXd::Zero(p.sys.size())), probs);
        c.rho_under_x = under_x(Eigen::VectorXd::Unit(p.sys.size(), 0) * c.total);
        c.seconds = clock.seconds();
        cols.push_back(c);
    }
    for (const auto* which : {"nash", "comonotonic"}) {
        const Clock clock;
        const bool co = std::string(which) == "comonotonic";
        const auto r = nash_insensitive(co ? como : p.scen, p.sys.base, p.spec);
        Column c{which, r.m, r.total, under_x(r.m), clock.seconds(), r};
        cols.push_back(c);
    }
    return cols;
}

std::vector<Column> compare_sensitive(const Problem& p, const ScenarioSet& como, const CompareArgs& a,
                                      std::ostream* dump) {
    const AggregationSystem sys{p.sys.base, Lift::Sensitive};
    const auto& probs = p.scen.probs();
    const auto* en = p.en();
    const SolverConfig cfg = a.solver.config();
    auto under_x = [&](const Eigen::VectorXd& m) { return rho(p.spec, eval_total(sys, p.scen, m), probs); };

    std::vector<Column> cols;
    {
        const Clock clock;
        const auto sol = minimal_capital_en(en->network, p.scen, p.spec, en->gamma, dump);
        Column c{"minimal", sol.m, sol.total, under_x(sol.m), clock.seconds(), std::nullopt};
        cols.push_back(c);
    }
    {
        const Clock clock;
        const auto r = a.method == "lp" ? nash_lp_en(en->network, p.scen, p.spec, en->gamma, cfg, dump)
                                        : nash_fixed_point(p.scen, sys, p.spec, cfg);
        require_verified(r, "nash");
        cols.push_back(Column{"nash", r.m, r.total, under_x(r.m), clock.seconds(), r});
    }
    {
        const Clock clock;
        const auto r = nash_fixed_point(como, sys, p.spec, cfg);
        require_verified(r, "comonotonic nash");
        cols.push_back(Column{"comonotonic", r.m, r.total, under_x(r.m), clock.seconds(), r});
    }
    return cols;
}

void print_section(const std::string& title, const std::vector<Column>& cols, const std::vector<std::string>& names,
                   const Printer& num) {
    std::cout << title << "\n" << pad("", 12, true);
    for (const auto& c : cols) std::cout << pad(c.name, 14);
    std::cout << "\n";
    for (std::size_t i = 0; i < names.size(); ++i) {
        std::cout << pad(names[i], 12, true);
        for (const auto& c : cols) std::cout << pad(c.m ? num((*c.m)[static_cast<Eigen::Index>(i)]) : "-", 14);
        std::cout << "\n";
    }
    std::cout << pad("total", 12, true);
    for (const auto& c : cols) std::cout << pad(num(c.total), 14);
    std::cout << "\n" << pad("rho under X", 12, true);
    for (const auto& c : cols) std::cout << pad(num(c.rho_under_x), 14);
    std::cout << "\n" << pad("seconds", 12, true);
    for (const auto& c : cols) {
        std::ostringstream os;
        os << std::setprecision(3) << c.seconds;
        std::cout << pad(os.str(), 14);
    }
    std::cout << "\n";
}

void write_csv(std::ostream& out, const std::string& lift, const std::vector<Column>& cols,
               const std::vector<std::string>& names, const Printer& num) {
    for (const auto& c : cols) {
        if (c.m)
            for (std::size_t i = 0; i < names.size(); ++i)
                out << lift << "," << c.name << "," << names[i] << "," << num((*c.m)[static_cast<Eigen::Index>(i)])
                    << "\n";
        out << lift << "," << c.name << ",total," << num(c.total) << "\n";
    }
}

int cmd_compare(const CompareArgs& a) {
    Inputs in = a.in;
    const Problem p = load_problem(in);
    if (!p.en()) throw InputError("compare needs the Eisenberg-Noe aggregator");
    if (!p.spec.coherent()) throw NonCoherentRiskMeasure("compare needs a coherent risk measure");
    if (a.method != "fixed-point" && a.method != "lp") throw InputError("--method is fixed-point or lp");

    std::unique_ptr<std::ofstream> dump;
    if (!a.dump_lp.empty()) {
        dump = std::make_unique<std::ofstream>(a.dump_lp);
        if (!*dump) throw InputError("cannot write " + a.dump_lp);
    }

    const ScenarioSet como = comonotonic_copula(p.scen);
    const auto ins = compare_insensitive(p, como);
    const auto sen = compare_sensitive(p, como, a, dump.get());
    for (const auto* cols : {&ins, &sen})
        for (const auto& c : *cols)
            if (c.rho_under_x > 1e-8)
                throw SolverError(c.name + " allocation is not acceptable under X: rho " +
                                  std::to_string(c.rho_under_x));

    const Printer num{a.precision};
    const auto names = bank_labels(p.net, p.sys.size());
    if (!a.csv.empty()) {
        std::ofstream out(a.csv);
        if (!out) throw InputError("cannot write " + a.csv);
        out << "lift,method,bank,value\n";
        write_csv(out, "insensitive", ins, names, num);
        write_csv(out, "sensitive", sen, names, num);
    }

    json j = inputs_json(p, "compare");
    j.erase("lift");
    j["gamma"] = p.en()->gamma;
    j["insensitive"] = json::array();
    j["sensitive"] = json::array();
    for (const auto& c : ins) j["insensitive"].push_back(column_json(c));
    for (const auto& c : sen) j["sensitive"].push_back(column_json(c));
    if (emit_json(a.json_path, j)) return 0;

    std::cout << "risk " << p.spec.to_string() << ", gamma " << p.en()->gamma << ", " << p.scen.size()
              << " scenario(s), network " << p.hash() << "\n\n";
    print_section("Insensitive", ins, names, num);
    std::cout << "\n";
    print_section("Sensitive", sen, names, num);
    return 0;
}

// ---------------------------------------------------------------------------
// sample

struct SampleArgs {
    std::string network;
    bool scales_from_network = false;
    std::vector<double> scales;
    double corr = 0.5;
    int n = 1000;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_sample(const SampleArgs& a) {
    Eigen::VectorXd scales;
    if (a.scales_from_network) {
        if (a.network.empty()) throw InputError("--scales-from-network needs --network");
        scales = load_network(a.network).total_obligations();
    } else if (!a.scales.empty()) {
        scales = to_eigen(a.scales);
    } else {
        throw InputError("one of --scales or --scales-from-network is required");
    }
    if (a.n < 1) throw InputError("--n must be positive");
    if (!(scales.array() > 0.0).all()) throw InputError("scales must be positive");
    const auto scen = gaussian_copula_sample(equicorrelation(static_cast<int>(scales.size()), a.corr), scales, a.n,
                                             a.seed);
    if (a.out.empty() || a.out == "-") {
        write_scenarios(std::cout, scen);
    } else {
        std::ofstream out(a.out);
        if (!out) throw InputError("cannot write " + a.out);
        write_scenarios(out, scen);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Systemic risk capital allocation"};
    app.require_subcommand(1);

    ClearArgs clear;
    auto* c = app.add_subcommand("clear", "clearing payments for given external assets");
    c->add_option("network", clear.network, "network JSON file")->required();
    c->add_option("-x,--assets", clear.assets, "external assets, comma separated")->delimiter(',')->required();
    c->add_option("-g,--gamma", clear.gamma, "society threshold share")->capture_default_str();
    c->add_option("-p,--precision", clear.precision, "decimals in tables")->capture_default_str();
    c->add_option("--json", clear.json_path, "write a JSON report to this file ('-' for stdout)");

    NashArgs nash;
    auto* n = app.add_subcommand("nash", "Nash capital allocation");
    add_inputs(n, nash.in);
    add_solver_flags(n, nash.solver);
    n->add_option("-m,--method", nash.method, "auto | closed-form | exact | fixed-point | lp")->capture_default_str();
    n->add_flag("--allow-noncoherent", nash.allow_noncoherent,
                "with a non-coherent risk measure, report per-bank and system acceptability instead of solving");
    n->add_option("--at", nash.at, "capital for the acceptability report (default 0)")->delimiter(',');
    n->add_option("--dump-lp", nash.dump_lp, "write the linear program to this file");
    n->add_option("-p,--precision", nash.precision, "decimals in tables")->capture_default_str();
    n->add_option("--json", nash.json_path, "write a JSON report to this file ('-' for stdout)");

    CompareArgs cmp;
    auto* k = app.add_subcommand("compare", "minimal, Nash and comonotonic Nash capital, both lifts");
    add_inputs(k, cmp.in, false);
    add_solver_flags(k, cmp.solver);
    k->add_option("-m,--method", cmp.method, "Nash solver: fixed-point | lp")->capture_default_str();
    k->add_option("--dump-lp", cmp.dump_lp, "write the linear programs to this file");
    k->add_option("--csv", cmp.csv, "write the table as CSV");
    k->add_option("-p,--precision", cmp.precision, "decimals in tables")->capture_default_str();
    k->add_option("--json", cmp.json_path, "write a JSON report to this file ('-' for stdout)");

    SampleArgs sample;
    auto* s = app.add_subcommand("sample", "Gaussian copula scenarios");
    s->add_option("-N,--network", sample.network, "network JSON file");
    s->add_flag("--scales-from-network", sample.scales_from_network, "scale bank i by its total obligations");
    s->add_option("--scales", sample.scales, "explicit scales, comma separated")->delimiter(',');
    s->add_option("--corr", sample.corr, "pairwise correlation")->capture_default_str();
    s->add_option("-n,--n", sample.n, "number of scenarios")->capture_default_str();
    s->add_option("--seed", sample.seed, "random seed")->capture_default_str();
    s->add_option("-o,--out", sample.out, "output CSV (default stdout)");

    CheckArgs check;
    auto* v = app.add_subcommand("check", "verify that a given allocation is a Nash allocation");
    add_inputs(v, check.in);
    add_solver_flags(v, check.solver);
    v->add_option("--m", check.m, "capital allocation, comma separated")->delimiter(',')->required();
    v->add_option("-p,--precision", check.precision, "decimals in tables")->capture_default_str();
    v->add_option("--json", check.json_path, "write a JSON report to this file ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kInputError;
    }

    try {
        if (*c) return cmd_clear(clear);
        if (*n) return cmd_nash(nash);
        if (*k) return cmd_compare(cmp);
        if (*s) return cmd_sample(sample);
        if (*v) return cmd_check(check);
    } catch (const MaxIterations& e) {
        std::cerr << "error: " << e.what() << "\n  last iterate:";
        for (double m : to_std(e.report.m)) std::cerr << " " << m;
        std::cerr << "\n  residuals:";
        for (double r : to_std(e.report.residuals)) std::cerr << " " << r;
        std::cerr << "\n";
        return kSolverError;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSolverError;
    }
    return 0;
}
