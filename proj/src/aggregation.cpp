#include "sysrisk/aggregation.hpp"

#include "sysrisk/clearing.hpp"
#include "sysrisk/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sysrisk {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool in_domain(const Eigen::VectorXd& x) { return (x.array() >= 0.0).all(); }

}  // namespace

UtilityFn UtilityFn::affine(double a, double b) {
    if (!(a >= 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw InputError("affine utility needs a finite slope >= 0");
    }
    UtilityFn u;
    u.kind = Kind::Affine;
    u.slope = a;
    u.intercept = b;
    return u;
}

UtilityFn UtilityFn::shifted_log(double eps, double weight) {
    if (!(eps > 0.0 && eps < 1.0)) throw InputError("shifted log utility needs eps in (0, 1)");
    if (!(weight > 0.0) || !std::isfinite(weight)) throw InputError("shifted log weight must be positive");
    UtilityFn u;
    u.kind = Kind::ShiftedLog;
    u.eps = eps;
    u.weight = weight;
    return u;
}

double UtilityFn::operator()(double t) const {
    if (!(t >= 0.0)) return kNegInf;
    switch (kind) {
        case Kind::Affine: return slope * t + intercept;
        case Kind::ShiftedLog: return weight * std::log(eps + t);
    }
    return kNegInf;
}

SingleElementAggregator::SingleElementAggregator(Kind kind) : kind_(std::move(kind)) {
    size_ = std::visit(
        overloaded{
            [](const UtilitySum& k) { return int(k.utilities.size()); },
            [](const MeanField& k) { return int(k.utilities.size()); },
            [](const EisenbergNoe& k) {
                if (!(k.gamma > 0.0 && k.gamma < 1.0)) throw InputError("gamma must lie in (0, 1)");
                return k.network.size();
            },
            [](const WeightedAffine& k) {
                if (k.a.rows() != k.a.cols() || k.c.size() != k.a.rows()) {
                    throw InputError("weighted affine aggregator needs a square matrix and matching offsets");
                }
                if ((k.a.array() < 0.0).any()) throw InputError("weighted affine weights must be nonnegative");
                return int(k.a.rows());
            },
        },
        kind_);
    if (size_ < 1) throw InputError("aggregator needs at least one bank");
}

std::string SingleElementAggregator::name() const {
    return std::visit(overloaded{
                          [](const UtilitySum&) { return std::string("utility_sum"); },
                          [](const MeanField&) { return std::string("mean_field"); },
                          [](const EisenbergNoe&) { return std::string("eisenberg_noe"); },
                          [](const WeightedAffine&) { return std::string("weighted_affine"); },
                      },
                      kind_);
}

const FinancialNetwork* SingleElementAggregator::network() const {
    const auto* en = std::get_if<EisenbergNoe>(&kind_);
    return en ? &en->network : nullptr;
}

Eigen::VectorXd SingleElementAggregator::components(const Eigen::VectorXd& x) const {
    if (x.size() != size_) throw InputError("point has the wrong dimension");
    if (!in_domain(x)) return Eigen::VectorXd::Constant(size_, kNegInf);
    return std::visit(
        overloaded{
            [&](const UtilitySum& k) {
                Eigen::VectorXd out(size_);
                for (int i = 0; i < size_; ++i) out[i] = k.utilities[i](x[i]);
                return out;
            },
            [&](const MeanField& k) {
                const double shared = k.externality(x.mean()) / size_;
                Eigen::VectorXd out(size_);
                for (int i = 0; i < size_; ++i) out[i] = k.utilities[i](x[i]) + shared;
                return out;
            },
            [&](const EisenbergNoe& k) -> Eigen::VectorXd {
                const ClearingResult cr = clearing_vector(k.network, x);
                return k.network.society_share().cwiseProduct(cr.payments) -
                       k.gamma * k.network.society_obligations();
            },
            [&](const WeightedAffine& k) -> Eigen::VectorXd { return k.a * x - k.c; },
        },
        kind_);
}

double SingleElementAggregator::total(const Eigen::VectorXd& x) const {
    if (x.size() != size_) throw InputError("point has the wrong dimension");
    if (!in_domain(x)) return kNegInf;
    return std::visit(
        overloaded{
            [&](const UtilitySum& k) {
                double s = 0.0;
                for (int i = 0; i < size_; ++i) s += k.utilities[i](x[i]);
                return s;
            },
            [&](const MeanField& k) {
                double s = k.externality(x.mean());
                for (int i = 0; i < size_; ++i) s += k.utilities[i](x[i]);
                return s;
            },
            [&](const EisenbergNoe& k) {
                const ClearingResult cr = clearing_vector(k.network, x);
                return k.network.society_share().dot(cr.payments) - k.gamma * k.network.society_obligations().sum();
            },
            [&](const WeightedAffine& k) { return k.a.colwise().sum().dot(x) - k.c.sum(); },
        },
        kind_);
}

double SingleElementAggregator::self_feasible_level(int i) const {
    if (const auto* en = std::get_if<EisenbergNoe>(&kind_)) {
        // paying in full leaves (1 - gamma) pbar_i0 > 0 whatever the others do
        return en->network.total_obligations()[i];
    }
    double t = 1.0;
    for (int k = 0; k < 60; ++k, t *= 2.0) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(size_);
        x[i] = t;
        if (components(x)[i] > 0.0) return t;
    }
    throw BracketFailure("component " + std::to_string(i) + " of " + name() + " never becomes positive");
}

const char* to_string(Lift lift) { return lift == Lift::Sensitive ? "sensitive" : "insensitive"; }

Lift parse_lift(const std::string& text) {
    if (text == "sensitive") return Lift::Sensitive;
    if (text == "insensitive") return Lift::Insensitive;
    throw ParseError("lift must be 'sensitive' or 'insensitive', got '" + text + "'");
}

namespace {

void check_capital(const AggregationSystem& sys, const ScenarioSet& scen, const Eigen::VectorXd& m) {
    if (scen.banks() != sys.size() || m.size() != sys.size()) {
        throw InputError("scenario, capital and aggregator dimensions disagree");
    }
}

Eigen::VectorXd point(const AggregationSystem& sys, const ScenarioSet& scen, int w, const Eigen::VectorXd& m) {
    Eigen::VectorXd x = scen.scenario(w);
    if (sys.lift == Lift::Sensitive) x += m;
    if (!in_domain(x)) {
        throw OutOfDomain("scenario " + std::to_string(w + 1) + " leaves the aggregator domain");
    }
    return x;
}

}  // namespace

Eigen::MatrixXd eval_components(const AggregationSystem& sys, const ScenarioSet& scen, const Eigen::VectorXd& m) {
    check_capital(sys, scen, m);
    Eigen::MatrixXd out(sys.size(), scen.size());
    for (int w = 0; w < scen.size(); ++w) {
        out.col(w) = sys.base.components(point(sys, scen, w, m));
        if (sys.lift == Lift::Insensitive) out.col(w) += m;
    }
    return out;
}

Eigen::VectorXd eval_component(const AggregationSystem& sys, int i, const ScenarioSet& scen,
                               const Eigen::VectorXd& m) {
    if (i < 0 || i >= sys.size()) throw InputError("bank index out of range");
    return eval_components(sys, scen, m).row(i).transpose();
}

Eigen::VectorXd eval_total(const AggregationSystem& sys, const ScenarioSet& scen, const Eigen::VectorXd& m) {
    check_capital(sys, scen, m);
    Eigen::VectorXd out(scen.size());
    for (int w = 0; w < scen.size(); ++w) {
        out[w] = sys.base.total(point(sys, scen, w, m));
        if (sys.lift == Lift::Insensitive) out[w] += m.sum();
    }
    return out;
}

Eigen::VectorXd domain_lower_bound(const AggregationSystem& sys, const ScenarioSet& scen) {
    if (scen.banks() != sys.size()) throw InputError("scenario and aggregator dimensions disagree");
    const Eigen::VectorXd essinf = ess_bounds(scen).inf;
    if (sys.lift == Lift::Sensitive) return -essinf;
    if (!in_domain(essinf)) {
        throw EmptyDomain("shock leaves R^N_+; the insensitive domain is empty");
    }
    return Eigen::VectorXd::Constant(sys.size(), kNegInf);
}

namespace {

double lifted_component(const AggregationSystem& sys, int i, const Eigen::VectorXd& x, const Eigen::VectorXd& m) {
    if (sys.lift == Lift::Sensitive) return sys.base.components(x + m)[i];
    return sys.base.components(x)[i] + m[i];
}

double lifted_total(const AggregationSystem& sys, const Eigen::VectorXd& x, const Eigen::VectorXd& m) {
    if (sys.lift == Lift::Sensitive) return sys.base.total(x + m);
    return sys.base.total(x) + m.sum();
}

}  // namespace

DecompositionReport check_decomposition(const AggregationSystem& sys, const std::vector<ProbePoint>& probes) {
    constexpr double kMonoTol = 1e-12;
    constexpr double kMaxL = 4.0;
    const int n = sys.size();
    const double deltas[] = {1e-3, 1e-2, 1e-1};
    DecompositionReport rep;

    for (std::size_t k = 0; k < probes.size(); ++k) {
        const auto& [x, m] = probes[k];
        if (x.size() != n || m.size() != n) throw InputError("probe point has the wrong dimension");

        Eigen::VectorXd comps(n);
        for (int i = 0; i < n; ++i) comps[i] = lifted_component(sys, i, x, m);
        const double whole = lifted_total(sys, x, m);
        if (!std::isfinite(whole) || !comps.allFinite()) {
            throw OutOfDomain("probe " + std::to_string(k) + " lies outside the domain");
        }
        const double err = std::abs(comps.sum() - whole);
        rep.max_sum_error = std::max(rep.max_sum_error, err);
        if (err > 1e-10 * std::max(1.0, std::abs(whole))) {
            throw DecompositionMismatch("components do not sum to the aggregate at probe " + std::to_string(k));
        }

        for (double d : deltas) {
            for (int j = 0; j < n; ++j) {
                const Eigen::VectorXd step = d * Eigen::VectorXd::Unit(n, j);
                for (int i = 0; i < n; ++i) {
                    if (lifted_component(sys, i, x, m + step) < comps[i] - kMonoTol ||
                        lifted_component(sys, i, x + step, m) < comps[i] - kMonoTol) {
                        rep.monotone = false;
                    }
                    if (i == j) continue;
                    // smallest L in [0, kMaxL] with own-capital gain matching the cross gain
                    const double target = lifted_component(sys, i, x, m + step) - kMonoTol;
                    auto own = [&](double l) {
                        return lifted_component(sys, i, x, m + l * d * Eigen::VectorXd::Unit(n, i));
                    };
                    double lo = 0.0, hi = kMaxL;
                    if (own(lo) >= target) {
                        hi = 0.0;
                    } else if (own(hi) < target) {
                        hi = kMaxL;
                    } else {
                        while (hi - lo > 1e-10) {
                            const double mid = 0.5 * (lo + hi);
                            (own(mid) >= target ? hi : lo) = mid;
                        }
                    }
                    rep.self_preferential_estimate = std::max(rep.self_preferential_estimate, hi);
                }
            }
        }
    }
    return rep;
}

namespace {

using json = nlohmann::json;

UtilityFn parse_utility(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "affine") return UtilityFn::affine(j.value("a", 1.0), j.value("b", 0.0));
    if (kind == "shifted_log") return UtilityFn::shifted_log(j.at("eps").get<double>(), j.value("weight", 1.0));
    throw ParseError("unknown utility kind '" + kind + "'");
}

std::vector<UtilityFn> parse_utilities(const json& j) {
    std::vector<UtilityFn> out;
    for (const auto& u : j) out.push_back(parse_utility(u));
    return out;
}

}  // namespace

SingleElementAggregator parse_aggregator(const std::string& json_text, const FinancialNetwork* net) {
    try {
        const json j = json::parse(json_text);
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "eisenberg_noe") {
            if (net == nullptr) throw ParseError("eisenberg_noe aggregator needs a network");
            return SingleElementAggregator(EisenbergNoe{*net, j.value("gamma", 0.95)});
        }
        if (kind == "utility_sum") return SingleElementAggregator(UtilitySum{parse_utilities(j.at("utilities"))});
        if (kind == "mean_field") {
            return SingleElementAggregator(
                MeanField{parse_utilities(j.at("utilities")),
                          parse_utility(j.contains("ubar") ? j.at("ubar") : j.at("externality"))});
        }
        if (kind == "weighted_affine") {
            const auto rows = j.at("a").get<std::vector<std::vector<double>>>();
            const auto c = j.at("c").get<std::vector<double>>();
            const auto n = static_cast<Eigen::Index>(rows.size());
            Eigen::MatrixXd a(n, n);
            for (Eigen::Index r = 0; r < n; ++r) {
                if (static_cast<Eigen::Index>(rows[r].size()) != n) throw ParseError("weighted_affine 'a' must be square");
                for (Eigen::Index col = 0; col < n; ++col) a(r, col) = rows[r][col];
            }
            return SingleElementAggregator(
                WeightedAffine{a, Eigen::Map<const Eigen::VectorXd>(c.data(), Eigen::Index(c.size()))});
        }
        throw ParseError("unknown aggregator kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw ParseError(std::string("aggregator JSON: ") + e.what());
    }
}

}  // namespace sysrisk
