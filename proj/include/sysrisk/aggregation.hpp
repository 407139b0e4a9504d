#pragma once

#include "sysrisk/network.hpp"
#include "sysrisk/scenarios.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace sysrisk {

/// Increasing concave utility on [0, inf), -inf to the left of zero.
struct UtilityFn {
    enum class Kind { Affine, ShiftedLog };

    Kind kind = Kind::Affine;
    double slope = 1.0;      // Affine: a >= 0
    double intercept = 0.0;  // Affine: b
    double eps = 0.5;        // ShiftedLog: weight * log(eps + t), eps in (0, 1)
    double weight = 1.0;

    static UtilityFn affine(double a, double b);
    static UtilityFn shifted_log(double eps, double weight = 1.0);

    double operator()(double t) const;
};

struct UtilitySum {
    std::vector<UtilityFn> utilities;
};

/// sum_i u_i(x_i) + ubar(mean(x)), decomposed with the equal split of the
/// externality term: component i is u_i(x_i) + ubar(mean(x)) / N.
struct MeanField {
    std::vector<UtilityFn> utilities;
    UtilityFn externality;
};

/// Society payments of the clearing system, component i is
/// pi_{i0} p_i(x) - gamma pbar_{i0}.
struct EisenbergNoe {
    FinancialNetwork network;
    double gamma = 0.95;
};

/// Component i is a_{i.}^T x - c_i.
struct WeightedAffine {
    Eigen::MatrixXd a;
    Eigen::VectorXd c;
};

/// Single-element aggregation function together with its decomposition into
/// per-bank components. All kinds share the domain R^N_+.
class SingleElementAggregator {
public:
    using Kind = std::variant<UtilitySum, MeanField, EisenbergNoe, WeightedAffine>;

    explicit SingleElementAggregator(Kind kind);

    int size() const { return size_; }
    const Kind& kind() const { return kind_; }
    std::string name() const;

    /// Component values at x; every entry is -inf when x is outside R^N_+.
    Eigen::VectorXd components(const Eigen::VectorXd& x) const;
    /// The aggregate, evaluated from its own formula rather than by summing
    /// components(). -inf outside the domain.
    double total(const Eigen::VectorXd& x) const;

    /// A level t with component i strictly positive at t e_i (all other
    /// coordinates at the domain boundary, the worst case by monotonicity).
    /// Throws BracketFailure if no such level is found.
    double self_feasible_level(int i) const;

    const FinancialNetwork* network() const;

private:
    Kind kind_;
    int size_ = 0;
};

enum class Lift { Insensitive, Sensitive };

const char* to_string(Lift lift);
Lift parse_lift(const std::string& text);

/// Insensitive: Lambda_i(x, m) = barLambda_i(x) + m_i.
/// Sensitive:   Lambda_i(x, m) = barLambda_i(x + m).
struct AggregationSystem {
    SingleElementAggregator base;
    Lift lift = Lift::Sensitive;

    int size() const { return base.size(); }
};

/// Lambda_i(X, m) per scenario. Throws OutOfDomain if some scenario leaves
/// the domain.
Eigen::VectorXd eval_component(const AggregationSystem& sys, int i, const ScenarioSet& scen,
                               const Eigen::VectorXd& m);

/// All components at once, N x S.
Eigen::MatrixXd eval_components(const AggregationSystem& sys, const ScenarioSet& scen,
                                const Eigen::VectorXd& m);

/// Lambda(X, m) per scenario from the aggregate formula.
Eigen::VectorXd eval_total(const AggregationSystem& sys, const ScenarioSet& scen, const Eigen::VectorXd& m);

/// Smallest admissible capital per bank: -essinf X for sensitive lifts,
/// -inf (unbounded) for insensitive lifts. Throws EmptyDomain when an
/// insensitive system sees shocks outside R^N_+.
Eigen::VectorXd domain_lower_bound(const AggregationSystem& sys, const ScenarioSet& scen);

struct DecompositionReport {
    double max_sum_error = 0.0;
    bool monotone = true;
    /// Largest sampled L with Lambda_i(x, m + L d e_i) >= Lambda_i(x, m + d e_j).
    double self_preferential_estimate = 0.0;
};

using ProbePoint = std::pair<Eigen::VectorXd, Eigen::VectorXd>;  // (x, m)

/// Checks the decomposition identity, coordinate monotonicity, and samples
/// the self-preferential constant at each probe. Throws
/// DecompositionMismatch if the identity fails by more than 1e-10.
DecompositionReport check_decomposition(const AggregationSystem& sys, const std::vector<ProbePoint>& probes);

/// Aggregator description in JSON:
///   {"kind":"eisenberg_noe","gamma":0.95}               (needs a network)
///   {"kind":"utility_sum","utilities":[U,...]}
///   {"kind":"mean_field","utilities":[U,...],"ubar":U}  ("externality" also accepted)
///   {"kind":"weighted_affine","a":[[...],...],"c":[...]}
/// with U = {"kind":"affine","a":1,"b":0} or {"kind":"shifted_log","eps":0.1,"weight":1}.
SingleElementAggregator parse_aggregator(const std::string& json_text, const FinancialNetwork* net);

}  // namespace sysrisk
