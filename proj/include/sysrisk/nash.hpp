#pragma once

#include "sysrisk/aggregation.hpp"
#include "sysrisk/errors.hpp"
#include "sysrisk/network.hpp"
#include "sysrisk/risk.hpp"
#include "sysrisk/scenarios.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <optional>
#include <string>

namespace sysrisk {

struct SolverConfig {
    double outer_tol = 1e-8;   // sup-norm of m - phi(m) at convergence
    double inner_tol = 1e-10;  // bracket width of each best response
    int max_outer = 10000;
    double damping = 1.0;      // in (0, 1]; halved automatically on oscillation
    /// Called with (iteration, iterate) after every outer update.
    std::function<void(int, const Eigen::VectorXd&)> on_iterate;

    void validate() const;
    /// Tolerance for system acceptability of a reported allocation.
    double acceptance_tol() const { return std::max(1e-9, 10.0 * outer_tol); }
};

/// Capital allocation together with the diagnostics that certify it.
struct AllocationReport {
    Eigen::VectorXd m;
    Eigen::VectorXd rho_values;  // rho(Lambda_i(X, m))
    Eigen::VectorXd residuals;   // |m_i - phi_i(m)|
    double system_rho = 0.0;     // rho(Lambda(X, m))
    bool system_acceptable = false;
    double total = 0.0;
    int iterations = 0;
    bool converged = true;

    double max_residual() const { return residuals.size() ? residuals.maxCoeff() : 0.0; }
};

/// Raised by nash_fixed_point when the iteration cap is hit; carries the last
/// iterate and its residuals.
class MaxIterations : public SolverError {
public:
    explicit MaxIterations(AllocationReport report)
        : SolverError("fixed-point iteration hit its cap with residual " +
                      std::to_string(report.max_residual())),
          report(std::move(report)) {}
    AllocationReport report;
};

/// phi_i(m) = inf{ r : Lambda_i(X, (r, m_{-i})) acceptable }.
///
/// Insensitive lifts use translativity directly. Sensitive lifts bracket the
/// root between the domain bound -essinf X_i and the self-feasible level and
/// shrink the bracket with safeguarded false position until it is narrower
/// than cfg.inner_tol; the acceptable end is returned.
/// Throws NonCoherentRiskMeasure, BracketFailure.
double best_response(int i, const Eigen::VectorXd& m, const ScenarioSet& scen, const AggregationSystem& sys,
                     const RiskMeasure& spec, const SolverConfig& cfg = {});

/// The whole map phi(m).
Eigen::VectorXd best_response_map(const Eigen::VectorXd& m, const ScenarioSet& scen, const AggregationSystem& sys,
                                  const RiskMeasure& spec, const SolverConfig& cfg = {});

/// Upper corner of the invariant hyperrectangle: self-feasible level minus
/// essinf X for sensitive lifts, zero for insensitive ones.
Eigen::VectorXd self_feasible_point(const ScenarioSet& scen, const AggregationSystem& sys);

/// Damped Jacobi iteration m <- (1 - d) m + d phi(m) from the self-feasible
/// point (or from `start`). Throws MaxIterations, NonCoherentRiskMeasure.
AllocationReport nash_fixed_point(const ScenarioSet& scen, const AggregationSystem& sys, const RiskMeasure& spec,
                                  const SolverConfig& cfg = {},
                                  const std::optional<Eigen::VectorXd>& start = std::nullopt);

/// Closed form r_i = rho(barLambda_i(X)) for the insensitive lift.
AllocationReport nash_insensitive(const ScenarioSet& scen, const SingleElementAggregator& base,
                                  const RiskMeasure& spec);

/// Exact Nash allocation of the sensitive Eisenberg-Noe system under a
/// deterministic shock x >= 0, by iterating on the set of banks that need
/// no capital. Terminates in at most N rounds.
AllocationReport nash_deterministic_en(const FinancialNetwork& net, const Eigen::VectorXd& x, double gamma,
                                       const RiskMeasure& spec, const SolverConfig& cfg = {});

/// Recomputes phi at m and reports residuals and acceptability.
AllocationReport verify_nash(const Eigen::VectorXd& m, const ScenarioSet& scen, const AggregationSystem& sys,
                             const RiskMeasure& spec, const SolverConfig& cfg = {});

}  // namespace sysrisk
