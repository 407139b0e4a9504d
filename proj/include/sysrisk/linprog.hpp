#pragma once

#include "sysrisk/nash.hpp"
#include "sysrisk/network.hpp"
#include "sysrisk/risk.hpp"
#include "sysrisk/scenarios.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sysrisk {

enum class Relation { LessEqual, Equal, GreaterEqual };

struct Constraint {
    std::vector<std::pair<int, double>> terms;  // (variable, coefficient)
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
    std::string name;
};

/// min c^T x  s.t.  constraints, lower <= x <= upper.
struct LinearProgram {
    Eigen::VectorXd objective;
    std::vector<Constraint> constraints;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    std::vector<std::string> names;
    /// Secondary objective minimized over the optimal face of the primary one.
    std::optional<Eigen::VectorXd> tie_break;

    int num_variables() const { return static_cast<int>(objective.size()); }

    /// Appends a variable and returns its index.
    int add_variable(std::string name, double lo, double hi, double cost = 0.0);
    void add_constraint(std::vector<std::pair<int, double>> terms, Relation rel, double rhs, std::string name = {});
    /// Dense row, zeros dropped.
    void add_dense_constraint(const Eigen::VectorXd& coeffs, Relation rel, double rhs, std::string name = {});

    /// Throws InputError on inconsistent sizes, bad bounds or non-finite data.
    void validate() const;
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LPStatus status);

struct LPResult {
    LPStatus status = LPStatus::Infeasible;
    Eigen::VectorXd solution;
    double objective = std::numeric_limits<double>::quiet_NaN();
    int pivots = 0;
};

/// Two-phase bounded-variable primal simplex on a dense tableau. Dantzig
/// pricing, switching to Bland's rule after 500 consecutive degenerate pivots.
/// Throws NumericalBreakdown when a pivot element falls below 1e-11.
LPResult solve_lp(const LinearProgram& lp);

/// Human-readable dump: objective, named rows, bounds.
void write_lp(std::ostream& os, const LinearProgram& lp);

enum class CapitalConstraint { PerBank, Aggregate };

struct ENProgramSolution {
    Eigen::VectorXd m;
    Eigen::MatrixXd payments;  // N x S recovered clearing vectors
    double total = 0.0;
    int pivots = 0;
};

/// Builds the program min sum m over capital m >= -essinf X and per-scenario
/// sub-solutions p^w of the clearing problem, with acceptability imposed per
/// bank or on the aggregate. Supports Expectation, AVaR and OCE.
LinearProgram en_capital_program(const FinancialNetwork& net, const ScenarioSet& scen, const RiskMeasure& spec,
                                 double gamma, CapitalConstraint kind);

ENProgramSolution solve_en_capital(const FinancialNetwork& net, const ScenarioSet& scen, const RiskMeasure& spec,
                                   double gamma, CapitalConstraint kind, std::ostream* dump = nullptr);

/// Nash allocation of the sensitive Eisenberg-Noe system from the per-bank
/// program, re-verified through best responses.
AllocationReport nash_lp_en(const FinancialNetwork& net, const ScenarioSet& scen, const RiskMeasure& spec,
                            double gamma, const SolverConfig& cfg = {}, std::ostream* dump = nullptr);

/// Minimal total capital making the aggregate society payment acceptable.
ENProgramSolution minimal_capital_en(const FinancialNetwork& net, const ScenarioSet& scen, const RiskMeasure& spec,
                                     double gamma, std::ostream* dump = nullptr);

}  // namespace sysrisk
