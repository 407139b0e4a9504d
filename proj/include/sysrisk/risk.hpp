#pragma once

#include <Eigen/Dense>

#include <string>

namespace sysrisk {

/// Scalar monetary risk measure on a finite probability space.
///
/// Acceptance is rho(Y) <= 0. Expectation, AVaR and OCE are coherent;
/// the entropic measure is only convex and exists to demonstrate what goes
/// wrong without coherence.
struct RiskMeasure {
    enum class Kind { Expectation, AVaR, OCE, Entropic };

    Kind kind = Kind::Expectation;
    double alpha = 1.0;   // AVaR level in (0, 1]
    double gamma1 = 1.0;  // OCE slope on gains, in [0, 1]
    double gamma2 = 1.0;  // OCE slope on losses, >= 1
    double theta = 1.0;   // entropic risk aversion, > 0

    static RiskMeasure expectation();
    static RiskMeasure avar(double alpha);
    static RiskMeasure oce(double gamma1, double gamma2);
    static RiskMeasure entropic(double theta);

    bool coherent() const { return kind != Kind::Entropic; }
    /// Round-trips through parse_risk_measure().
    std::string to_string() const;
};

/// Parses `expectation`, `avar:0.05`, `oce:0.0:20.0`, `entropic:1.0`.
RiskMeasure parse_risk_measure(const std::string& text);

/// rho(Y) for outcomes y with probabilities probs.
///
///   Expectation  -E[Y]
///   AVaR(a)      -(1/a) * (mass-weighted sum of the worst a of Y)
///   OCE(g1, g2)  min_m m - E[u(Y + m)], u(t) = g1 t (t > 0), g2 t (t <= 0)
///   Entropic(th) (1/th) log E[exp(-th Y)]
///
/// The OCE objective is convex and piecewise linear with kinks at -y, so the
/// minimum is taken over those breakpoints exactly.
double rho(const RiskMeasure& spec, const Eigen::Ref<const Eigen::VectorXd>& y,
           const Eigen::Ref<const Eigen::VectorXd>& probs);

bool is_acceptable(const RiskMeasure& spec, const Eigen::Ref<const Eigen::VectorXd>& y,
                   const Eigen::Ref<const Eigen::VectorXd>& probs, double tol = 1e-9);

}  // namespace sysrisk
