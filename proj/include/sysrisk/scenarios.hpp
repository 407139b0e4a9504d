#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>

namespace sysrisk {

/// Finite stress scenario: values(i, w) is the shock to bank i in scenario w.
/// Probabilities are strictly positive and sum to one.
class ScenarioSet {
public:
    /// Throws InputError when the invariants fail.
    ScenarioSet(Eigen::MatrixXd values, Eigen::VectorXd probs);

    /// Equal-probability scenarios.
    static ScenarioSet uniform(Eigen::MatrixXd values);
    /// A single scenario with probability one.
    static ScenarioSet deterministic(const Eigen::VectorXd& x);

    int banks() const { return static_cast<int>(values_.rows()); }
    int size() const { return static_cast<int>(values_.cols()); }
    const Eigen::MatrixXd& values() const { return values_; }
    const Eigen::VectorXd& probs() const { return probs_; }
    auto scenario(int w) const { return values_.col(w); }

private:
    Eigen::MatrixXd values_;
    Eigen::VectorXd probs_;
};

struct EssentialBounds {
    Eigen::VectorXd inf;
    Eigen::VectorXd sup;
};

EssentialBounds ess_bounds(const ScenarioSet& scen);

/// Comonotonic rearrangement: each bank's right-continuous quantile function
/// evaluated on the merged grid of cumulative-probability breakpoints. The
/// marginal laws are preserved and the coordinates become comonotone.
ScenarioSet comonotonic_copula(const ScenarioSet& scen);

/// X_i = scales_i * Phi(G_i) with G ~ N(0, corr). Equal probabilities.
///
/// Normals come from std::mt19937_64 through the Box-Muller transform on
/// 53-bit uniforms, correlated by the Cholesky factor of corr, so output is
/// reproducible bit-for-bit for a given seed. Throws NotPositiveDefinite.
ScenarioSet gaussian_copula_sample(const Eigen::MatrixXd& corr, const Eigen::VectorXd& scales,
                                   int n, std::uint64_t seed);

/// Equicorrelation matrix with unit diagonal.
Eigen::MatrixXd equicorrelation(int n, double rho);

/// CSV with header `prob,bank_1,...,bank_N`, one row per scenario.
ScenarioSet load_scenarios(const std::filesystem::path& path);
ScenarioSet parse_scenarios(std::istream& in);
void write_scenarios(std::ostream& out, const ScenarioSet& scen);

}  // namespace sysrisk
