#pragma once

#include "sysrisk/network.hpp"

#include <Eigen/Dense>

namespace sysrisk {

struct ClearingResult {
    Eigen::VectorXd payments;
    /// defaults[i] is true when bank i pays strictly less than it owes.
    Eigen::Array<bool, Eigen::Dynamic, 1> defaults;
    int iterations = 0;
};

/// Eisenberg-Noe clearing payments p(x) for external assets x >= 0:
///   p_i = min{ total_i, x_i + sum_j pi_ji p_j }.
///
/// Solved by the fictitious default algorithm (the default set only grows,
/// so at most N+1 linear solves), with Picard iteration as a fallback if the
/// result misses the fixed-point tolerance. Throws NegativeAssets.
ClearingResult clearing_vector(const FinancialNetwork& net, const Eigen::VectorXd& assets);

/// Same, for a bare system given by total obligations and the N x N
/// interbank block of relative liabilities (rows may sum to less than 1).
ClearingResult clearing_vector(const Eigen::VectorXd& totals,
                               const Eigen::Ref<const Eigen::MatrixXd>& interbank_pi,
                               const Eigen::VectorXd& assets);

/// Max-norm violation of the clearing equation at p.
double clearing_residual(const FinancialNetwork& net, const Eigen::VectorXd& assets,
                         const Eigen::VectorXd& payments);

/// dp/dx = (I - diag(lambda) pi^T)^{-1} diag(lambda), lambda the default
/// indicator of the computed clearing vector. At kinks this is the
/// derivative for the default set at x, i.e. one-sided.
Eigen::MatrixXd clearing_jacobian(const FinancialNetwork& net, const Eigen::VectorXd& assets);

/// Per-bank society surplus pi_{i0} p_i(x) - gamma pbar_{i0}.
Eigen::VectorXd society_payment_components(const FinancialNetwork& net,
                                           const Eigen::VectorXd& assets, double gamma);

/// Jacobian ratio max_{i != j, j defaulting} J_ji / J_jj at x; 0 when nobody
/// defaults.
double local_self_preferential_ratio(const FinancialNetwork& net, const Eigen::VectorXd& assets);

}  // namespace sysrisk
