#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace sysrisk {

/// Interbank obligations network.
///
/// `obligations()` is N x (N+1): column 0 holds the amounts owed to society,
/// column j >= 1 the amounts owed to bank j. Instances only come out of
/// validate_network(), so every FinancialNetwork is regular: strictly positive
/// society obligations, zero diagonal and row-stochastic relative liabilities.
class FinancialNetwork {
public:
    int size() const { return static_cast<int>(obligations_.rows()); }

    const Eigen::MatrixXd& obligations() const { return obligations_; }
    const Eigen::VectorXd& total_obligations() const { return totals_; }
    /// Relative liabilities, N x (N+1), same column layout as obligations().
    const Eigen::MatrixXd& pi() const { return pi_; }

    /// pi restricted to bank columns (N x N).
    auto interbank_pi() const { return pi_.rightCols(size()); }
    /// pi_{i0}.
    auto society_share() const { return pi_.col(0); }
    /// pbar_{i0}.
    auto society_obligations() const { return obligations_.col(0); }

    const std::vector<std::string>& names() const { return names_; }

private:
    friend FinancialNetwork validate_network(const Eigen::MatrixXd&, std::vector<std::string>);

    Eigen::MatrixXd obligations_;
    Eigen::VectorXd totals_;
    Eigen::MatrixXd pi_;
    std::vector<std::string> names_;
};

/// Checks a raw obligations matrix and derives relative liabilities.
/// Throws NegativeObligation, ZeroSocietyObligation, NonzeroDiagonal or
/// InputError (shape).
FinancialNetwork validate_network(const Eigen::MatrixXd& raw_obligations,
                                  std::vector<std::string> names = {});

/// Reads the network JSON format:
///   {"banks": [...], "society": [...], "interbank": [[...], ...]}
/// "banks" is optional. Throws ParseError on malformed content.
FinancialNetwork load_network(const std::filesystem::path& path);
FinancialNetwork parse_network(const std::string& json_text);
std::string network_to_json(const FinancialNetwork& net);

/// max_i (1 - pi_{i0}): upper bound on the self-preferential constant of the
/// Eisenberg-Noe decomposition. Always in [0, 1).
double self_preferential_bound(const FinancialNetwork& net);

}  // namespace sysrisk
