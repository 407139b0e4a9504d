#include "sysrisk/clearing.hpp"

#include "sysrisk/errors.hpp"

#include <algorithm>
#include <vector>
#include <cmath>

namespace sysrisk {

namespace {

constexpr double kRelTol = 1e-10;
constexpr int kPicardCap = 1'000'000;

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

void check_assets(const Eigen::VectorXd& totals, const Eigen::VectorXd& assets) {
    if (assets.size() != totals.size()) {
        throw InputError("asset vector has length " + std::to_string(assets.size()) + ", expected " +
                         std::to_string(totals.size()));
    }
    for (Eigen::Index i = 0; i < assets.size(); ++i) {
        if (!(assets[i] >= 0.0) || !std::isfinite(assets[i])) throw NegativeAssets(int(i));
    }
}

double residual(const Eigen::VectorXd& totals, const Eigen::Ref<const Eigen::MatrixXd>& pi, const Eigen::VectorXd& x,
                const Eigen::VectorXd& p) {
    const Eigen::VectorXd rhs = totals.cwiseMin(x + pi.transpose() * p);
    return (p - rhs).cwiseAbs().maxCoeff();
}

// Solves the defaulting block exactly for a fixed default set.
Eigen::VectorXd solve_default_block(const Eigen::VectorXd& totals, const Eigen::Ref<const Eigen::MatrixXd>& pi,
                                    const Eigen::VectorXd& x, const BoolArray& dflt) {
    const Eigen::Index n = totals.size();
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i)
        if (dflt[i]) idx.push_back(i);
    Eigen::VectorXd p = totals;
    if (idx.empty()) return p;

    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(k, k);
    Eigen::VectorXd b(k);
    for (Eigen::Index r = 0; r < k; ++r) {
        const Eigen::Index i = idx[r];
        b[r] = x[i];
        for (Eigen::Index j = 0; j < n; ++j)
            if (!dflt[j]) b[r] += pi(j, i) * totals[j];
        for (Eigen::Index c = 0; c < k; ++c) a(r, c) -= pi(idx[c], i);
    }
    const Eigen::VectorXd sol = a.partialPivLu().solve(b);
    for (Eigen::Index r = 0; r < k; ++r) p[idx[r]] = std::clamp(sol[r], 0.0, totals[idx[r]]);
    return p;
}

}  // namespace

ClearingResult clearing_vector(const Eigen::VectorXd& totals, const Eigen::Ref<const Eigen::MatrixXd>& pi,
                               const Eigen::VectorXd& x) {
    check_assets(totals, x);
    const Eigen::Index n = totals.size();
    const double tol = kRelTol * std::max(1.0, totals.maxCoeff());

    ClearingResult out;
    out.payments = totals;
    BoolArray dflt = BoolArray::Constant(n, false);

    const int cap = 10 * int(n) + 1;
    bool settled = false;
    for (int round = 0; round < cap; ++round) {
        ++out.iterations;
        const Eigen::VectorXd wealth = x + pi.transpose() * out.payments;
        BoolArray next = dflt || (wealth.array() < totals.array());
        if ((next == dflt).all()) {
            settled = true;
            break;
        }
        dflt = next;
        out.payments = solve_default_block(totals, pi, x, dflt);
    }

    if (!settled || residual(totals, pi, x, out.payments) > tol) {
        // Picard from the top converges monotonically to the greatest clearing vector.
        Eigen::VectorXd p = totals;
        int it = 0;
        for (; it < kPicardCap; ++it) {
            Eigen::VectorXd q = totals.cwiseMin(x + pi.transpose() * p);
            const double step = (q - p).cwiseAbs().maxCoeff();
            p = std::move(q);
            if (step <= 0.01 * tol) break;
        }
        if (it == kPicardCap || residual(totals, pi, x, p) > tol) {
            throw NonConvergence("clearing vector did not converge");
        }
        out.payments = p;
        out.iterations += it;
    }
    out.defaults = out.payments.array() < totals.array();
    return out;
}

ClearingResult clearing_vector(const FinancialNetwork& net, const Eigen::VectorXd& assets) {
    return clearing_vector(net.total_obligations(), net.interbank_pi(), assets);
}

double clearing_residual(const FinancialNetwork& net, const Eigen::VectorXd& assets,
                         const Eigen::VectorXd& payments) {
    return residual(net.total_obligations(), net.interbank_pi(), assets, payments);
}

Eigen::MatrixXd clearing_jacobian(const FinancialNetwork& net, const Eigen::VectorXd& assets) {
    const ClearingResult cr = clearing_vector(net, assets);
    const int n = net.size();
    const Eigen::VectorXd lambda = cr.defaults.cast<double>();
    const Eigen::MatrixXd a =
        Eigen::MatrixXd::Identity(n, n) - lambda.asDiagonal() * net.interbank_pi().transpose();
    const auto lu = a.fullPivLu();
    if (!lu.isInvertible() || lu.rcond() < 1e-14) {
        throw SingularSystem("Leontief system is singular");
    }
    return lu.solve(Eigen::MatrixXd(lambda.asDiagonal()));
}

Eigen::VectorXd society_payment_components(const FinancialNetwork& net, const Eigen::VectorXd& assets,
                                           double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("gamma must lie in (0, 1)");
    const ClearingResult cr = clearing_vector(net, assets);
    return net.society_share().cwiseProduct(cr.payments) - gamma * net.society_obligations();
}

double local_self_preferential_ratio(const FinancialNetwork& net, const Eigen::VectorXd& assets) {
    const Eigen::MatrixXd jac = clearing_jacobian(net, assets);
    const int n = net.size();
    double ratio = 0.0;
    for (int j = 0; j < n; ++j) {
        if (jac(j, j) <= 0.0) continue;  // j pays in full
        for (int i = 0; i < n; ++i)
            if (i != j) ratio = std::max(ratio, jac(j, i) / jac(j, j));
    }
    return ratio;
}

}  // namespace sysrisk
