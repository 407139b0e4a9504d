#include "sysrisk/nash.hpp"

#include "sysrisk/clearing.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sysrisk {

void SolverConfig::validate() const {
    if (!(outer_tol > 0.0) || !(inner_tol > 0.0) || max_outer < 1 || !(damping > 0.0 && damping <= 1.0)) {
        throw InputError("solver tolerances must be positive and damping must lie in (0, 1]");
    }
}

namespace {

void require_coherent(const RiskMeasure& spec) {
    if (!spec.coherent()) {
        throw NonCoherentRiskMeasure("Nash allocation needs a coherent risk measure, got " + spec.to_string());
    }
}

// Smallest r in (lo, hi] with f(r) <= 0 given f(lo) > 0 >= f(hi), to within tol.
template <class F>
double bracketed_root(F&& f, double lo, double flo, double hi, double fhi, double tol) {
    int side = 0;
    double width_before = hi - lo;
    for (int it = 1; hi - lo > tol; ++it) {
        double c = hi - fhi * (hi - lo) / (fhi - flo);
        const bool stalled = it % 3 == 0 && hi - lo > 0.5 * width_before;
        if (it % 3 == 0) width_before = hi - lo;
        if (stalled || !(c > lo && c < hi)) c = 0.5 * (lo + hi);
        const double fc = f(c);
        if (fc <= 0.0) {
            hi = c;
            fhi = fc;
            if (side == -1) flo *= 0.5;
            side = -1;
        } else {
            lo = c;
            flo = fc;
            if (side == 1) fhi *= 0.5;
            side = 1;
        }
    }
    return hi;
}

AllocationReport make_report(const Eigen::VectorXd& m, const Eigen::VectorXd& phi, const ScenarioSet& scen,
                             const AggregationSystem& sys, const RiskMeasure& spec, const SolverConfig& cfg) {
    AllocationReport rep;
    rep.m = m;
    rep.residuals = (m - phi).cwiseAbs();
    const Eigen::MatrixXd comps = eval_components(sys, scen, m);
    rep.rho_values.resize(sys.size());
    for (int i = 0; i < sys.size(); ++i) rep.rho_values[i] = rho(spec, comps.row(i).transpose(), scen.probs());
    rep.system_rho = rho(spec, eval_total(sys, scen, m), scen.probs());
    rep.system_acceptable = rep.system_rho <= cfg.acceptance_tol();
    rep.total = m.sum();
    return rep;
}

}  // namespace

double best_response(int i, const Eigen::VectorXd& m, const ScenarioSet& scen, const AggregationSystem& sys,
                     const RiskMeasure& spec, const SolverConfig& cfg) {
    require_coherent(spec);
    if (i < 0 || i >= sys.size()) throw InputError("bank index out of range");

    if (sys.lift == Lift::Insensitive) {
        // Lambda_i(X, (r, m_-i)) = barLambda_i(X) + r, so phi_i = rho(barLambda_i(X)).
        domain_lower_bound(sys, scen);
        return rho(spec, eval_component(sys, i, scen, Eigen::VectorXd::Zero(sys.size())), scen.probs());
    }

    const double essinf = scen.values().row(i).minCoeff();
    Eigen::VectorXd trial = m;
    auto f = [&](double r) {
        trial[i] = r;
        return rho(spec, eval_component(sys, i, scen, trial), scen.probs());
    };

    const double lo = -essinf;
    const double flo = f(lo);
    if (flo <= 0.0) return lo;

    double hi = sys.base.self_feasible_level(i) - essinf;
    double fhi = f(hi);
    for (int k = 0; fhi > 0.0 && k < 60; ++k) {
        hi = lo + 2.0 * (hi - lo);
        fhi = f(hi);
    }
    if (fhi > 0.0) {
        throw BracketFailure("no acceptable capital level found for bank " + std::to_string(i));
    }
    return bracketed_root(f, lo, flo, hi, fhi, cfg.inner_tol);
}

Eigen::VectorXd best_response_map(const Eigen::VectorXd& m, const ScenarioSet& scen, const AggregationSystem& sys,
                                  const RiskMeasure& spec, const SolverConfig& cfg) {
    Eigen::VectorXd phi(sys.size());
    for (int i = 0; i < sys.size(); ++i) phi[i] = best_response(i, m, scen, sys, spec, cfg);
    return phi;
}

Eigen::VectorXd self_feasible_point(const ScenarioSet& scen, const AggregationSystem& sys) {
    const int n = sys.size();
    if (sys.lift == Lift::Insensitive) return Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd essinf = ess_bounds(scen).inf;
    Eigen::VectorXd rbar(n);
    for (int i = 0; i < n; ++i) rbar[i] = sys.base.self_feasible_level(i) - essinf[i];
    return rbar;
}

AllocationReport nash_fixed_point(const ScenarioSet& scen, const AggregationSystem& sys, const RiskMeasure& spec,
                                  const SolverConfig& cfg, const std::optional<Eigen::VectorXd>& start) {
    require_coherent(spec);
    cfg.validate();
    Eigen::VectorXd m = start ? *start : self_feasible_point(scen, sys);
    if (m.size() != sys.size()) throw InputError("start point has the wrong dimension");

    double damping = cfg.damping;
    std::vector<double> history;
    int last_halving = 0;
    Eigen::VectorXd phi;
    for (int it = 1; it <= cfg.max_outer; ++it) {
        phi = best_response_map(m, scen, sys, spec, cfg);
        const double res = (phi - m).cwiseAbs().maxCoeff();
        history.push_back(res);
        if (res <= cfg.outer_tol) {
            AllocationReport rep = make_report(m, phi, scen, sys, spec, cfg);
            rep.iterations = it;
            return rep;
        }
        // no progress over 10 sweeps: treat as oscillation
        if (it - last_halving >= 10 && res >= history[history.size() - 11]) {
            damping *= 0.5;
            last_halving = it;
        }
        m = (1.0 - damping) * m + damping * phi;
        if (cfg.on_iterate) cfg.on_iterate(it, m);
    }
    phi = best_response_map(m, scen, sys, spec, cfg);
    AllocationReport rep = make_report(m, phi, scen, sys, spec, cfg);
    rep.iterations = cfg.max_outer;
    rep.converged = false;
    throw MaxIterations(std::move(rep));
}

AllocationReport nash_insensitive(const ScenarioSet& scen, const SingleElementAggregator& base,
                                  const RiskMeasure& spec) {
    require_coherent(spec);
    const AggregationSystem sys{base, Lift::Insensitive};
    domain_lower_bound(sys, scen);
    const int n = base.size();
    const Eigen::MatrixXd comps = eval_components(sys, scen, Eigen::VectorXd::Zero(n));
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) r[i] = rho(spec, comps.row(i).transpose(), scen.probs());
    AllocationReport rep = make_report(r, r, scen, sys, spec, SolverConfig{});
    rep.iterations = 0;
    return rep;
}

AllocationReport nash_deterministic_en(const FinancialNetwork& net, const Eigen::VectorXd& x, double gamma,
                                       const RiskMeasure& spec, const SolverConfig& cfg) {
    require_coherent(spec);
    const int n = net.size();
    if (x.size() != n) throw InputError("asset vector has the wrong dimension");
    for (int i = 0; i < n; ++i)
        if (!(x[i] >= 0.0)) throw NegativeAssets(i);
    if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("gamma must lie in (0, 1)");

    const Eigen::VectorXd& totals = net.total_obligations();
    const auto pi = net.interbank_pi();
    const Eigen::MatrixXd& pbar = net.obligations();

    std::vector<bool> passive(n, false);  // banks needing no capital
    Eigen::VectorXd m(n);
    int rounds = 0;
    for (;;) {
        ++rounds;
        Eigen::VectorXd p = gamma * totals;
        std::vector<int> idx;
        for (int i = 0; i < n; ++i)
            if (passive[i]) idx.push_back(i);
        if (!idx.empty()) {
            const auto k = static_cast<Eigen::Index>(idx.size());
            Eigen::VectorXd sub_totals(k), sub_assets(k);
            Eigen::MatrixXd sub_pi(k, k);
            for (Eigen::Index r = 0; r < k; ++r) {
                const int i = idx[r];
                sub_totals[r] = totals[i];
                sub_assets[r] = 0.0;
                for (int j = 0; j < n; ++j)
                    if (!passive[j]) sub_assets[r] += gamma * pbar(j, i + 1);
                for (Eigen::Index c = 0; c < k; ++c) sub_pi(r, c) = pi(idx[r], idx[c]);
            }
            const Eigen::VectorXd sub_p = clearing_vector(sub_totals, sub_pi, sub_assets).payments;
            for (Eigen::Index r = 0; r < k; ++r) p[idx[r]] = sub_p[r];
        }

        const Eigen::VectorXd incoming = pi.transpose() * p;
        std::vector<bool> next(n);
        for (int i = 0; i < n; ++i) {
            m[i] = passive[i] ? -x[i] : -x[i] + gamma * totals[i] - incoming[i];
            next[i] = m[i] <= -x[i];
        }
        if (next == passive) break;
        passive = std::move(next);
    }

    const AggregationSystem sys{SingleElementAggregator(EisenbergNoe{net, gamma}), Lift::Sensitive};
    AllocationReport rep = verify_nash(m, ScenarioSet::deterministic(x), sys, spec, cfg);
    rep.iterations = rounds;
    return rep;
}

AllocationReport verify_nash(const Eigen::VectorXd& m, const ScenarioSet& scen, const AggregationSystem& sys,
                             const RiskMeasure& spec, const SolverConfig& cfg) {
    require_coherent(spec);
    if (m.size() != sys.size()) throw InputError("capital vector has the wrong dimension");
    const Eigen::VectorXd phi = best_response_map(m, scen, sys, spec, cfg);
    AllocationReport rep = make_report(m, phi, scen, sys, spec, cfg);
    rep.iterations = 0;
    return rep;
}

}  // namespace sysrisk
