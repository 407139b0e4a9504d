#include "sysrisk/linprog.hpp"

#include "sysrisk/aggregation.hpp"
#include "sysrisk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace sysrisk {

int LinearProgram::add_variable(std::string name, double lo, double hi, double cost) {
    const auto n = objective.size();
    objective.conservativeResize(n + 1);
    lower.conservativeResize(n + 1);
    upper.conservativeResize(n + 1);
    objective[n] = cost;
    lower[n] = lo;
    upper[n] = hi;
    names.push_back(std::move(name));
    if (tie_break) {
        tie_break->conservativeResize(n + 1);
        (*tie_break)[n] = 0.0;
    }
    return static_cast<int>(n);
}

void LinearProgram::add_constraint(std::vector<std::pair<int, double>> terms, Relation rel, double rhs,
                                   std::string name) {
    constraints.push_back({std::move(terms), rel, rhs, std::move(name)});
}

void LinearProgram::add_dense_constraint(const Eigen::VectorXd& coeffs, Relation rel, double rhs, std::string name) {
    std::vector<std::pair<int, double>> terms;
    for (Eigen::Index j = 0; j < coeffs.size(); ++j)
        if (coeffs[j] != 0.0) terms.emplace_back(static_cast<int>(j), coeffs[j]);
    add_constraint(std::move(terms), rel, rhs, std::move(name));
}

void LinearProgram::validate() const {
    const auto n = objective.size();
    if (lower.size() != n || upper.size() != n) throw InputError("bound vectors do not match the objective");
    if (!names.empty() && static_cast<Eigen::Index>(names.size()) != n) {
        throw InputError("variable names do not match the objective");
    }
    if (tie_break && tie_break->size() != n) throw InputError("tie-break objective has the wrong size");
    if (!objective.allFinite() || (tie_break && !tie_break->allFinite())) {
        throw InputError("objective coefficients must be finite");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] == INFINITY || upper[j] == -INFINITY) {
            throw InputError("invalid bounds on variable " + std::to_string(j));
        }
    }
    for (const auto& c : constraints) {
        if (!std::isfinite(c.rhs)) throw InputError("constraint right-hand sides must be finite");
        for (const auto& [j, a] : c.terms) {
            if (j < 0 || j >= n) throw InputError("constraint refers to an unknown variable");
            if (!std::isfinite(a)) throw InputError("constraint coefficients must be finite");
        }
    }
}

const char* to_string(LPStatus status) {
    switch (status) {
        case LPStatus::Optimal: return "optimal";
        case LPStatus::Infeasible: return "infeasible";
        case LPStatus::Unbounded: return "unbounded";
    }
    return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;   // smaller tableau entries are ignored by the ratio test
constexpr double kBreakdown = 1e-11;
constexpr double kCostTol = 1e-9;
constexpr double kDrop = 1e-13;      // fill-in below this is flushed to zero
constexpr int kBlandAfter = 500;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// x_original = offset + sum sign * column value
struct Piece {
    int col;
    double sign;
};
struct VarMap {
    double offset = 0.0;
    std::vector<Piece> pieces;
};

// Bounded-variable simplex state. Every column lives in [0, upper]; nonbasic
// columns sit at one of their bounds.
class Tableau {
public:
    Tableau(int rows, int cols)
        : t_(RowMatrix::Zero(rows, cols)), xb_(rows), upper_(Eigen::VectorXd::Constant(cols, kInf)),
          d_(Eigen::VectorXd::Zero(cols)), basis_(rows, -1), basic_row_(cols, -1), at_upper_(cols, 0),
          eligible_(cols, 1) {}

    RowMatrix& t() { return t_; }
    Eigen::VectorXd& upper() { return upper_; }

    void set_basic(int row, int col, double value) {
        basis_[row] = col;
        basic_row_[col] = row;
        xb_[row] = value;
    }

    void set_costs(const Eigen::VectorXd& c) {
        d_ = c;
        for (int r = 0; r < rows(); ++r) {
            const double cb = c[basis_[r]];
            if (cb != 0.0) d_ -= cb * t_.row(r).transpose();
        }
        for (int r = 0; r < rows(); ++r) d_[basis_[r]] = 0.0;
    }

    double value(int col) const {
        if (basic_row_[col] >= 0) return xb_[basic_row_[col]];
        return at_upper_[col] ? upper_[col] : 0.0;
    }

    bool is_basic(int col) const { return basic_row_[col] >= 0; }
    double reduced_cost(int col) const { return d_[col]; }
    void exclude(int col) { eligible_[col] = 0; }
    int pivots() const { return pivots_; }
    int rows() const { return static_cast<int>(t_.rows()); }
    int cols() const { return static_cast<int>(t_.cols()); }

    // Drives the current cost row to optimality. Returns false if unbounded.
    bool optimize() {
        const long cap = 100L * (rows() + cols()) + 1000;
        int degenerate = 0;
        for (long iter = 0;; ++iter) {
            if (iter > cap) throw NonConvergence("simplex iteration cap reached");
            const bool bland = degenerate >= kBlandAfter;

            int enter = -1;
            int dir = 0;
            double best = 0.0;
            for (int j = 0; j < cols(); ++j) {
                if (basic_row_[j] >= 0 || !eligible_[j] || upper_[j] <= 0.0) continue;
                const double dj = d_[j];
                int s = 0;
                if (!at_upper_[j] && dj < -kCostTol) s = 1;
                else if (at_upper_[j] && dj > kCostTol) s = -1;
                if (s == 0) continue;
                if (bland) {
                    enter = j;
                    dir = s;
                    break;
                }
                if (std::abs(dj) > best) {
                    best = std::abs(dj);
                    enter = j;
                    dir = s;
                }
            }
            if (enter < 0) return true;

            double theta = upper_[enter];
            int leave = -1;
            bool leave_to_upper = false;
            double leave_mag = 0.0;
            const double* col = t_.data() + enter;
            const Eigen::Index stride = t_.cols();
            for (int r = 0; r < rows(); ++r) {
                const double a = col[r * stride];
                if (std::abs(a) <= kPivotTol) continue;
                const double coef = dir * a;
                const int b = basis_[r];
                double lim;
                bool to_upper;
                if (coef > 0.0) {
                    lim = xb_[r] / coef;
                    to_upper = false;
                } else {
                    if (upper_[b] == kInf) continue;
                    lim = (upper_[b] - xb_[r]) / (-coef);
                    to_upper = true;
                }
                lim = std::max(lim, 0.0);
                bool take = lim < theta - 1e-12;
                if (!take && leave >= 0 && lim <= theta + 1e-12) {
                    take = bland ? b < basis_[leave] : std::abs(a) > leave_mag;
                }
                if (take) {
                    theta = std::min(theta, lim);
                    leave = r;
                    leave_to_upper = to_upper;
                    leave_mag = std::abs(a);
                }
            }
            if (theta == kInf) return false;
            degenerate = theta <= 1e-12 ? degenerate + 1 : 0;

            if (theta > 0.0) {
                for (int r = 0; r < rows(); ++r) {
                    const double a = col[r * stride];
                    if (a != 0.0) xb_[r] -= dir * theta * a;
                }
            }
            if (leave < 0) {
                at_upper_[enter] = !at_upper_[enter];
                continue;
            }

            const double entering_value = (at_upper_[enter] ? upper_[enter] : 0.0) + dir * theta;
            const int out = basis_[leave];
            at_upper_[out] = leave_to_upper;
            basic_row_[out] = -1;
            pivot(leave, enter);
            at_upper_[enter] = 0;
            set_basic(leave, enter, entering_value);
            clamp();
        }
    }

private:
    void pivot(int r, int j) {
        ++pivots_;
        const Eigen::Index n = t_.cols();
        double* pr = t_.data() + r * n;
        const double piv = pr[j];
        if (!(std::abs(piv) >= kBreakdown)) throw NumericalBreakdown("simplex pivot element below 1e-11");
        nz_.clear();
        for (Eigen::Index c = 0; c < n; ++c) {
            if (pr[c] == 0.0) continue;
            pr[c] /= piv;
            if (std::abs(pr[c]) < kDrop) pr[c] = 0.0;
            else nz_.push_back(static_cast<int>(c));
        }
        pr[j] = 1.0;
        for (int k = 0; k < rows(); ++k) {
            if (k == r) continue;
            double* pk = t_.data() + k * n;
            const double f = pk[j];
            if (f == 0.0) continue;
            for (int c : nz_) {
                const double v = pk[c] - f * pr[c];
                pk[c] = std::abs(v) < kDrop ? 0.0 : v;
            }
            pk[j] = 0.0;
        }
        const double f = d_[j];
        if (f != 0.0) {
            for (int c : nz_) d_[c] -= f * pr[c];
            d_[j] = 0.0;
        }
    }

    // Absorb rounding drift of basic values outside their bounds.
    void clamp() {
        for (int r = 0; r < rows(); ++r) {
            const double u = upper_[basis_[r]];
            if (xb_[r] < 0.0) xb_[r] = 0.0;
            else if (xb_[r] > u) xb_[r] = u;
        }
    }

    RowMatrix t_;
    Eigen::VectorXd xb_;
    Eigen::VectorXd upper_;
    Eigen::VectorXd d_;
    std::vector<int> basis_;
    std::vector<int> basic_row_;
    std::vector<char> at_upper_;
    std::vector<char> eligible_;
    std::vector<int> nz_;
    int pivots_ = 0;
};

}  // namespace

LPResult solve_lp(const LinearProgram& lp) {
    lp.validate();
    const int nvar = lp.num_variables();
    const int nrow = static_cast<int>(lp.constraints.size());

    LPResult result;
    for (int j = 0; j < nvar; ++j) {
        if (lp.lower[j] > lp.upper[j]) return result;  // empty box
    }

    // Shift, reflect or split each variable onto columns with lower bound 0.
    std::vector<VarMap> vars(nvar);
    std::vector<double> col_upper;
    for (int j = 0; j < nvar; ++j) {
        const double lo = lp.lower[j];
        const double hi = lp.upper[j];
        auto& v = vars[j];
        if (std::isfinite(lo)) {
            v.offset = lo;
            v.pieces.push_back({static_cast<int>(col_upper.size()), 1.0});
            col_upper.push_back(hi - lo);
        } else if (std::isfinite(hi)) {
            v.offset = hi;
            v.pieces.push_back({static_cast<int>(col_upper.size()), -1.0});
            col_upper.push_back(kInf);
        } else {
            v.pieces.push_back({static_cast<int>(col_upper.size()), 1.0});
            col_upper.push_back(kInf);
            v.pieces.push_back({static_cast<int>(col_upper.size()), -1.0});
            col_upper.push_back(kInf);
        }
    }
    const int nstruct = static_cast<int>(col_upper.size());

    // Transformed right-hand sides decide which rows need an artificial.
    std::vector<double> rhs(nrow);
    std::vector<double> sign(nrow);
    std::vector<char> needs_art(nrow);
    int nslack = 0;
    int nart = 0;
    double rhs_scale = 1.0;
    for (int r = 0; r < nrow; ++r) {
        const auto& c = lp.constraints[r];
        double b = c.rhs;
        for (const auto& [j, a] : c.terms) b -= a * vars[j].offset;
        rhs[r] = b;
        rhs_scale = std::max(rhs_scale, std::abs(b));
        if (c.relation != Relation::Equal) ++nslack;
        switch (c.relation) {
            case Relation::LessEqual: sign[r] = b >= 0.0 ? 1.0 : -1.0; needs_art[r] = b < 0.0; break;
            case Relation::GreaterEqual: sign[r] = b <= 0.0 ? -1.0 : 1.0; needs_art[r] = b > 0.0; break;
            case Relation::Equal: sign[r] = b >= 0.0 ? 1.0 : -1.0; needs_art[r] = 1; break;
        }
        nart += needs_art[r];
    }

    const int ncols = nstruct + nslack + nart;
    Tableau tab(nrow, ncols);
    auto& t = tab.t();
    for (int c = 0; c < nstruct; ++c) tab.upper()[c] = col_upper[c];

    int next_slack = nstruct;
    int next_art = nstruct + nslack;
    for (int r = 0; r < nrow; ++r) {
        const auto& c = lp.constraints[r];
        for (const auto& [j, a] : c.terms)
            for (const auto& p : vars[j].pieces) t(r, p.col) += sign[r] * a * p.sign;
        int slack = -1;
        if (c.relation != Relation::Equal) {
            slack = next_slack++;
            t(r, slack) = sign[r] * (c.relation == Relation::LessEqual ? 1.0 : -1.0);
        }
        const double b = sign[r] * rhs[r];
        if (needs_art[r]) {
            const int art = next_art++;
            t(r, art) = 1.0;
            tab.set_basic(r, art, b);
        } else {
            tab.set_basic(r, slack, b);
        }
    }

    if (nart > 0) {
        Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(ncols);
        phase1.tail(nart).setOnes();
        tab.set_costs(phase1);
        tab.optimize();  // bounded below by zero
        double infeas = 0.0;
        for (int c = nstruct + nslack; c < ncols; ++c) infeas += tab.value(c);
        if (infeas > 1e-8 * rhs_scale) {
            result.pivots = tab.pivots();
            return result;
        }
        for (int c = nstruct + nslack; c < ncols; ++c) {
            tab.upper()[c] = 0.0;
            tab.exclude(c);
        }
    }

    auto column_costs = [&](const Eigen::VectorXd& c) {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(ncols);
        for (int j = 0; j < nvar; ++j)
            for (const auto& p : vars[j].pieces) out[p.col] = c[j] * p.sign;
        return out;
    };

    tab.set_costs(column_costs(lp.objective));
    if (!tab.optimize()) {
        result.status = LPStatus::Unbounded;
        result.pivots = tab.pivots();
        return result;
    }

    if (lp.tie_break) {
        // Restrict to the optimal face: nonbasic columns with nonzero reduced cost stay put.
        for (int c = 0; c < ncols; ++c)
            if (!tab.is_basic(c) && std::abs(tab.reduced_cost(c)) > kCostTol) tab.exclude(c);
        tab.set_costs(column_costs(*lp.tie_break));
        tab.optimize();
    }

    result.status = LPStatus::Optimal;
    result.solution.resize(nvar);
    for (int j = 0; j < nvar; ++j) {
        double x = vars[j].offset;
        for (const auto& p : vars[j].pieces) x += p.sign * tab.value(p.col);
        result.solution[j] = x;
    }
    result.objective = lp.objective.dot(result.solution);
    result.pivots = tab.pivots();
    return result;
}

void write_lp(std::ostream& os, const LinearProgram& lp) {
    auto name = [&](int j) { return j < static_cast<int>(lp.names.size()) && !lp.names[j].empty()
                                        ? lp.names[j] : "x" + std::to_string(j); };
    auto term = [&](double a, int j, bool first) {
        if (a < 0.0) os << (first ? "-" : " - ");
        else if (!first) os << " + ";
        os << std::abs(a) << ' ' << name(j);
    };
    os << "minimize\n  obj:";
    bool first = true;
    for (int j = 0; j < lp.num_variables(); ++j) {
        if (lp.objective[j] == 0.0) continue;
        os << ' ';
        term(lp.objective[j], j, first);
        first = false;
    }
    if (first) os << " 0";
    os << "\nsubject to\n";
    for (std::size_t r = 0; r < lp.constraints.size(); ++r) {
        const auto& c = lp.constraints[r];
        os << "  " << (c.name.empty() ? "c" + std::to_string(r) : c.name) << ": ";
        first = true;
        for (const auto& [j, a] : c.terms) {
            term(a, j, first);
            first = false;
        }
        if (first) os << '0';
        os << (c.relation == Relation::LessEqual ? " <= " : c.relation == Relation::Equal ? " = " : " >= ")
           << c.rhs << '\n';
    }
    os << "bounds\n";
    for (int j = 0; j < lp.num_variables(); ++j) {
        os << "  " << lp.lower[j] << " <= " << name(j) << " <= " << lp.upper[j] << '\n';
    }
    if (lp.tie_break) {
        os << "tie-break\n  obj2:";
        first = true;
        for (int j = 0; j < lp.num_variables(); ++j) {
            if ((*lp.tie_break)[j] == 0.0) continue;
            os << ' ';
            term((*lp.tie_break)[j], j, first);
            first = false;
        }
        os << '\n';
    }
    os << "end\n";
}

namespace {

// Y_w = sum terms_w + constant_w
struct ScenarioOutcome {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;
};

void add_acceptability(LinearProgram& lp, const std::vector<ScenarioOutcome>& y, const Eigen::VectorXd& probs,
                       const RiskMeasure& spec, const std::string& label) {
    const int s = static_cast<int>(y.size());
    if (spec.kind == RiskMeasure::Kind::Expectation) {
        std::vector<std::pair<int, double>> terms;
        double rhs = 0.0;
        for (int w = 0; w < s; ++w) {
            for (const auto& [j, a] : y[w].terms) terms.emplace_back(j, probs[w] * a);
            rhs -= probs[w] * y[w].constant;
        }
        lp.add_constraint(std::move(terms), Relation::GreaterEqual, rhs, "accept[" + label + "]");
        return;
    }

    double g1 = 0.0;
    double g2 = 0.0;
    if (spec.kind == RiskMeasure::Kind::AVaR) {
        g2 = 1.0 / spec.alpha;
    } else if (spec.kind == RiskMeasure::Kind::OCE) {
        g1 = spec.gamma1;
        g2 = spec.gamma2;
    } else {
        throw InputError("risk measure " + spec.to_string() + " has no linear encoding");
    }

    // t - g1 E[a] + g2 E[b] <= 0 with a - b = Y + t, a, b >= 0
    const int t = lp.add_variable("t[" + label + "]", -kInf, kInf);
    std::vector<std::pair<int, double>> budget{{t, 1.0}};
    for (int w = 0; w < s; ++w) {
        const std::string tag = label + "," + std::to_string(w);
        const int b = lp.add_variable("b[" + tag + "]", 0.0, kInf);
        budget.emplace_back(b, g2 * probs[w]);
        auto terms = y[w].terms;
        terms.emplace_back(t, 1.0);
        if (g1 > 0.0) {
            const int a = lp.add_variable("a[" + tag + "]", 0.0, kInf);
            budget.emplace_back(a, -g1 * probs[w]);
            for (auto& term : terms) term.second = -term.second;
            terms.emplace_back(a, 1.0);
            terms.emplace_back(b, -1.0);
            lp.add_constraint(std::move(terms), Relation::Equal, y[w].constant, "link[" + tag + "]");
        } else {
            // a is a pure slack here
            terms.emplace_back(b, 1.0);
            lp.add_constraint(std::move(terms), Relation::GreaterEqual, -y[w].constant, "link[" + tag + "]");
        }
    }
    lp.add_constraint(std::move(budget), Relation::LessEqual, 0.0, "budget[" + label + "]");
}

}  // namespace

LinearProgram en_capital_program(const FinancialNetwork& net, const ScenarioSet& scen, const RiskMeasure& spec,
                                 double gamma, CapitalConstraint kind) {
    const int n = net.size();
    const int s = scen.size();
    if (scen.banks() != n) throw InputError("scenario set and network differ in the number of banks");
    if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("gamma must lie in (0, 1)");
    if (spec.kind == RiskMeasure::Kind::Entropic) {
        throw InputError("risk measure " + spec.to_string() + " has no linear encoding");
    }

    const Eigen::VectorXd essinf = ess_bounds(scen).inf;
    const Eigen::VectorXd& totals = net.total_obligations();
    const Eigen::VectorXd society = net.society_share();
    const Eigen::VectorXd owed = net.society_obligations();
    const auto pi = net.interbank_pi();
    const auto& names = net.names();

    LinearProgram lp;
    lp.tie_break = Eigen::VectorXd();
    std::vector<int> m(n);
    for (int i = 0; i < n; ++i) m[i] = lp.add_variable("m[" + names[i] + "]", -essinf[i], kInf, 1.0);

    // p[w][i]
    std::vector<std::vector<int>> p(s, std::vector<int>(n));
    for (int w = 0; w < s; ++w) {
        for (int i = 0; i < n; ++i) {
            p[w][i] = lp.add_variable("p[" + names[i] + "," + std::to_string(w) + "]", 0.0, totals[i]);
            (*lp.tie_break)[p[w][i]] = -scen.probs()[w];
        }
        for (int i = 0; i < n; ++i) {
            std::vector<std::pair<int, double>> terms{{p[w][i], 1.0}, {m[i], -1.0}};
            for (int j = 0; j < n; ++j)
                if (pi(j, i) != 0.0) terms.emplace_back(p[w][j], -pi(j, i));
            lp.add_constraint(std::move(terms), Relation::LessEqual, scen.values()(i, w),
                              "clear[" + names[i] + "," + std::to_string(w) + "]");
        }
    }

    if (kind == CapitalConstraint::PerBank) {
        for (int i = 0; i < n; ++i) {
            std::vector<ScenarioOutcome> y(s);
            for (int w = 0; w < s; ++w) y[w] = {{{p[w][i], society[i]}}, -gamma * owed[i]};
            add_acceptability(lp, y, scen.probs(), spec, names[i]);
        }
    } else {
        std::vector<ScenarioOutcome> y(s);
        for (int w = 0; w < s; ++w) {
            for (int i = 0; i < n; ++i) y[w].terms.emplace_back(p[w][i], society[i]);
            y[w].constant = -gamma * owed.sum();
        }
        add_acceptability(lp, y, scen.probs(), spec, "system");
    }
    return lp;
}

ENProgramSolution solve_en_capital(const FinancialNetwork& net, const ScenarioSet& scen, const RiskMeasure& spec,
                                   double gamma, CapitalConstraint kind, std::ostream* dump) {
    const LinearProgram lp = en_capital_program(net, scen, spec, gamma, kind);
    if (dump) write_lp(*dump, lp);
    const LPResult res = solve_lp(lp);
    if (res.status != LPStatus::Optimal) {
        throw SolverError(std::string("internal error: capital program reported ") + to_string(res.status));
    }
    const int n = net.size();
    ENProgramSolution out;
    out.m = res.solution.head(n);
    out.payments.resize(n, scen.size());
    for (int w = 0; w < scen.size(); ++w) out.payments.col(w) = res.solution.segment(n + w * n, n);
    out.total = out.m.sum();
    out.pivots = res.pivots;
    return out;
}

AllocationReport nash_lp_en(const FinancialNetwork& net, const ScenarioSet& scen, const RiskMeasure& spec,
                            double gamma, const SolverConfig& cfg, std::ostream* dump) {
    const ENProgramSolution sol = solve_en_capital(net, scen, spec, gamma, CapitalConstraint::PerBank, dump);
    const AggregationSystem sys{SingleElementAggregator(EisenbergNoe{net, gamma}), Lift::Sensitive};
    AllocationReport rep = verify_nash(sol.m, scen, sys, spec, cfg);
    rep.iterations = sol.pivots;
    return rep;
}

ENProgramSolution minimal_capital_en(const FinancialNetwork& net, const ScenarioSet& scen, const RiskMeasure& spec,
                                     double gamma, std::ostream* dump) {
    return solve_en_capital(net, scen, spec, gamma, CapitalConstraint::Aggregate, dump);
}

}  // namespace sysrisk
