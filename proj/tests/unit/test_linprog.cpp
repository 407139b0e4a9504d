#include "sysrisk/linprog.hpp"
#include "sysrisk/clearing.hpp"
#include "../oracles.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace sysrisk;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_violation(const LinearProgram& lp, const Eigen::VectorXd& x) {
    double worst = 0.0;
    for (int j = 0; j < lp.num_variables(); ++j)
        worst = std::max({worst, lp.lower[j] - x[j], x[j] - lp.upper[j]});
    for (const auto& c : lp.constraints) {
        double s = 0.0;
        for (const auto& [j, a] : c.terms) s += a * x[j];
        if (c.relation != Relation::GreaterEqual) worst = std::max(worst, s - c.rhs);
        if (c.relation != Relation::LessEqual) worst = std::max(worst, c.rhs - s);
    }
    return worst;
}

}  // namespace

TEST_CASE("small LPs") {
    LinearProgram a;
    const int x = a.add_variable("x", -kInf, kInf, 1.0);
    a.add_constraint({{x, 1.0}}, Relation::GreaterEqual, 3.0);
    auto r = solve_lp(a);
    CHECK(r.status == LPStatus::Optimal);
    CHECK(r.solution[0] == doctest::Approx(3.0));
    CHECK(r.objective == doctest::Approx(3.0));

    LinearProgram b;
    b.add_variable("x", 0, kInf, 1.0);
    b.add_variable("y", 0, kInf, 1.0);
    b.add_dense_constraint(Eigen::Vector2d(1, 1), Relation::GreaterEqual, 1.9);
    r = solve_lp(b);
    CHECK(r.status == LPStatus::Optimal);
    CHECK(r.objective == doctest::Approx(1.9));

    LinearProgram c;
    c.add_variable("x", -kInf, kInf, -1.0);
    c.add_constraint({{0, 1.0}}, Relation::LessEqual, 0.0);
    c.add_constraint({{0, 1.0}}, Relation::GreaterEqual, 1.0);
    CHECK(solve_lp(c).status == LPStatus::Infeasible);

    LinearProgram d;
    d.add_variable("x", -kInf, 4.0, -1.0);
    d.add_variable("y", -kInf, kInf, 0.0);
    d.add_dense_constraint(Eigen::Vector2d(1, -1), Relation::Equal, 1.0);
    d.objective = Eigen::Vector2d(0, 1);
    CHECK(solve_lp(d).status == LPStatus::Unbounded);
    d.objective = Eigen::Vector2d(-1, 0);
    r = solve_lp(d);
    CHECK(r.status == LPStatus::Optimal);
    CHECK(r.solution[0] == doctest::Approx(4.0));
    CHECK(r.solution[1] == doctest::Approx(3.0));

    LinearProgram e;
    e.add_variable("x", 2.0, 1.0);
    CHECK(solve_lp(e).status == LPStatus::Infeasible);
}

TEST_CASE("tie-break objective selects within the optimal face") {
    LinearProgram lp;
    lp.add_variable("x", 0, 1, 0.0);
    lp.add_variable("y", 0, 1, 0.0);
    lp.add_variable("z", 0, 5, 1.0);
    lp.add_dense_constraint(Eigen::Vector3d(1, 1, 1), Relation::GreaterEqual, 1.5);
    lp.tie_break = Eigen::Vector3d(0, -1, 0);
    const auto r = solve_lp(lp);
    CHECK(r.objective == doctest::Approx(0.0));
    CHECK(r.solution[1] == doctest::Approx(1.0));
}

TEST_CASE("simplex agrees with rational vertex enumeration") {
    std::mt19937_64 rng(2024);
    int feasible = 0;
    for (int k = 0; k < 60; ++k) {
        const auto ilp = oracle::random_integer_lp(rng);
        const auto lp = ilp.to_lp();
        const auto exact = oracle::enumerate_vertices(ilp);
        const auto r = solve_lp(lp);
        if (!exact) {
            CHECK(r.status == LPStatus::Infeasible);
            continue;
        }
        ++feasible;
        REQUIRE(r.status == LPStatus::Optimal);
        CHECK(std::abs(r.objective - exact->convert_to<double>()) <= 1e-9);
        CHECK(max_violation(lp, r.solution) <= 1e-8);
    }
    CHECK(feasible > 10);
}

TEST_CASE("LP dump") {
    LinearProgram lp;
    lp.add_variable("m[A]", 0, kInf, 1.0);
    lp.add_constraint({{0, 2.0}}, Relation::GreaterEqual, 1.0, "need");
    std::ostringstream os;
    write_lp(os, lp);
    CHECK(os.str().find("need: 2 m[A] >= 1") != std::string::npos);
    CHECK(os.str().find("minimize") == 0);
}

TEST_CASE("EN capital programs on the two-bank network") {
    const auto net = oracle::two_bank();
    const auto zero = ScenarioSet::deterministic(Eigen::Vector2d::Zero());
    const auto ex = RiskMeasure::expectation();
    const auto nash = nash_lp_en(net, zero, ex, 0.95);
    CHECK(nash.m[0] == doctest::Approx(1.425).epsilon(1e-9));
    CHECK(nash.m[1] == doctest::Approx(0.475).epsilon(1e-9));
    CHECK(nash.max_residual() <= 1e-8);
    const auto min = minimal_capital_en(net, zero, ex, 0.95);
    CHECK(min.total == doctest::Approx(1.9).epsilon(1e-9));

    const auto one = nash_lp_en(oracle::one_bank(), ScenarioSet::deterministic(Eigen::VectorXd::Zero(1)), ex, 0.95);
    CHECK(one.m[0] == doctest::Approx(0.95));
    CHECK(minimal_capital_en(oracle::one_bank(), ScenarioSet::deterministic(Eigen::VectorXd::Zero(1)), ex, 0.95)
              .total == doctest::Approx(0.95));

    const auto two = ScenarioSet::uniform((Eigen::MatrixXd(2, 2) << 0, 2, 0, 2).finished());
    CHECK(nash_lp_en(net, two, ex, 0.95).max_residual() <= 1e-6);
    CHECK_THROWS_AS(nash_lp_en(net, two, RiskMeasure::entropic(1.0), 0.95), InputError);
}

TEST_CASE("EN programs: soundness, consistency and ordering on random instances") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const RiskMeasure specs[] = {RiskMeasure::expectation(), RiskMeasure::avar(0.2), RiskMeasure::oce(0.5, 2.0)};
    for (int k = 0; k < 15; ++k) {
        const int n = 1 + k % 5, s = 1 + (k * 7) % 30;
        const auto net = oracle::random_network(rng, n, 0.2);
        Eigen::MatrixXd v(n, s);
        for (int w = 0; w < s; ++w)
            for (int i = 0; i < n; ++i) v(i, w) = unit(rng) * net.total_obligations()[i];
        const auto scen = ScenarioSet::uniform(v);
        const auto& spec = specs[k % 3];

        const auto sol = solve_en_capital(net, scen, spec, 0.9, CapitalConstraint::PerBank);
        for (int w = 0; w < s; ++w) {
            const Eigen::VectorXd p = clearing_vector(net, scen.scenario(w) + sol.m).payments;
            CHECK((sol.payments.col(w) - p).cwiseAbs().maxCoeff() <= 1e-6);
        }
        const auto nash = nash_lp_en(net, scen, spec, 0.9);
        CHECK(nash.max_residual() <= 1e-6);
        CHECK(nash.system_acceptable);
        const auto min = minimal_capital_en(net, scen, spec, 0.9);
        CHECK(min.total <= nash.total + 1e-8);
        for (int w = 0; w < s; ++w) {
            const Eigen::VectorXd p = clearing_vector(net, scen.scenario(w) + min.m).payments;
            CHECK((min.payments.col(w) - p).cwiseAbs().maxCoeff() <= 1e-6);
        }
    }
}
