#include "sysrisk/scenarios.hpp"
#include "sysrisk/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

using namespace sysrisk;

namespace {

// value -> total probability, per bank
std::map<double, double> marginal(const ScenarioSet& s, int i) {
    std::map<double, double> law;
    for (int w = 0; w < s.size(); ++w) law[s.values()(i, w)] += s.probs()[w];
    return law;
}

}  // namespace

TEST_CASE("essential bounds") {
    Eigen::MatrixXd v(2, 2);
    v << 1, 3,
         2, 0;
    const auto b = ess_bounds(ScenarioSet::uniform(v));
    CHECK(b.inf.isApprox(Eigen::Vector2d(1, 0)));
    CHECK(b.sup.isApprox(Eigen::Vector2d(3, 2)));
    const auto d = ess_bounds(ScenarioSet::deterministic(Eigen::Vector2d(0.3, -2)));
    CHECK(d.inf == d.sup);
    const auto t = ess_bounds(ScenarioSet(Eigen::RowVector2d(-1, 2), Eigen::Vector2d(0.01, 0.99)));
    CHECK(t.inf[0] == -1.0);
    CHECK(t.sup[0] == 2.0);
}

TEST_CASE("scenario validation") {
    CHECK_THROWS_AS(ScenarioSet(Eigen::RowVector2d(0, 1), Eigen::Vector2d(0.5, 0.4)), InputError);
    CHECK_THROWS_AS(ScenarioSet(Eigen::RowVector2d(0, 1), Eigen::Vector2d(1.0, 0.0)), InputError);
    CHECK_THROWS_AS(ScenarioSet(Eigen::RowVector2d(0, NAN), Eigen::Vector2d(0.5, 0.5)), InputError);
}

TEST_CASE("comonotonic copula examples") {
    Eigen::MatrixXd v(2, 3);
    v << 1, 3, 2,
         3, 1, 2;
    const auto z = comonotonic_copula(ScenarioSet::uniform(v));
    Eigen::MatrixXd sorted(2, 3);
    sorted << 1, 2, 3,
              1, 2, 3;
    CHECK(z.values() == sorted);

    // {0 w.p. .25, 1 w.p. .75} against {0 w.p. .5, 2 w.p. .5}
    Eigen::MatrixXd u(2, 3);
    u << 0, 1, 1,
         0, 0, 2;
    const ScenarioSet s(u, Eigen::Vector3d(0.25, 0.25, 0.5));
    Eigen::MatrixXd w(2, 3);
    w << 0, 1, 1,
         2, 0, 2;
    const auto c = comonotonic_copula(ScenarioSet(w, Eigen::Vector3d(0.25, 0.5, 0.25)));
    REQUIRE(c.size() == 3);
    CHECK(c.probs().isApprox(Eigen::Vector3d(0.25, 0.25, 0.5)));
    CHECK(c.values() == u);
}

TEST_CASE("comonotonic copula preserves marginals and is comonotone") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> val(-3, 3);
    std::uniform_real_distribution<double> unit(0.1, 1.0);
    for (int k = 0; k < 100; ++k) {
        const int n = 1 + k % 4, s = 1 + k % 9;
        Eigen::MatrixXd v(n, s);
        Eigen::VectorXd p(s);
        for (int w = 0; w < s; ++w) {
            p[w] = unit(rng);
            for (int i = 0; i < n; ++i) v(i, w) = 0.5 * val(rng);
        }
        p /= p.sum();
        const ScenarioSet x(v, p);
        const auto z = comonotonic_copula(x);
        for (int i = 0; i < n; ++i) {
            const auto a = marginal(x, i), b = marginal(z, i);
            REQUIRE(a.size() == b.size());
            for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
                CHECK(ia->first == ib->first);
                CHECK(ia->second == doctest::Approx(ib->second).epsilon(1e-12));
            }
        }
        for (int w = 1; w < z.size(); ++w)
            CHECK((z.values().col(w).array() >= z.values().col(w - 1).array()).all());
        CHECK(ess_bounds(z).inf == ess_bounds(x).inf);
        CHECK(ess_bounds(z).sup == ess_bounds(x).sup);
    }
}

TEST_CASE("gaussian copula sampling") {
    const auto ind = gaussian_copula_sample(Eigen::Matrix2d::Identity(), Eigen::Vector2d(1, 1), 1000, 9);
    const Eigen::ArrayXd a = ind.values().row(0).array() - ind.values().row(0).mean();
    const Eigen::ArrayXd b = ind.values().row(1).array() - ind.values().row(1).mean();
    CHECK(std::abs((a * b).sum() / std::sqrt((a * a).sum() * (b * b).sum())) < 0.1);

    const auto deg = gaussian_copula_sample(equicorrelation(2, 0.5), Eigen::Vector2d(0, 1), 50, 1);
    CHECK(deg.values().row(0).isZero());

    const Eigen::Vector2d scales(2, 1.5);
    const auto s = gaussian_copula_sample(equicorrelation(2, 0.5), scales, 1000, 42);
    CHECK(s.size() == 1000);
    CHECK(std::abs(s.values().row(0).mean() - 1.0) < 0.05 * 2);
    CHECK(std::abs(s.values().row(1).mean() - 0.75) < 0.05 * 1.5);
    CHECK((s.values().array() >= 0).all());
    CHECK((s.values().row(0).array() <= 2).all());
    const auto again = gaussian_copula_sample(equicorrelation(2, 0.5), scales, 1000, 42);
    CHECK(again.values() == s.values());

    CHECK_THROWS_AS(gaussian_copula_sample(equicorrelation(2, 1.5), scales, 10, 1), NotPositiveDefinite);
    CHECK_THROWS_AS(gaussian_copula_sample(equicorrelation(2, 0.5), scales, 0, 1), InputError);
}

TEST_CASE("scenario CSV round trip") {
    Eigen::MatrixXd v(2, 3);
    v << 0.1, 1.0 / 3.0, 2,
         -1, 0, 1e-17;
    const ScenarioSet s(v, Eigen::Vector3d(0.2, 0.3, 0.5));
    std::stringstream ss;
    write_scenarios(ss, s);
    const auto back = parse_scenarios(ss);
    CHECK(back.values() == s.values());
    CHECK(back.probs() == s.probs());
    std::istringstream bad("prob,bank_1\n0.5,1\n0.5,oops\n");
    CHECK_THROWS_AS(parse_scenarios(bad), ParseError);
}
