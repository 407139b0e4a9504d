#include "sysrisk/aggregation.hpp"
#include "sysrisk/clearing.hpp"
#include "sysrisk/errors.hpp"
#include "../oracles.hpp"

#include <doctest.h>

#include <random>

using namespace sysrisk;

namespace {

SingleElementAggregator mean_field(double eps, double lambda) {
    return SingleElementAggregator(MeanField{{UtilityFn::shifted_log(eps), UtilityFn::shifted_log(eps)},
                                             UtilityFn::shifted_log(eps, lambda)});
}

SingleElementAggregator weighted_affine_3() {
    Eigen::Matrix3d a;
    a << 1.0, 0.0, 0.75,
         0.0, 1.0, 0.75,
         0.5, 0.5, 0.75;
    return SingleElementAggregator(WeightedAffine{a, Eigen::Vector3d::Ones()});
}

std::vector<SingleElementAggregator> catalog(int n) {
    std::mt19937_64 rng(n);
    std::vector<UtilityFn> logs, affine;
    for (int i = 0; i < n; ++i) {
        logs.push_back(UtilityFn::shifted_log(0.1 + 0.1 * i, 1.0 + i));
        affine.push_back(UtilityFn::affine(0.5 + i, -1.0));
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Constant(n, n, 0.25) + Eigen::MatrixXd::Identity(n, n);
    return {SingleElementAggregator(UtilitySum{logs}),
            SingleElementAggregator(MeanField{affine, UtilityFn::shifted_log(0.3, 2.0)}),
            SingleElementAggregator(EisenbergNoe{oracle::random_network(rng, n, 0.1), 0.9}),
            SingleElementAggregator(WeightedAffine{a, Eigen::VectorXd::Ones(n)})};
}

}  // namespace

TEST_CASE("component evaluation examples") {
    const auto net = oracle::two_bank();
    const AggregationSystem en{SingleElementAggregator(EisenbergNoe{net, 0.95}), Lift::Sensitive};
    const auto zero = ScenarioSet::deterministic(Eigen::Vector2d::Zero());
    CHECK(std::abs(eval_component(en, 0, zero, Eigen::Vector2d(1.425, 0.475))[0]) < 1e-12);

    const AggregationSystem ident{SingleElementAggregator(UtilitySum{{UtilityFn::affine(1, 0), UtilityFn::affine(1, 0)}}),
                                  Lift::Insensitive};
    Eigen::MatrixXd v(2, 2);
    v << 0.5, 1.0,
         2.0, 0.0;
    const auto scen = ScenarioSet::uniform(v);
    const Eigen::Vector2d m(0.3, -0.7);
    CHECK(eval_component(ident, 0, scen, m).isApprox(Eigen::Vector2d(0.8, 1.3)));
    CHECK(eval_component(ident, 1, scen, m).isApprox(Eigen::Vector2d(1.3, -0.7)));

    for (double eps : {0.1, 0.5}) {
        for (double lambda : {1.0, 3.0}) {
            const AggregationSystem mf{mean_field(eps, lambda), Lift::Sensitive};
            CHECK(std::abs(eval_component(mf, 0, zero, Eigen::Vector2d::Constant(1 - eps))[0]) < 1e-15);
        }
    }
    CHECK_THROWS_AS(eval_component(en, 0, zero, Eigen::Vector2d(-0.1, 0)), OutOfDomain);
}

TEST_CASE("domain lower bounds") {
    const auto net = oracle::two_bank();
    Eigen::MatrixXd v(2, 2);
    v << 1, 2,
         0, 3;
    const AggregationSystem en{SingleElementAggregator(EisenbergNoe{net, 0.95}), Lift::Sensitive};
    CHECK(domain_lower_bound(en, ScenarioSet::uniform(v)).isApprox(Eigen::Vector2d(-1, 0)));

    const AggregationSystem us{SingleElementAggregator(UtilitySum{{UtilityFn::affine(1, 0), UtilityFn::affine(1, 0)}}),
                               Lift::Insensitive};
    const auto lb = domain_lower_bound(us, ScenarioSet::deterministic(Eigen::Vector2d(0.5, 0.2)));
    CHECK(std::isinf(lb[0]));
    CHECK(lb[1] < 0);
    CHECK_THROWS_AS(domain_lower_bound(us, ScenarioSet::deterministic(Eigen::Vector2d(-1, 0))), EmptyDomain);
}

TEST_CASE("decomposition check and self-preferential estimates") {
    const auto net = oracle::two_bank();
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unit(0.0, 2.0);
    std::vector<ProbePoint> probes;
    for (int k = 0; k < 20; ++k) probes.emplace_back(Eigen::Vector2d(unit(rng), unit(rng)), Eigen::Vector2d(unit(rng), unit(rng)));

    const AggregationSystem en{SingleElementAggregator(EisenbergNoe{net, 0.95}), Lift::Sensitive};
    const auto r_en = check_decomposition(en, probes);
    CHECK(r_en.monotone);
    CHECK(r_en.max_sum_error <= 1e-10);
    CHECK(r_en.self_preferential_estimate <= self_preferential_bound(net) + 1e-6);

    const AggregationSystem us{SingleElementAggregator(UtilitySum{{UtilityFn::shifted_log(0.2), UtilityFn::affine(2, 1)}}),
                               Lift::Sensitive};
    CHECK(check_decomposition(us, probes).self_preferential_estimate == 0.0);

    // pure externality: every component sees only the mean
    const AggregationSystem mf{SingleElementAggregator(MeanField{{UtilityFn::affine(0, 0), UtilityFn::affine(0, 0)},
                                                                 UtilityFn::shifted_log(0.1)}),
                               Lift::Sensitive};
    const double l = check_decomposition(mf, probes).self_preferential_estimate;
    CHECK(l >= 1.0 - 1e-6);
    CHECK(l <= 1.0 + 1e-6);
}

TEST_CASE("decomposition identity, monotonicity, concavity and translativity") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int n = 1; n <= 4; ++n) {
        for (const auto& base : catalog(n)) {
            for (Lift lift : {Lift::Sensitive, Lift::Insensitive}) {
                const AggregationSystem sys{base, lift};
                for (int k = 0; k < 25; ++k) {
                    Eigen::VectorXd x(n), y(n), m(n), c(n);
                    for (int i = 0; i < n; ++i) {
                        x[i] = 2 * unit(rng);
                        y[i] = 2 * unit(rng);
                        m[i] = unit(rng);
                        c[i] = unit(rng) * m[i];
                    }
                    const auto rep = check_decomposition(sys, {{x, m}});
                    CHECK(rep.monotone);
                    const auto sx = ScenarioSet::deterministic(x);
                    const auto sy = ScenarioSet::deterministic(y);
                    const auto sm = ScenarioSet::deterministic(0.5 * (x + y));
                    const Eigen::VectorXd a = eval_components(sys, sx, m).col(0);
                    const Eigen::VectorXd b = eval_components(sys, sy, m).col(0);
                    const Eigen::VectorXd mid = eval_components(sys, sm, m).col(0);
                    CHECK((mid.array() >= 0.5 * (a + b).array() - 1e-12).all());
                    if (lift == Lift::Sensitive) {
                        const Eigen::VectorXd shifted =
                            eval_components(sys, ScenarioSet::deterministic(x + c), m - c).col(0);
                        CHECK((shifted - a).cwiseAbs().maxCoeff() < 1e-12);
                    }
                }
            }
        }
    }
}

TEST_CASE("aggregator JSON") {
    const auto net = oracle::two_bank();
    const auto en = parse_aggregator(R"({"kind":"eisenberg_noe","gamma":0.9})", &net);
    CHECK(std::get<EisenbergNoe>(en.kind()).gamma == 0.9);
    CHECK_THROWS_AS(parse_aggregator(R"({"kind":"eisenberg_noe"})", nullptr), ParseError);
    const auto mf = parse_aggregator(
        R"({"kind":"mean_field","utilities":[{"kind":"shifted_log","eps":0.1},{"kind":"shifted_log","eps":0.1}],
            "ubar":{"kind":"shifted_log","eps":0.1,"weight":2}})", nullptr);
    CHECK(mf.size() == 2);
    const auto wa = parse_aggregator(R"({"kind":"weighted_affine","a":[[1,0],[0,1]],"c":[1,1]})", nullptr);
    CHECK(wa.components(Eigen::Vector2d(2, 3)).isApprox(Eigen::Vector2d(1, 2)));
    CHECK_THROWS_AS(parse_aggregator(R"({"kind":"nope"})", nullptr), ParseError);
    CHECK_THROWS_AS(parse_aggregator(R"({"kind":"utility_sum","utilities":[{"kind":"affine","a":-1,"b":0}]})", nullptr),
                    InputError);
}

TEST_CASE("weighted affine components vanish along a one-parameter family") {
    const AggregationSystem sys{weighted_affine_3(), Lift::Sensitive};
    const auto zero = ScenarioSet::deterministic(Eigen::Vector3d::Zero());
    for (double t : {0.0, 0.5, 1.0}) {
        const Eigen::Vector3d m(1 - t, 1 - t, 4 * t / 3);
        CHECK(eval_components(sys, zero, m).cwiseAbs().maxCoeff() < 1e-15);
    }
}
