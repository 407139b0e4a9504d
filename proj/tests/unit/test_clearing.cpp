#include "sysrisk/clearing.hpp"
#include "sysrisk/errors.hpp"
#include "../oracles.hpp"

#include <doctest.h>

using namespace sysrisk;

TEST_CASE("two-bank clearing examples") {
    const auto net = oracle::two_bank();
    auto r = clearing_vector(net, Eigen::Vector2d(2, 2));
    CHECK(r.payments.isApprox(Eigen::Vector2d(2, 1.5)));
    CHECK(!r.defaults.any());

    r = clearing_vector(net, Eigen::Vector2d(1, 0));
    CHECK(r.payments[0] == doctest::Approx(1.2).epsilon(1e-14));
    CHECK(r.payments[1] == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(r.defaults.all());
    CHECK((oracle::picard_clearing(net, Eigen::Vector2d(1, 0)) - r.payments).cwiseAbs().maxCoeff() < 1e-12);

    r = clearing_vector(net, Eigen::Vector2d(0, 0));
    CHECK(r.payments.cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(clearing_vector(net, Eigen::Vector2d(-1, 0)), NegativeAssets);
}

TEST_CASE("jacobian examples") {
    const auto net = oracle::two_bank();
    CHECK(clearing_jacobian(net, Eigen::Vector2d(2, 2)).isZero());
    Eigen::Matrix2d expect;
    expect << 1.2, 0.4,
              0.6, 1.2;
    const Eigen::MatrixXd jac = clearing_jacobian(net, Eigen::Vector2d(0, 0));
    CHECK((jac - expect).cwiseAbs().maxCoeff() < 1e-14);
    // one-sided at the origin: differences into the positive orthant
    const double h = 1e-6;
    Eigen::MatrixXd fd(2, 2);
    for (int j = 0; j < 2; ++j)
        fd.col(j) = (clearing_vector(net, h * Eigen::Vector2d::Unit(j)).payments - clearing_vector(net, Eigen::Vector2d::Zero()).payments) / h;
    CHECK((fd - expect).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(clearing_jacobian(oracle::one_bank(), Eigen::VectorXd::Constant(1, 0.3))(0, 0) == 1.0);
}

TEST_CASE("society payment components") {
    const auto net = oracle::two_bank();
    Eigen::VectorXd s = society_payment_components(net, Eigen::Vector2d(1.425, 0.475), 0.95);
    CHECK(s.cwiseAbs().maxCoeff() < 1e-12);
    s = society_payment_components(net, Eigen::Vector2d(2, 2), 0.95);
    CHECK(s[0] == doctest::Approx(0.05));
    CHECK(s[1] == doctest::Approx(0.05));
    CHECK_THROWS_AS(society_payment_components(net, Eigen::Vector2d(0, -1), 0.95), NegativeAssets);
    CHECK_THROWS_AS(society_payment_components(net, Eigen::Vector2d(0, 0), 1.0), InputError);
}

TEST_CASE("clearing properties on random networks") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const int n = 1 + k % 6;
        const auto net = oracle::random_network(rng, n, 0.05);
        Eigen::VectorXd x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = 1.5 * unit(rng);
            y[i] = x[i] + 0.5 * unit(rng);
        }
        const Eigen::VectorXd px = clearing_vector(net, x).payments;
        const Eigen::VectorXd py = clearing_vector(net, y).payments;
        CHECK(clearing_residual(net, x, px) <= 1e-10 * net.total_obligations().maxCoeff());
        CHECK((px - oracle::picard_clearing(net, x)).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((py.array() >= px.array() - 1e-12).all());
        // payments to society cannot grow faster than the injected assets
        CHECK(net.society_share().dot((py - px).cwiseAbs()) <= (y - x).cwiseAbs().sum() + 1e-12);
        const Eigen::VectorXd mid = clearing_vector(net, 0.5 * (x + y)).payments;
        CHECK((mid.array() >= 0.5 * (px + py).array() - 1e-12).all());
    }
}

TEST_CASE("plain l1 non-expansiveness of payments fails on the two-bank network") {
    // Money injected at bank 1 circulates: p(0.1, 0) = (0.12, 0.06).
    const auto net = oracle::two_bank();
    const Eigen::VectorXd p = clearing_vector(net, Eigen::Vector2d(0.1, 0)).payments;
    CHECK(p[0] == doctest::Approx(0.12));
    CHECK(p[1] == doctest::Approx(0.06));
    CHECK(p.sum() > 0.1);
}

TEST_CASE("directed transfers help other banks at least as much") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const int n = 2 + k % 5;
        const auto net = oracle::random_network(rng, n, 0.05);
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = unit(rng);
        const int i = k % n;
        const double delta = unit(rng);
        const Eigen::VectorXd own = clearing_vector(net, x + delta * Eigen::VectorXd::Unit(n, i)).payments;
        const Eigen::VectorXd spread = clearing_vector(net, x + delta * net.interbank_pi().row(i).transpose()).payments;
        for (int j = 0; j < n; ++j)
            if (j != i) CHECK(own[j] <= spread[j] + 1e-12);
    }
}

TEST_CASE("jacobian matches central differences away from kinks") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int tested = 0;
    for (int k = 0; k < 200 && tested < 60; ++k) {
        const int n = 1 + k % 6;
        const auto net = oracle::random_network(rng, n, 0.1);
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = 1.2 * unit(rng) * net.total_obligations()[i];
        const double h = 1e-6;
        auto payments = [&](const Eigen::VectorXd& a) { return clearing_vector(net, a).payments; };
        // skip points whose default set changes inside the stencil
        bool kink = false;
        const auto base = clearing_vector(net, x).defaults;
        for (int j = 0; j < n && !kink; ++j)
            for (double s : {-2 * h, 2 * h})
                kink = kink || (clearing_vector(net, x + s * Eigen::VectorXd::Unit(n, j)).defaults != base).any();
        if (kink || (x.array() < 2 * h).any()) continue;
        ++tested;
        const Eigen::MatrixXd fd = oracle::central_jacobian(payments, x, h);
        CHECK((clearing_jacobian(net, x) - fd).cwiseAbs().maxCoeff() <= 1e-5);
    }
    CHECK(tested >= 30);
}

TEST_CASE("local self-preferential ratio stays below the network bound") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const int n = 2 + k % 5;
        const auto net = oracle::random_network(rng, n, 0.1);
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = unit(rng);
        CHECK(local_self_preferential_ratio(net, x) <= self_preferential_bound(net) + 1e-6);
    }
}
