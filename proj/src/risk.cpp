#include "sysrisk/risk.hpp"

#include "sysrisk/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

namespace sysrisk {

RiskMeasure RiskMeasure::expectation() { return {}; }

RiskMeasure RiskMeasure::avar(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("AVaR level must lie in (0, 1]");
    RiskMeasure r;
    r.kind = Kind::AVaR;
    r.alpha = alpha;
    return r;
}

RiskMeasure RiskMeasure::oce(double gamma1, double gamma2) {
    if (!(gamma1 >= 0.0 && gamma1 <= 1.0 && gamma2 >= 1.0) || !std::isfinite(gamma2)) {
        throw InputError("OCE slopes need gamma2 >= 1 >= gamma1 >= 0");
    }
    RiskMeasure r;
    r.kind = Kind::OCE;
    r.gamma1 = gamma1;
    r.gamma2 = gamma2;
    return r;
}

RiskMeasure RiskMeasure::entropic(double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw InputError("entropic risk aversion must be positive");
    RiskMeasure r;
    r.kind = Kind::Entropic;
    r.theta = theta;
    return r;
}

namespace {

// Shortest decimal that reads back to the same double.
std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

}  // namespace

std::string RiskMeasure::to_string() const {
    switch (kind) {
        case Kind::Expectation: return "expectation";
        case Kind::AVaR: return "avar:" + shortest(alpha);
        case Kind::OCE: return "oce:" + shortest(gamma1) + ":" + shortest(gamma2);
        case Kind::Entropic: return "entropic:" + shortest(theta);
    }
    return {};
}

RiskMeasure parse_risk_measure(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    auto number = [&](std::size_t k) {
        try {
            std::size_t used = 0;
            const double v = std::stod(parts.at(k), &used);
            if (used != parts[k].size()) throw std::invalid_argument(parts[k]);
            return v;
        } catch (const std::exception&) {
            throw ParseError("bad risk measure spec '" + text + "'");
        }
    };
    if (parts.empty()) throw ParseError("empty risk measure spec");
    const std::string& name = parts[0];
    if (name == "expectation" && parts.size() == 1) return RiskMeasure::expectation();
    if (name == "avar" && parts.size() == 2) return RiskMeasure::avar(number(1));
    if (name == "oce" && parts.size() == 3) return RiskMeasure::oce(number(1), number(2));
    if (name == "entropic" && parts.size() == 2) return RiskMeasure::entropic(number(1));
    throw ParseError("unknown risk measure spec '" + text + "'");
}

namespace {

std::vector<int> ascending_order(const Eigen::Ref<const Eigen::VectorXd>& y) {
    std::vector<int> order(static_cast<std::size_t>(y.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return y[a] < y[b]; });
    return order;
}

double avar(double alpha, const Eigen::Ref<const Eigen::VectorXd>& y,
            const Eigen::Ref<const Eigen::VectorXd>& probs) {
    double mass = 0.0;
    double tail = 0.0;
    for (int w : ascending_order(y)) {
        const double take = std::min(probs[w], alpha - mass);
        if (take <= 0.0) break;
        tail += take * y[w];
        mass += take;
    }
    // mass < alpha only through rounding when alpha == 1
    return -tail / mass;
}

double oce(double g1, double g2, const Eigen::Ref<const Eigen::VectorXd>& y,
           const Eigen::Ref<const Eigen::VectorXd>& probs) {
    // objective at m = -y_k: -y_k - g2 * sum_{y <= y_k} p (y - y_k) - g1 * sum_{y > y_k} p (y - y_k)
    const auto order = ascending_order(y);
    const double total_py = probs.dot(y);
    double below_p = 0.0;
    double below_py = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < order.size(); ++k) {
        const int w = order[k];
        below_p += probs[w];
        below_py += probs[w] * y[w];
        // ties: only evaluate after absorbing the whole group
        if (k + 1 < order.size() && y[order[k + 1]] == y[w]) continue;
        const double yk = y[w];
        const double loss_part = below_py - yk * below_p;
        const double gain_part = (total_py - below_py) - yk * (1.0 - below_p);
        best = std::min(best, -yk - g2 * loss_part - g1 * gain_part);
    }
    return best;
}

double entropic(double theta, const Eigen::Ref<const Eigen::VectorXd>& y,
                const Eigen::Ref<const Eigen::VectorXd>& probs) {
    const Eigen::ArrayXd z = -theta * y.array();
    const double zmax = z.maxCoeff();
    return (zmax + std::log((probs.array() * (z - zmax).exp()).sum())) / theta;
}

}  // namespace

double rho(const RiskMeasure& spec, const Eigen::Ref<const Eigen::VectorXd>& y,
           const Eigen::Ref<const Eigen::VectorXd>& probs) {
    if (y.size() != probs.size() || y.size() == 0) {
        throw InputError("outcome and probability vectors differ in length");
    }
    switch (spec.kind) {
        case RiskMeasure::Kind::Expectation: return -probs.dot(y);
        case RiskMeasure::Kind::AVaR: return avar(spec.alpha, y, probs);
        case RiskMeasure::Kind::OCE: return oce(spec.gamma1, spec.gamma2, y, probs);
        case RiskMeasure::Kind::Entropic: return entropic(spec.theta, y, probs);
    }
    return 0.0;
}

bool is_acceptable(const RiskMeasure& spec, const Eigen::Ref<const Eigen::VectorXd>& y,
                   const Eigen::Ref<const Eigen::VectorXd>& probs, double tol) {
    return rho(spec, y, probs) <= tol;
}

}  // namespace sysrisk
