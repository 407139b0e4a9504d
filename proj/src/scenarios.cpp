#include "sysrisk/scenarios.hpp"

#include "sysrisk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace sysrisk {

ScenarioSet::ScenarioSet(Eigen::MatrixXd values, Eigen::VectorXd probs)
    : values_(std::move(values)), probs_(std::move(probs)) {
    if (values_.rows() < 1 || values_.cols() < 1) throw InputError("scenario set is empty");
    if (probs_.size() != values_.cols()) {
        throw InputError("scenario probability count does not match the scenario count");
    }
    if (!values_.allFinite()) throw InputError("scenario values must be finite");
    for (Eigen::Index w = 0; w < probs_.size(); ++w) {
        if (!(probs_[w] > 0.0)) {
            throw InputError("scenario " + std::to_string(w + 1) + " has nonpositive probability");
        }
    }
    if (std::abs(probs_.sum() - 1.0) > 1e-12) throw InputError("scenario probabilities must sum to 1");
}

ScenarioSet ScenarioSet::uniform(Eigen::MatrixXd values) {
    const auto s = values.cols();
    return ScenarioSet(std::move(values), Eigen::VectorXd::Constant(s, 1.0 / double(s)));
}

ScenarioSet ScenarioSet::deterministic(const Eigen::VectorXd& x) {
    return ScenarioSet(Eigen::MatrixXd(x), Eigen::VectorXd::Ones(1));
}

EssentialBounds ess_bounds(const ScenarioSet& scen) {
    // every scenario carries positive mass
    return {scen.values().rowwise().minCoeff(), scen.values().rowwise().maxCoeff()};
}

ScenarioSet comonotonic_copula(const ScenarioSet& scen) {
    const int n = scen.banks();
    const int s = scen.size();
    constexpr double kMergeTol = 1e-12;

    std::vector<std::vector<double>> sorted_values(n), cumulative(n);
    std::vector<double> grid;
    for (int i = 0; i < n; ++i) {
        std::vector<int> order(s);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return scen.values()(i, a) < scen.values()(i, b); });
        double acc = 0.0;
        for (std::size_t k = 0; k < order.size(); ++k) {
            const int w = order[k];
            acc += scen.probs()[w];
            sorted_values[i].push_back(scen.values()(i, w));
            cumulative[i].push_back(acc);
            // the quantile only jumps where the value changes
            if (k + 1 == order.size() || scen.values()(i, order[k + 1]) != scen.values()(i, w)) grid.push_back(acc);
        }
        cumulative[i].back() = 1.0;
    }
    std::sort(grid.begin(), grid.end());
    std::vector<double> cells;
    for (double g : grid) {
        if (cells.empty() ? g > kMergeTol : g - cells.back() > kMergeTol) cells.push_back(g);
    }
    cells.back() = 1.0;

    const auto k = static_cast<Eigen::Index>(cells.size());
    Eigen::MatrixXd values(n, k);
    Eigen::VectorXd probs(k);
    double lo = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
        const double hi = cells[c];
        probs[c] = hi - lo;
        const double u = 0.5 * (lo + hi);
        for (int i = 0; i < n; ++i) {
            // right-continuous quantile: first value whose cumulative mass exceeds u
            const auto it = std::upper_bound(cumulative[i].begin(), cumulative[i].end(), u);
            const auto pos = std::min<std::ptrdiff_t>(it - cumulative[i].begin(), s - 1);
            values(i, c) = sorted_values[i][pos];
        }
        lo = hi;
    }
    probs /= probs.sum();
    return ScenarioSet(std::move(values), std::move(probs));
}

Eigen::MatrixXd equicorrelation(int n, double rho) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Constant(n, n, rho);
    c.diagonal().setOnes();
    return c;
}

ScenarioSet gaussian_copula_sample(const Eigen::MatrixXd& corr, const Eigen::VectorXd& scales, int n,
                                   std::uint64_t seed) {
    const auto d = corr.rows();
    if (n < 1) throw InputError("sample count must be positive");
    if (corr.cols() != d || scales.size() != d || d < 1) {
        throw InputError("correlation matrix and scales have inconsistent sizes");
    }
    if (!corr.isApprox(corr.transpose(), 1e-12) ||
        (corr.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12) {
        throw NotPositiveDefinite("correlation matrix must be symmetric with unit diagonal");
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("correlation matrix is not positive definite");
    const Eigen::MatrixXd chol = llt.matrixL();

    std::mt19937_64 rng(seed);
    auto uniform53 = [&rng] { return double(rng() >> 11) * 0x1.0p-53; };
    bool have_spare = false;
    double spare = 0.0;
    auto normal = [&] {
        if (have_spare) {
            have_spare = false;
            return spare;
        }
        const double u1 = 1.0 - uniform53();  // (0, 1]
        const double u2 = uniform53();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare = r * std::sin(theta);
        have_spare = true;
        return r * std::cos(theta);
    };

    Eigen::MatrixXd values(d, n);
    Eigen::VectorXd z(d);
    for (int w = 0; w < n; ++w) {
        for (Eigen::Index i = 0; i < d; ++i) z[i] = normal();
        const Eigen::VectorXd g = chol * z;
        for (Eigen::Index i = 0; i < d; ++i) {
            values(i, w) = scales[i] * 0.5 * std::erfc(-g[i] / std::numbers::sqrt2);
        }
    }
    return ScenarioSet::uniform(std::move(values));
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    return out;
}

double to_double(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("scenario CSV line " + std::to_string(line) + ": not a number: '" + s + "'");
    }
}

}  // namespace

ScenarioSet parse_scenarios(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("scenario CSV is empty");
    const auto header = split_csv(line);
    if (header.size() < 2 || header[0] != "prob") {
        throw ParseError("scenario CSV header must be prob,bank_1,...,bank_N");
    }
    const std::size_t n = header.size() - 1;
    std::vector<double> probs, vals;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv(line);
        if (cells.size() != n + 1) {
            throw ParseError("scenario CSV line " + std::to_string(lineno) + " has " +
                             std::to_string(cells.size()) + " fields, expected " + std::to_string(n + 1));
        }
        probs.push_back(to_double(cells[0], lineno));
        for (std::size_t i = 1; i <= n; ++i) vals.push_back(to_double(cells[i], lineno));
    }
    if (probs.empty()) throw ParseError("scenario CSV has no rows");
    const auto s = static_cast<Eigen::Index>(probs.size());
    Eigen::MatrixXd values(Eigen::Index(n), s);
    for (Eigen::Index w = 0; w < s; ++w)
        for (Eigen::Index i = 0; i < Eigen::Index(n); ++i) values(i, w) = vals[w * n + i];
    return ScenarioSet(std::move(values), Eigen::Map<Eigen::VectorXd>(probs.data(), s));
}

ScenarioSet load_scenarios(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file " + path.string());
    return parse_scenarios(in);
}

void write_scenarios(std::ostream& out, const ScenarioSet& scen) {
    const auto old_flags = out.flags();
    const auto old_prec = out.precision();
    out << "prob";
    for (int i = 0; i < scen.banks(); ++i) out << ",bank_" << (i + 1);
    out << '\n' << std::setprecision(17);
    for (int w = 0; w < scen.size(); ++w) {
        out << scen.probs()[w];
        for (int i = 0; i < scen.banks(); ++i) out << ',' << scen.values()(i, w);
        out << '\n';
    }
    out.flags(old_flags);
    out.precision(old_prec);
}

}  // namespace sysrisk
