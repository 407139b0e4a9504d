#include "sysrisk/network.hpp"

#include "sysrisk/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace sysrisk {

using json = nlohmann::json;

FinancialNetwork validate_network(const Eigen::MatrixXd& raw, std::vector<std::string> names) {
    const Eigen::Index n = raw.rows();
    if (n < 1 || raw.cols() != n + 1) {
        throw InputError("obligations matrix must be N x (N+1) with N >= 1, got " +
                         std::to_string(raw.rows()) + " x " + std::to_string(raw.cols()));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= n; ++j) {
            const double v = raw(i, j);
            if (!std::isfinite(v) || v < 0.0) throw NegativeObligation(int(i), int(j));
        }
        if (!(raw(i, 0) > 0.0)) throw ZeroSocietyObligation(int(i));
        if (raw(i, i + 1) != 0.0) throw NonzeroDiagonal(int(i));
    }
    if (!names.empty() && names.size() != std::size_t(n)) {
        throw InputError("bank name count does not match the obligations matrix");
    }
    if (names.empty()) {
        for (Eigen::Index i = 0; i < n; ++i) names.push_back("bank_" + std::to_string(i + 1));
    }

    FinancialNetwork net;
    net.obligations_ = raw;
    net.totals_ = raw.rowwise().sum();
    net.pi_ = net.totals_.cwiseInverse().asDiagonal() * raw;
    net.names_ = std::move(names);
    return net;
}

FinancialNetwork parse_network(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("network JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("society") || !doc.contains("interbank")) {
        throw ParseError("network JSON needs \"society\" and \"interbank\" members");
    }
    const auto& society = doc["society"];
    const auto& interbank = doc["interbank"];
    if (!society.is_array() || !interbank.is_array() || society.size() != interbank.size() ||
        society.empty()) {
        throw ParseError("\"society\" and \"interbank\" must be arrays of equal, nonzero length");
    }
    const auto n = static_cast<Eigen::Index>(society.size());
    Eigen::MatrixXd raw(n, n + 1);
    try {
        for (Eigen::Index i = 0; i < n; ++i) {
            raw(i, 0) = society[i].get<double>();
            const auto& row = interbank[i];
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
                throw ParseError("interbank row " + std::to_string(i) + " must have " +
                                 std::to_string(n) + " entries");
            }
            for (Eigen::Index j = 0; j < n; ++j) raw(i, j + 1) = row[j].get<double>();
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("network JSON: ") + e.what());
    }
    std::vector<std::string> names;
    if (doc.contains("banks")) {
        try {
            names = doc["banks"].get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            throw ParseError(std::string("\"banks\": ") + e.what());
        }
        if (names.size() != std::size_t(n)) throw ParseError("\"banks\" length mismatch");
    }
    return validate_network(raw, std::move(names));
}

FinancialNetwork load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open network file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_network(buf.str());
}

std::string network_to_json(const FinancialNetwork& net) {
    const int n = net.size();
    json doc;
    doc["banks"] = net.names();
    doc["society"] = json::array();
    doc["interbank"] = json::array();
    for (int i = 0; i < n; ++i) {
        doc["society"].push_back(net.obligations()(i, 0));
        json row = json::array();
        for (int j = 0; j < n; ++j) row.push_back(net.obligations()(i, j + 1));
        doc["interbank"].push_back(row);
    }
    return doc.dump(2);
}

double self_preferential_bound(const FinancialNetwork& net) {
    return (1.0 - net.society_share().array()).maxCoeff();
}

}  // namespace sysrisk
