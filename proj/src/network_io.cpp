#include "wacrisk/network_io.hpp"

#include "wacrisk/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace wacrisk {

namespace {

using nlohmann::json;

Eigen::MatrixXd to_matrix(const json& j, const char* what) {
    if (!j.is_array() || j.empty()) throw ValidationError(std::string(what) + " must be a nonempty 2-D array");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ValidationError(std::string(what) + " has ragged rows");
        }
        for (Eigen::Index k = 0; k < cols; ++k) {
            const auto& v = row[static_cast<std::size_t>(k)];
            if (!v.is_number()) throw ValidationError(std::string(what) + " has a non-numeric entry");
            m(i, k) = v.get<double>();
        }
    }
    return m;
}

Eigen::VectorXd to_vector(const json& j, const char* what) {
    if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ValidationError(std::string(what) + " has a non-numeric entry");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

NetworkModel parse_network_json(const std::string& text) {
    const json j = parse_json(text);
    if (!j.is_object()) throw ValidationError("network document must be a JSON object");
    NetworkModel model;
    if (!j.contains("generators") || !j["generators"].is_array()) {
        throw ValidationError("network document needs a generators array");
    }
    for (const auto& g : j["generators"]) {
        GeneratorParams p;
        if (!g.contains("J") || !g.contains("beta")) throw ValidationError("each generator needs J and beta");
        p.inertia = g["J"].get<double>();
        p.damping = g["beta"].get<double>();
        p.voltage = g.value("E", 1.0);
        model.generators.push_back(p);
    }
    if (j.contains("susceptance")) model.susceptance = to_matrix(j["susceptance"], "susceptance");
    if (j.contains("equilibrium_theta")) {
        model.equilibrium_theta = to_vector(j["equilibrium_theta"], "equilibrium_theta");
    }
    if (j.contains("power_inputs")) model.power_inputs = to_vector(j["power_inputs"], "power_inputs");
    if (j.contains("laplacian")) model.laplacian_override = to_matrix(j["laplacian"], "laplacian");
    if (!model.laplacian_override && model.susceptance.size() == 0) {
        throw ValidationError("network document needs susceptance or laplacian");
    }
    return model;
}

NetworkModel load_network_json(const std::string& path) { return parse_network_json(read_text_file(path)); }

GainSpec parse_gains_json(const std::string& text) {
    const json j = parse_json(text);
    if (j.contains("M") && j.contains("K")) {
        return DenseGains{to_matrix(j["M"], "M"), to_matrix(j["K"], "K")};
    }
    if (j.contains("mu") && j.contains("kappa")) {
        return EigenGains{to_vector(j["mu"], "mu"), to_vector(j["kappa"], "kappa")};
    }
    throw ValidationError("gain document needs M and K, or mu and kappa");
}

GainSpec load_gains_json(const std::string& path) { return parse_gains_json(read_text_file(path)); }

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + tmp.string());
        out << content;
        if (!out) throw ValidationError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ValidationError("cannot move output into place: " + ec.message());
    }
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_number(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ValidationError("not a number: '" + s + "'");
    }
    return v;
}

std::vector<PairSigma> read_pair_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty CSV");
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    int ci = -1, cj = -1, cs = -1;
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k] == "i") ci = static_cast<int>(k);
        if (header[k] == "j") cj = static_cast<int>(k);
        if (header[k] == "sigma") cs = static_cast<int>(k);
    }
    if (ci < 0 || cj < 0 || cs < 0) throw ValidationError("CSV needs i, j and sigma columns");
    std::vector<PairSigma> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != header.size()) throw ValidationError("CSV row has the wrong number of cells");
        PairSigma p;
        p.i = static_cast<std::size_t>(parse_number(cells[static_cast<std::size_t>(ci)]));
        p.j = static_cast<std::size_t>(parse_number(cells[static_cast<std::size_t>(cj)]));
        p.sigma = parse_number(cells[static_cast<std::size_t>(cs)]);
        out.push_back(p);
    }
    return out;
}

}  // namespace wacrisk
