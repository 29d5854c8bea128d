#include "gtv/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gtv/errors.hpp"
#include "gtv/tolerances.hpp"

namespace gtv {

Tolerances Tolerances::from_json_file(const std::string& path) {
    Tolerances t;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("tolerances file: ") + e.what());
    }
    for (const auto& [key, val] : j.items()) {
        if (key == "eig_residual_rel") t.eig_residual_rel = val.get<double>();
        else if (key == "psd_margin") t.psd_margin = val.get<double>();
        else if (key == "sym_parse_abs") t.sym_parse_abs = val.get<double>();
        else if (key == "census_rel") t.census_rel = val.get<double>();
        else if (key == "spectral_radius_rel") t.spectral_radius_rel = val.get<double>();
        else if (key == "lmi_margin_rel") t.lmi_margin_rel = val.get<double>();
        else if (key == "lmi_pd_floor") t.lmi_pd_floor = val.get<double>();
        else if (key == "brl_semidef") t.brl_semidef = val.get<double>();
        else if (key == "containment") t.containment = val.get<double>();
        else if (key == "lmi_max_iterations") t.lmi_max_iterations = val.get<int>();
        else if (key == "hull_max_inflations") t.hull_max_inflations = val.get<int>();
        else throw InputError("tolerances file: unknown key \"" + key + "\"");
    }
    return t;
}

Eigen::MatrixXd json_to_matrix(const nlohmann::json& jin) {
    const nlohmann::json& j = jin.is_object() && jin.contains("rows") ? jin["rows"] : jin;
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw InputError("matrix json: expected a non-empty array of rows");
    const size_t rows = j.size(), cols = j[0].size();
    Eigen::MatrixXd m(rows, cols);
    for (size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            throw InputError("matrix json: ragged rows at row " + std::to_string(i));
        for (size_t k = 0; k < cols; ++k) {
            if (!j[i][k].is_number())
                throw InputError("matrix json: non-numeric entry at (" + std::to_string(i) +
                                 "," + std::to_string(k) + ")");
            m(i, k) = j[i][k].get<double>();
        }
    }
    if (!m.allFinite()) throw InputError("matrix json: non-finite entry");
    return m;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::VectorXd json_to_vector(const nlohmann::json& j) {
    if (!j.is_array()) throw InputError("vector json: expected an array");
    Eigen::VectorXd v(j.size());
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            throw InputError("vector json: non-numeric entry at " + std::to_string(i));
        v(i) = j[i].get<double>();
    }
    if (!v.allFinite()) throw InputError("vector json: non-finite entry");
    return v;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open file for writing: " + tmp);
        out << contents;
        if (!out) throw InputError("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw InputError("rename failed: " + path);
    }
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace gtv
