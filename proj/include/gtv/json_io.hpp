#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "json.hpp"

namespace gtv {

/// Accepts either [[...], ...] or {"rows": [[...], ...]}.
Eigen::MatrixXd json_to_matrix(const nlohmann::json& j);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);

Eigen::VectorXd json_to_vector(const nlohmann::json& j);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);

std::string read_file(const std::string& path);

/// Writes via temp file + rename so readers never observe partial output.
void write_file_atomic(const std::string& path, const std::string& contents);

/// FNV-1a 64-bit over raw bytes, lower-case hex. Used for fixture checksums.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace gtv
