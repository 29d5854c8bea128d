#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gtv/errors.hpp"
#include "gtv/tolerances.hpp"

namespace gtv {

/// Dense real symmetric matrix. Symmetry is enforced at construction by
/// averaging with the transpose; inputs farther than `sym_tol_abs` from
/// symmetric are rejected instead of silently fixed.
class SymMatrix {
  public:
    explicit SymMatrix(const Eigen::MatrixXd& m, double sym_tol_abs = 1e-9);
    static SymMatrix identity(int n);

    int n() const { return static_cast<int>(m_.rows()); }
    double operator()(int i, int j) const { return m_(i, j); }
    const Eigen::MatrixXd& mat() const { return m_; }

  private:
    Eigen::MatrixXd m_;
};

struct EigResult {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // orthonormal columns, same order
};

/// Eigendecomposition with a residual guarantee of
/// eig_residual_rel * ||m|| per pair.
EigResult sym_eig(const SymMatrix& m, const Tolerances& tol = {});

struct DefinitenessReport {
    bool positive_definite = false;
    double min_eigenvalue = 0.0;
    double margin = 0.0;
};

/// True iff lam_min(m) > margin.
DefinitenessReport is_positive_definite(const SymMatrix& m, double margin = 0.0,
                                        const Tolerances& tol = {});

/// Symmetric 2-norm condition number |lam|_max / |lam|_min.
/// Throws NumericError naming the near-zero eigenvalue when singular.
double condition_number(const SymMatrix& m, const Tolerances& tol = {});

/// Parses the fixture text format {"n": int, "rows": [[...], ...]}.
/// An optional "scale" key is kept as print metadata and not applied.
SymMatrix parse_sym_matrix(const std::string& json_text, const Tolerances& tol = {});
SymMatrix load_sym_matrix(const std::string& path, const Tolerances& tol = {});
std::string serialize_sym_matrix(const SymMatrix& m);

}  // namespace gtv
