#include "gtv/numerics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gtv/json_io.hpp"
#include "json.hpp"

namespace gtv {

SymMatrix::SymMatrix(const Eigen::MatrixXd& m, double sym_tol_abs) {
    if (m.rows() < 1 || m.rows() != m.cols())
        throw InputError("SymMatrix: need a square matrix of dimension >= 1, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    if (!m.allFinite()) throw InputError("SymMatrix: non-finite entry");
    const double skew = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (skew > sym_tol_abs)
        throw InputError("SymMatrix: asymmetry " + std::to_string(skew) +
                         " exceeds tolerance " + std::to_string(sym_tol_abs));
    m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(int n) { return SymMatrix(Eigen::MatrixXd::Identity(n, n)); }

EigResult sym_eig(const SymMatrix& m, const Tolerances& tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.mat());
    if (es.info() != Eigen::Success)
        throw NumericError("sym_eig: eigensolver did not converge for n=" +
                           std::to_string(m.n()));
    EigResult r{es.eigenvalues(), es.eigenvectors()};
    const double norm = m.mat().norm();
    if (norm > 0) {
        const double resid =
            (m.mat() * r.vectors - r.vectors * r.values.asDiagonal()).norm();
        if (resid > tol.eig_residual_rel * norm * std::sqrt(double(m.n())))
            throw NumericError("sym_eig: residual " + std::to_string(resid / norm) +
                               " exceeds relative bound");
    }
    return r;
}

DefinitenessReport is_positive_definite(const SymMatrix& m, double margin,
                                        const Tolerances& tol) {
    if (margin < 0) throw InputError("is_positive_definite: margin must be >= 0");
    const auto eig = sym_eig(m, tol);
    DefinitenessReport rep;
    rep.min_eigenvalue = eig.values(0);
    rep.margin = margin;
    rep.positive_definite = eig.values(0) > margin;
    return rep;
}

double condition_number(const SymMatrix& m, const Tolerances& tol) {
    const auto eig = sym_eig(m, tol);
    const Eigen::VectorXd a = eig.values.cwiseAbs();
    const double amax = a.maxCoeff();
    const double amin = a.minCoeff();
    // standard numerical-rank cutoff: below n*eps*||m|| counts as singular
    const double cutoff = m.n() * std::numeric_limits<double>::epsilon() * amax;
    if (amin <= cutoff)
        throw NumericError("condition_number: matrix is singular to working precision "
                           "(|eigenvalue| " + std::to_string(amin) + ")");
    return amax / amin;
}

SymMatrix parse_sym_matrix(const std::string& json_text, const Tolerances& tol) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("SymMatrix parse: ") + e.what());
    }
    if (!j.contains("n") || !j.contains("rows"))
        throw InputError("SymMatrix parse: expected keys \"n\" and \"rows\"");
    const int n = j["n"].get<int>();
    Eigen::MatrixXd m = json_to_matrix(j["rows"]);
    if (m.rows() != n || m.cols() != n)
        throw InputError("SymMatrix parse: rows shape does not match n=" + std::to_string(n));
    return SymMatrix(m, tol.sym_parse_abs);
}

SymMatrix load_sym_matrix(const std::string& path, const Tolerances& tol) {
    return parse_sym_matrix(read_file(path), tol);
}

std::string serialize_sym_matrix(const SymMatrix& m) {
    nlohmann::json j;
    j["n"] = m.n();
    j["rows"] = matrix_to_json(m.mat());
    return j.dump(1);
}

}  // namespace gtv
