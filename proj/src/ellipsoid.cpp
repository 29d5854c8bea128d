#include "gtv/ellipsoid.hpp"

#include <cmath>

#include "gtv/json_io.hpp"
#include "json.hpp"

namespace gtv {

namespace {

Eigen::LLT<Eigen::MatrixXd> require_pd(const SymMatrix& q, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(q.mat());
    if (llt.info() != Eigen::Success)
        throw InputError(std::string(what) + ": shape matrix is not positive definite");
    return llt;
}

}  // namespace

Ellipsoid::Ellipsoid(SymMatrix q, Eigen::VectorXd center, double level)
    : q_(std::move(q)), c_(std::move(center)), level_(level) {
    if (c_.size() != q_.n()) throw InputError("Ellipsoid: center dimension mismatch");
    if (!(level_ > 0)) throw InputError("Ellipsoid: level must be > 0");
    require_pd(q_, "Ellipsoid");
}

Ellipsoid Ellipsoid::from_p_form(const SymMatrix& p) {
    const auto eig = sym_eig(p);
    if (eig.values(0) <= 0)
        throw InputError("Ellipsoid::from_p_form: P is not positive definite");
    const Eigen::MatrixXd q = eig.vectors *
                              eig.values.cwiseInverse().asDiagonal() *
                              eig.vectors.transpose();
    Ellipsoid e(SymMatrix(q, 1e-6 * q.cwiseAbs().maxCoeff() + 1e-300),
                Eigen::VectorXd::Zero(p.n()), 1.0);
    e.conversion_cond_ = eig.values(p.n() - 1) / eig.values(0);
    return e;
}

ContainsResult contains(const Ellipsoid& e, const Eigen::VectorXd& x) {
    if (x.size() != e.dim()) throw InputError("contains: dimension mismatch");
    auto llt = require_pd(e.Q(), "contains");
    const Eigen::VectorXd d = x - e.center();
    ContainsResult r;
    r.quadratic_form = d.dot(llt.solve(d));
    r.margin = e.level() - r.quadratic_form;
    r.inside = r.quadratic_form <= e.level();
    return r;
}

Ellipsoid affine_image(const Ellipsoid& e, const Eigen::MatrixXd& L,
                       const Eigen::VectorXd& b) {
    if (L.cols() != e.dim()) throw InputError("affine_image: L column mismatch");
    if (b.size() != L.rows()) throw InputError("affine_image: offset dimension mismatch");
    const Eigen::MatrixXd q = L * e.Q().mat() * L.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(q);
    if (L.rows() > L.cols() || llt.info() != Eigen::Success)
        throw InputError("affine_image: L is rank deficient; image would be degenerate");
    return Ellipsoid(SymMatrix(q, 1e-9 * (1.0 + q.cwiseAbs().maxCoeff())),
                     L * e.center() + b, e.level());
}

StepCertificate bounded_input_step(const Ellipsoid& e, const Eigen::MatrixXd& A,
                                   const Eigen::MatrixXd& B, double input_bound,
                                   const SymMatrix& P, double xi) {
    const int n = P.n();
    if (A.rows() != n || A.cols() != n || B.rows() != n)
        throw InputError("bounded_input_step: A/B dimensions");
    if (e.dim() != n) throw InputError("bounded_input_step: ellipsoid dimension");
    if (!(xi > 0)) throw InputError("bounded_input_step: xi must be > 0");
    if (!(input_bound > 0)) throw InputError("bounded_input_step: input bound must be > 0");

    const int q = static_cast<int>(B.cols());
    const Eigen::MatrixXd Bs = input_bound * B;
    Eigen::MatrixXd M(n + q, n + q);
    const Eigen::MatrixXd PA = P.mat() * A, PB = P.mat() * Bs;
    M.topLeftCorner(n, n) = A.transpose() * PA - P.mat() + xi * P.mat();
    M.topRightCorner(n, q) = A.transpose() * PB;
    M.bottomLeftCorner(q, n) = M.topRightCorner(n, q).transpose();
    M.bottomRightCorner(q, q) =
        Bs.transpose() * PB - xi * Eigen::MatrixXd::Identity(q, q);

    const auto eig = sym_eig(SymMatrix(M, 1e-9 * (1.0 + M.cwiseAbs().maxCoeff())));
    const double lam_max = eig.values(n + q - 1);
    if (!(lam_max < 0))
        throw NumericError("bounded_input_step: invariance block matrix is not negative "
                           "definite (lam_max = " + std::to_string(lam_max) + ")");
    return {e, -lam_max};
}

SectorBound::SectorBound(double m1_, double m2_, double delta_)
    : m1(m1_), m2(m2_), delta(delta_) {
    if (!(0 < m2 && m2 < m1)) throw InputError("SectorBound: need 0 < m2 < m1");
}

SectorBound SectorBound::butee(double m2, double lo, double hi) {
    if (!(lo < hi)) throw InputError("SectorBound::butee: need lo < hi");
    return SectorBound(1.0, m2, 0.5 * (lo + hi));
}

SymMatrix sector_quadratic_form(const SectorBound& s, const Eigen::MatrixXd& C,
                                const Eigen::MatrixXd& D) {
    if (C.rows() != 1 || D.rows() != 1)
        throw InputError("sector_quadratic_form: scalar saturation input expected");
    const int n = static_cast<int>(C.cols()), m = static_cast<int>(D.cols());
    const double k1 = s.kappa1(), k2 = s.kappa2(), d = s.delta;
    // expansion of (y~ - m1(Cx + Du - d)) (y~ - m2(Cx + Du - d)) over (x, u, y~, 1)
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + m + 2, n + m + 2);
    const int iy = n + m, ic = n + m + 1;
    M.block(0, 0, n, n) = k1 * C.transpose() * C;
    M.block(0, n, n, m) = k1 * C.transpose() * D;
    M.block(n, 0, m, n) = M.block(0, n, n, m).transpose();
    M.block(n, n, m, m) = k1 * D.transpose() * D;
    M.block(0, iy, n, 1) = -k2 * C.transpose();
    M.block(n, iy, m, 1) = -k2 * D.transpose();
    M.block(iy, 0, 1, n) = -k2 * C;
    M.block(iy, n, 1, m) = -k2 * D;
    M(iy, iy) = 1.0;
    M.block(0, ic, n, 1) = -k1 * d * C.transpose();
    M.block(n, ic, m, 1) = -k1 * d * D.transpose();
    M.block(ic, 0, 1, n) = -k1 * d * C;
    M.block(ic, n, 1, m) = -k1 * d * D;
    M(iy, ic) = M(ic, iy) = k2 * d;
    M(ic, ic) = k1 * d * d;
    return SymMatrix(M, 1e-12 * (1.0 + M.cwiseAbs().maxCoeff()));
}

double saturate(double u, double lo, double hi) {
    if (!(lo < hi)) throw InputError("saturate: need lo < hi");
    return std::min(std::max(u, lo), hi);
}

Ellipsoid parse_ellipsoid(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("ellipsoid parse: ") + e.what());
    }
    if (!j.contains("Q") || !j.contains("center"))
        throw InputError("ellipsoid parse: expected keys Q and center");
    const Eigen::MatrixXd q = json_to_matrix(j["Q"]);
    return Ellipsoid(SymMatrix(q, 1e-9 * (1.0 + q.cwiseAbs().maxCoeff())),
                     json_to_vector(j["center"]), j.value("level", 1.0));
}

std::string serialize_ellipsoid(const Ellipsoid& e) {
    nlohmann::json j;
    j["Q"] = matrix_to_json(e.Q().mat());
    j["center"] = vector_to_json(e.center());
    j["level"] = e.level();
    return j.dump(1);
}

}  // namespace gtv
