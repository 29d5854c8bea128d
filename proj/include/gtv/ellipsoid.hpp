#pragma once

#include <Eigen/Dense>
#include <string>

#include "gtv/errors.hpp"
#include "gtv/numerics.hpp"

namespace gtv {

/// {x : (x - c)^T Q^-1 (x - c) <= level}, stored in Q = P^-1 form.
class Ellipsoid {
  public:
    Ellipsoid(SymMatrix q, Eigen::VectorXd center, double level = 1.0);
    /// From the P-form {x : x^T P x <= 1}; requires P positive definite.
    static Ellipsoid from_p_form(const SymMatrix& p);

    const SymMatrix& Q() const { return q_; }
    const Eigen::VectorXd& center() const { return c_; }
    double level() const { return level_; }
    int dim() const { return q_.n(); }
    /// Condition number recorded when converting from P-form; 0 otherwise.
    double conversion_condition() const { return conversion_cond_; }

  private:
    SymMatrix q_;
    Eigen::VectorXd c_;
    double level_;
    double conversion_cond_ = 0.0;
};

struct ContainsResult {
    bool inside = false;
    double margin = 0.0;        // level - quadratic form
    double quadratic_form = 0.0;
};

/// Membership via solve (no explicit inverse).
ContainsResult contains(const Ellipsoid& e, const Eigen::VectorXd& x);

/// Exact image under y = Lx + b. L must have full row rank.
Ellipsoid affine_image(const Ellipsoid& e, const Eigen::MatrixXd& L,
                       const Eigen::VectorXd& b);

struct StepCertificate {
    Ellipsoid invariant;  // same ellipsoid that was passed in
    double margin;        // -lam_max of the certifying block matrix
};

/// Certifies that {x : x^T P x <= 1} is invariant for x+ = Ax + Bu with
/// ||u|| <= input_bound, by checking the block matrix
///   [ A'PA - P + xi P   A'PB ]
///   [ B'PA              B'PB - xi I ]   < 0   (B scaled by input_bound).
/// Throws NumericError carrying the offending eigenvalue when it fails.
StepCertificate bounded_input_step(const Ellipsoid& e, const Eigen::MatrixXd& A,
                                   const Eigen::MatrixXd& B, double input_bound,
                                   const SymMatrix& P, double xi);

/// Sector [m2, m1] around offset delta, slopes 0 < m2 < m1.
struct SectorBound {
    double m1, m2, delta;
    double kappa1() const { return m1 * m2; }
    double kappa2() const { return 0.5 * (m1 + m2); }

    SectorBound(double m1_, double m2_, double delta_);
    /// The Butee instance: m1 = 1, midpoint of the saturation interval.
    static SectorBound butee(double m2, double lo = 0.07, double hi = 0.098);
};

/// Symmetric quadratic form M over z = (x, u, y~, 1) such that z^T M z <= 0
/// expresses the sector bound for y~ = sat(Cx + Du) - delta. C is 1 x n,
/// D is 1 x m (scalar saturation input).
SymMatrix sector_quadratic_form(const SectorBound& s, const Eigen::MatrixXd& C,
                                const Eigen::MatrixXd& D);

double saturate(double u, double lo, double hi);

/// Ellipsoid JSON: {"Q": rows, "center": [...], "level": r} - the same
/// object the autocoder embeds in annotations.
Ellipsoid parse_ellipsoid(const std::string& json_text);
std::string serialize_ellipsoid(const Ellipsoid& e);

}  // namespace gtv
