#pragma once

#include <string>

namespace gtv {

/// Every numeric tolerance used across the toolchain, in one record so
/// tests and the CLI (--tolerances file) can tighten or loosen uniformly.
struct Tolerances {
    double eig_residual_rel = 1e-10;   // ||Av - lv|| <= tol * ||A||
    double psd_margin = 0.0;           // default margin for definiteness tests
    double sym_parse_abs = 1e-9;       // max |M - M^T| accepted by the parser
    double census_rel = 1e-12;         // entry counts as varying above this
    double spectral_radius_rel = 1e-8; // eigenvalue accuracy for rho()
    double lmi_margin_rel = 1e-8;      // solver success: lam_max <= -tol*|P|
    double lmi_pd_floor = 1e-12;       // lam_min(P) >= floor * lam_max(P)
    double brl_semidef = 1e-9;         // BRL blocks may reach 0 within this
    double containment = 1e-9;         // lam_max(Q_img, Q_post) <= 1 + tol
    int lmi_max_iterations = 500;
    int hull_max_inflations = 50;

    static Tolerances defaults() { return {}; }
    /// Loads overrides from a JSON object; unknown keys are rejected.
    static Tolerances from_json_file(const std::string& path);
};

}  // namespace gtv
