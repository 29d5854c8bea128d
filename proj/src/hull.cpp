#include "gtv/hull.hpp"

#include <algorithm>
#include <cmath>

namespace gtv {

void MatrixPolytope::validate() const {
    if (vertices.empty()) throw InputError("MatrixPolytope: need at least one vertex");
    for (const auto& v : vertices)
        if (v.rows() != vertices[0].rows() || v.cols() != vertices[0].cols())
            throw InputError("MatrixPolytope: vertex shapes differ");
}

double MembershipReport::worst() const {
    double w = 0;
    for (const auto& v : violations) w = std::max(w, v.worst);
    return w;
}

MatrixPolytope build_corners(const Eigen::MatrixXd& lo, const Eigen::MatrixXd& hi,
                             const std::array<Eigen::MatrixXd, 4>& d) {
    for (const auto& m : d)
        if (m.rows() != lo.rows() || m.cols() != lo.cols())
            throw InputError("build_corners: delta shape mismatch");
    if (hi.rows() != lo.rows() || hi.cols() != lo.cols())
        throw InputError("build_corners: endpoint shape mismatch");
    MatrixPolytope p;
    p.vertices = {lo + d[0], lo - d[1], hi + d[2], hi - d[3]};
    p.labels = {"alpha_min + D1", "alpha_min - D2", "alpha_max + D3", "alpha_max - D4"};
    return p;
}

MembershipReport check_membership(const MatrixPolytope& poly,
                                  const std::vector<Eigen::MatrixXd>& samples,
                                  const std::vector<double>& alphas) {
    poly.validate();
    if (samples.empty()) throw InputError("check_membership: empty sample list");
    for (const auto& s : samples)
        if (s.rows() != poly.rows() || s.cols() != poly.cols())
            throw InputError("check_membership: sample shape mismatch");

    MembershipReport rep;
    for (int i = 0; i < poly.rows(); ++i) {
        for (int j = 0; j < poly.cols(); ++j) {
            double lo = poly.vertices[0](i, j), hi = lo;
            for (const auto& v : poly.vertices) {
                lo = std::min(lo, v(i, j));
                hi = std::max(hi, v(i, j));
            }
            MembershipViolation worst{i, j, 0.0, 0.0};
            for (size_t k = 0; k < samples.size(); ++k) {
                const double x = samples[k](i, j);
                const double excess = std::max(lo - x, x - hi);
                if (excess > worst.worst) {
                    worst.worst = excess;
                    worst.at_alpha = k < alphas.size() ? alphas[k] : double(k);
                }
            }
            if (worst.worst > 0) rep.violations.push_back(worst);
        }
    }
    rep.member = rep.violations.empty();
    return rep;
}

CensusReport varying_entry_census(const std::vector<Eigen::MatrixXd>& samples,
                                  const Tolerances& tol) {
    if (samples.size() < 2) throw InputError("varying_entry_census: need >= 2 samples");
    for (const auto& s : samples)
        if (s.rows() != samples[0].rows() || s.cols() != samples[0].cols())
            throw InputError("varying_entry_census: sample shape mismatch");
    CensusReport rep;
    for (Eigen::Index i = 0; i < samples[0].rows(); ++i) {
        for (Eigen::Index j = 0; j < samples[0].cols(); ++j) {
            double lo = samples[0](i, j), hi = lo, mag = 0;
            for (const auto& s : samples) {
                lo = std::min(lo, s(i, j));
                hi = std::max(hi, s(i, j));
                mag = std::max(mag, std::abs(s(i, j)));
            }
            if (mag == 0.0)
                ++rep.zero;
            else if (hi - lo > tol.census_rel * mag)
                ++rep.varying;
            else
                ++rep.constant_nonzero;
        }
    }
    return rep;
}

InflationResult inflate_until_member(const Eigen::MatrixXd& lo, const Eigen::MatrixXd& hi,
                                     const std::vector<Eigen::MatrixXd>& samples,
                                     const std::array<Eigen::MatrixXd, 4>& initial,
                                     double growth, const Tolerances& tol) {
    if (!(growth > 1.0)) throw InputError("inflate_until_member: growth factor must be > 1");
    InflationResult r;
    r.deltas = initial;
    for (int it = 0; it <= tol.hull_max_inflations; ++it) {
        r.polytope = build_corners(lo, hi, r.deltas);
        const auto rep = check_membership(r.polytope, samples);
        if (rep.member) {
            r.iterations = it;
            return r;
        }
        if (it == tol.hull_max_inflations)
            throw NumericError("inflate_until_member: no membership after " +
                               std::to_string(tol.hull_max_inflations) +
                               " inflations; worst remaining violation " +
                               std::to_string(rep.worst()));
        for (auto& d : r.deltas) d *= growth;
    }
    return r;  // unreachable
}

std::vector<EntryEnvelope> entry_envelopes(const MatrixPolytope& poly,
                                           const std::vector<Eigen::MatrixXd>& samples,
                                           const std::vector<double>& alphas,
                                           bool varying_only, const Tolerances& tol) {
    poly.validate();
    std::vector<EntryEnvelope> out;
    for (int i = 0; i < poly.rows(); ++i) {
        for (int j = 0; j < poly.cols(); ++j) {
            EntryEnvelope e;
            e.row = i;
            e.col = j;
            e.vertex_min = e.vertex_max = poly.vertices[0](i, j);
            for (const auto& v : poly.vertices) {
                e.vertex_min = std::min(e.vertex_min, v(i, j));
                e.vertex_max = std::max(e.vertex_max, v(i, j));
            }
            double lo = samples.empty() ? 0 : samples[0](i, j), hi = lo, mag = 0;
            for (size_t k = 0; k < samples.size(); ++k) {
                const double x = samples[k](i, j);
                e.curve.emplace_back(k < alphas.size() ? alphas[k] : double(k), x);
                lo = std::min(lo, x);
                hi = std::max(hi, x);
                mag = std::max(mag, std::abs(x));
            }
            if (varying_only && !(mag > 0 && hi - lo > tol.census_rel * mag)) continue;
            out.push_back(std::move(e));
        }
    }
    return out;
}

}  // namespace gtv
