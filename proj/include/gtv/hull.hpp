#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "gtv/errors.hpp"
#include "gtv/tolerances.hpp"

namespace gtv {

/// Vertex list of stacked [A B] matrices describing a convex hull.
struct MatrixPolytope {
    std::vector<Eigen::MatrixXd> vertices;
    std::vector<std::string> labels;

    void validate() const;
    int rows() const { return static_cast<int>(vertices.at(0).rows()); }
    int cols() const { return static_cast<int>(vertices.at(0).cols()); }
};

/// Per-entry envelope of a sampled parameter-varying entry.
struct EntryEnvelope {
    int row = 0, col = 0;
    double vertex_min = 0, vertex_max = 0;
    std::vector<std::pair<double, double>> curve;  // (alpha, value)
};

struct MembershipViolation {
    int row = 0, col = 0;
    double worst = 0;        // distance outside [vertex_min, vertex_max]
    double at_alpha = 0;     // sample position of the worst violation
};

struct MembershipReport {
    bool member = false;
    std::vector<MembershipViolation> violations;  // one per failing entry
    double worst() const;
};

/// The four corner vertices: min+D1, min-D2, max+D3, max-D4.
MatrixPolytope build_corners(const Eigen::MatrixXd& at_alpha_min,
                             const Eigen::MatrixXd& at_alpha_max,
                             const std::array<Eigen::MatrixXd, 4>& deltas);

/// Entry-wise interval containment of every sample in the vertex envelope.
MembershipReport check_membership(const MatrixPolytope& poly,
                                  const std::vector<Eigen::MatrixXd>& samples,
                                  const std::vector<double>& alphas = {});

struct CensusReport {
    int varying = 0, constant_nonzero = 0, zero = 0;
    int total() const { return varying + constant_nonzero + zero; }
};

/// Classifies each entry across the samples: varying when the spread exceeds
/// census_rel relative to the entry's magnitude, zero when identically zero.
CensusReport varying_entry_census(const std::vector<Eigen::MatrixXd>& samples,
                                  const Tolerances& tol = {});

struct InflationResult {
    MatrixPolytope polytope;
    std::array<Eigen::MatrixXd, 4> deltas;
    int iterations = 0;  // number of growth steps applied
};

/// Scales all four deltas by growth_factor until check_membership passes.
/// Throws NumericError carrying the worst remaining violation at the cap.
InflationResult inflate_until_member(const Eigen::MatrixXd& at_alpha_min,
                                     const Eigen::MatrixXd& at_alpha_max,
                                     const std::vector<Eigen::MatrixXd>& samples,
                                     const std::array<Eigen::MatrixXd, 4>& initial_deltas,
                                     double growth_factor,
                                     const Tolerances& tol = {});

/// Envelopes for report output; includes only entries that vary when
/// varying_only is set.
std::vector<EntryEnvelope> entry_envelopes(const MatrixPolytope& poly,
                                           const std::vector<Eigen::MatrixXd>& samples,
                                           const std::vector<double>& alphas,
                                           bool varying_only,
                                           const Tolerances& tol = {});

}  // namespace gtv
