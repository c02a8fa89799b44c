#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string_view>
#include <vector>

#include "qmds/completion.hpp"
#include "qmds/gek.hpp"
#include "qmds/network.hpp"

namespace qmds {

enum class Algorithm { Smds, QdSmds, QdMrc, QdMrcIter };

/// CLI names: smds, qdsmds, mrc, mrciter.
const char* to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

/// Known anchors together with the edge layout of a network with a given
/// number of targets. Built once and shared by every trial.
struct AnchorFrame {
    Points anchors;
    EdgeSet edges;
    StructureMatrices structure;
    QuaternionVector chi_a;   // anchor coordinates as quaternions
    QuaternionVector nu_aa;   // anchor-anchor edges, in edge order
    Eigen::MatrixXd inversion;  // pseudo-inverse of [I 0; C]

    AnchorFrame() = default;
    AnchorFrame(Points anchors, EdgeSet edges);
    static AnchorFrame make(const Points& anchors, Index n_targets);

    Index n_anchors() const { return anchors.rows(); }
    Index n_targets() const { return edges.n_targets; }
};

/// x ↦ s x R + t (row vectors); R orthogonal, reflections allowed.
struct Similarity {
    double scale = 1.0;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::RowVector3d translation = Eigen::RowVector3d::Zero();
    double residual = 0.0;  // anchor fit, meters (root of the summed squares)

    Points apply(const Points& x) const;
};

struct Diagnostics {
    std::vector<double> top_values;
    int iterations = 0;             // τ taken by the iterative MRC update
    int completion_iterations = 0;
    bool completion_converged = true;
    std::optional<Similarity> procrustes;
    double ambiguity_residual = 0.0;  // relative anchor-edge misfit after phase alignment
    double hermitian_defect = 0.0;
    /// ‖ν^(τ) - ν^(τ-1)‖ / ‖ν^(τ-1)‖ for τ = 1..τ_max.
    std::vector<double> fixed_point_residuals;
    /// Target estimates after τ = 0..τ_max updates (only when requested).
    std::vector<Points> target_trace;
};

struct Estimate {
    Points targets;
    Diagnostics diagnostics;
};

/// Least-squares solution of [I_{N_A} 0; C] X = [X_A; V̂]. Throws
/// SingularSystem when the stacked matrix is column-rank deficient.
Points anchored_inversion(const Points& v_hat, const Points& anchors, const StructureMatrices& structure);

/// Similarity (scale, orthogonal matrix, translation) that best maps the
/// estimated anchor rows onto the known anchors. Throws DegenerateAnchors
/// for fewer than 4 or coplanar known anchors, or a collapsed estimate.
Similarity procrustes_fit(const Points& estimated_anchors, const Points& known_anchors);

/// Fits on the first N_A rows of x_hat and applies the transform to all rows.
Points procrustes_align(const Points& x_hat, const Points& known_anchors, Similarity* fitted = nullptr);

/// Orthogonal R minimizing ‖from R - to‖_F (no scale or translation).
Eigen::Matrix3d orthogonal_align(const Points& from, const Points& to);

/// Right-multiplies nu_hat by the unit quaternion g that best maps its first
/// nu_aa_known.size() entries onto the known anchor-anchor edges,
/// g = normalize(Σ conj(ν̂_m) ν_m). Throws AmbiguityResolutionFailure when
/// that sum vanishes. `residual` receives ‖ν̂_AA g - ν_AA‖ / ‖ν_AA‖.
QuaternionVector resolve_edge_ambiguity(std::span<const Quaternion> nu_hat, std::span<const Quaternion> nu_aa_known,
                                        double* residual = nullptr);

/// Rank-3 factorization of the real GEK (three eigenvalues of largest
/// magnitude, each factor sqrt(max(λ, 0))), alignment of the edge frame to
/// the known anchor-anchor edges, inversion and Procrustes. Throws
/// RankDeficient when the spectrum has fewer than 3 positive eigenvalues.
Estimate smds(const Eigen::MatrixXd& k_r, const AnchorFrame& frame);

/// Dominant quaternion eigenpair of the quaternion GEK, phase alignment,
/// then inversion and Procrustes.
Estimate qd_smds(const QuaternionMatrix& k_q, const AnchorFrame& frame);

/// Closed form from the K2 block alone: ν_AT = K2^H ν_AA / ‖ν_AA‖².
Estimate qd_mrc_smds(const QuaternionMatrix& k_q, const AnchorFrame& frame);

/// ν_AT^(τ) = (K2^H ν_AA + K3^H ν_AT^(τ-1)) / (‖ν_AA‖² + ‖ν_AT^(τ-1)‖²).
Estimate qd_mrc_smds_iterative(const QuaternionMatrix& k_q, const AnchorFrame& frame, int tau_max,
                               bool keep_trace = false);

/// χ_T = (B_AT^T / N_A)(B_AA χ_A - ν_AT), returned as coordinates.
Points targets_from_anchor_target_edges(std::span<const Quaternion> nu_at, const AnchorFrame& frame);

struct SolverConfig {
    Algorithm algorithm = Algorithm::QdSmds;
    int tau_max = 1;
    CompletionConfig real_completion{3, 500, 1e-8, 0.0};
    CompletionConfig quat_completion = quaternion_split_config();
    bool keep_trace = false;
};

/// Scenario I: SMDS first, then plane distances and azimuths recomputed
/// from the estimated targets (with the known anchors) feed the quaternion
/// GEK for the requested quaternion-domain solver.
Estimate scenario_one_pipeline(const MeasurementSet& meas, const AnchorFrame& frame, const SolverConfig& config);

/// Dispatches on scenario and algorithm, masking and completing GEKs when
/// the measurement set carries missing entries.
Estimate solve(const MeasurementSet& meas, const AnchorFrame& frame, const SolverConfig& config);

}  // namespace qmds
