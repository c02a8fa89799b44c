#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "qmds/quaternion.hpp"

namespace qmds {

using Index = Eigen::Index;
/// One 3D point (or edge vector) per row, meters.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3>;

struct NetworkGeometry {
    Points anchors;
    Points targets;

    Index n_anchors() const { return anchors.rows(); }
    Index n_targets() const { return targets.rows(); }
    Index n_nodes() const { return anchors.rows() + targets.rows(); }
    /// [X_A; X_T]
    Points stacked() const;
};

/// Node indices are 0-based; anchors occupy 0..N_A-1, targets N_A..N-1.
struct Edge {
    Index i = 0;
    Index j = 0;
    bool operator==(const Edge&) const = default;
};

/// Measurable pairs: every anchor-anchor pair followed by every
/// anchor-target pair, each group in ascending (i, j) order. No
/// target-target pairs.
struct EdgeSet {
    Index n_anchors = 0;
    Index n_targets = 0;
    std::vector<Edge> pairs;

    Index size() const { return static_cast<Index>(pairs.size()); }
    Index n_nodes() const { return n_anchors + n_targets; }
    Index n_anchor_anchor() const { return n_anchors * (n_anchors - 1) / 2; }
    Index n_anchor_target() const { return n_anchors * n_targets; }
    bool is_anchor_anchor(Index m) const { return pairs[static_cast<std::size_t>(m)].j < n_anchors; }
};

EdgeSet edge_set(Index n_anchors, Index n_targets);

struct StructureMatrices {
    Eigen::MatrixXd c;     // M×N, +1 at i and -1 at j for edge (i, j)
    Eigen::MatrixXd b_aa;  // (N_A N_T)×N_A = I_{N_A} ⊗ 1_{N_T}
    Eigen::MatrixXd b_at;  // (N_A N_T)×N_T = 1_{N_A} ⊗ I_{N_T}
    Index n_anchor_anchor = 0;

    auto c_aa() const { return c.topRows(n_anchor_anchor); }
    auto c_at() const { return c.bottomRows(c.rows() - n_anchor_anchor); }
};

StructureMatrices structure_matrices(const EdgeSet& edges);

/// V = C X, row m is x_i - x_j.
Points edge_matrix(const NetworkGeometry& geometry, const StructureMatrices& structure);

/// Coordinate (x, y, z) ↔ quaternion x + y i + z j + 0 k.
inline Quaternion to_quaternion(const Eigen::Ref<const Eigen::RowVector3d>& p) {
    return {p(0), p(1), p(2), 0.0};
}
QuaternionVector to_quaternions(const Points& rows);
/// Reads the real, i and j components; the k component is dropped.
Points from_quaternions(std::span<const Quaternion> v);

/// Coordinate planes. Each plane is paired with the axis orthogonal to it,
/// so the elevation stored for a plane is the angle between the edge and
/// that axis: XY ↔ θ^(z), XZ ↔ θ^(y), YZ ↔ θ^(x).
enum Plane : int { XY = 0, XZ = 1, YZ = 2 };
inline constexpr std::array<Plane, 3> kPlanes{XY, XZ, YZ};

/// Projections of v onto a plane as (first, second) coordinates:
/// XY → (x, y), XZ → (x, z), YZ → (y, z).
std::array<double, 2> plane_coordinates(const Eigen::Ref<const Eigen::RowVector3d>& v, Plane plane);

inline constexpr double kDegenerateLength = 1e-9;

struct EdgeParameters {
    double distance = 0.0;
    std::array<double, 3> plane_distance{};  // d^(xy), d^(xz), d^(yz)
    std::array<double, 3> azimuth{};         // φ ∈ (-π, π]; atan2(0, 0) = 0
    std::array<double, 3> elevation{};       // θ ∈ [0, π] from the plane's normal axis
    bool zero_length = false;
    std::array<bool, 3> flat_projection{};   // projected length ≤ kDegenerateLength

    bool degenerate() const { return zero_length || flat_projection[0] || flat_projection[1] || flat_projection[2]; }
};

/// Noise-free distances and angles of every edge and edge pair.
struct TrueParameters {
    std::vector<EdgeParameters> edges;
    Eigen::MatrixXd adoa;  // α_mp ∈ [0, π], zero diagonal

    Index size() const { return static_cast<Index>(edges.size()); }
    /// α_mp^(plane) = φ_p^(plane) - φ_m^(plane)
    double plane_adoa(Index m, Index p, Plane plane) const {
        return edges[static_cast<std::size_t>(p)].azimuth[plane] - edges[static_cast<std::size_t>(m)].azimuth[plane];
    }
};

TrueParameters true_parameters(const Points& edge_vectors);
TrueParameters true_parameters(const NetworkGeometry& geometry, const EdgeSet& edges);

/// Throws DegenerateEdge if any listed edge has zero length, or if an
/// anchor-target edge has a flat plane projection. Anchor-anchor
/// projections may be flat: the anchors are fixed and often axis-aligned.
void require_nondegenerate(const TrueParameters& params, const EdgeSet& edges);

}  // namespace qmds
