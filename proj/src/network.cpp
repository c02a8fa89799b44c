#include "qmds/network.hpp"

#include <cmath>
#include <string>

namespace qmds {

Points NetworkGeometry::stacked() const {
    Points x(n_nodes(), 3);
    x.topRows(n_anchors()) = anchors;
    x.bottomRows(n_targets()) = targets;
    return x;
}

EdgeSet edge_set(Index n_anchors, Index n_targets) {
    if (n_anchors < 1 || n_targets < 0) {
        throw Error(ErrorCode::OutOfRange, "edge_set needs N_A >= 1 and N_T >= 0");
    }
    EdgeSet e{n_anchors, n_targets, {}};
    e.pairs.reserve(static_cast<std::size_t>(e.n_anchor_anchor() + e.n_anchor_target()));
    for (Index i = 0; i < n_anchors; ++i)
        for (Index j = i + 1; j < n_anchors; ++j) e.pairs.push_back({i, j});
    for (Index i = 0; i < n_anchors; ++i)
        for (Index t = 0; t < n_targets; ++t) e.pairs.push_back({i, n_anchors + t});
    return e;
}

StructureMatrices structure_matrices(const EdgeSet& edges) {
    const Index m = edges.size(), n = edges.n_nodes();
    const Index na = edges.n_anchors, nt = edges.n_targets;
    StructureMatrices s;
    s.c = Eigen::MatrixXd::Zero(m, n);
    for (Index r = 0; r < m; ++r) {
        const Edge& e = edges.pairs[static_cast<std::size_t>(r)];
        if (e.i < 0 || e.j >= n || e.i >= e.j) {
            throw Error(ErrorCode::DimensionMismatch, "edge (" + std::to_string(e.i) + "," + std::to_string(e.j) + ") is invalid");
        }
        s.c(r, e.i) = 1.0;
        s.c(r, e.j) = -1.0;
    }
    s.n_anchor_anchor = edges.n_anchor_anchor();
    s.b_aa = Eigen::MatrixXd::Zero(na * nt, na);
    s.b_at = Eigen::MatrixXd::Zero(na * nt, nt);
    for (Index a = 0; a < na; ++a) {
        for (Index t = 0; t < nt; ++t) {
            s.b_aa(a * nt + t, a) = 1.0;
            s.b_at(a * nt + t, t) = 1.0;
        }
    }
    return s;
}

Points edge_matrix(const NetworkGeometry& geometry, const StructureMatrices& structure) {
    if (structure.c.cols() != geometry.n_nodes()) {
        throw Error(ErrorCode::DimensionMismatch, "structure matrix and geometry disagree on N");
    }
    return structure.c * geometry.stacked();
}

QuaternionVector to_quaternions(const Points& rows) {
    QuaternionVector v(static_cast<std::size_t>(rows.rows()));
    for (Index r = 0; r < rows.rows(); ++r) v[static_cast<std::size_t>(r)] = to_quaternion(rows.row(r));
    return v;
}

Points from_quaternions(std::span<const Quaternion> v) {
    Points p(static_cast<Index>(v.size()), 3);
    for (std::size_t r = 0; r < v.size(); ++r) {
        p.row(static_cast<Index>(r)) << v[r].w, v[r].x, v[r].y;
    }
    return p;
}

std::array<double, 2> plane_coordinates(const Eigen::Ref<const Eigen::RowVector3d>& v, Plane plane) {
    switch (plane) {
        case XY: return {v(0), v(1)};
        case XZ: return {v(0), v(2)};
        case YZ: return {v(1), v(2)};
    }
    return {0.0, 0.0};
}

namespace {

// Axis orthogonal to each plane: XY → z, XZ → y, YZ → x.
constexpr std::array<int, 3> kNormalAxis{2, 1, 0};

}  // namespace

TrueParameters true_parameters(const Points& v) {
    const Index m = v.rows();
    TrueParameters out;
    out.edges.resize(static_cast<std::size_t>(m));
    for (Index r = 0; r < m; ++r) {
        EdgeParameters& e = out.edges[static_cast<std::size_t>(r)];
        e.distance = v.row(r).norm();
        e.zero_length = e.distance <= 0.0;
        for (Plane plane : kPlanes) {
            const auto [u, w] = plane_coordinates(v.row(r), plane);
            e.plane_distance[plane] = std::hypot(u, w);
            e.flat_projection[plane] = e.plane_distance[plane] <= kDegenerateLength;
            e.azimuth[plane] = std::atan2(w, u);
            if (e.azimuth[plane] == -M_PI) e.azimuth[plane] = M_PI;
            // Angle to the normal axis, in [0, π]; sin θ = d^(plane) / d.
            e.elevation[plane] = std::atan2(e.plane_distance[plane], v(r, kNormalAxis[plane]));
        }
    }
    out.adoa = Eigen::MatrixXd::Zero(m, m);
    for (Index a = 0; a < m; ++a) {
        for (Index b = a + 1; b < m; ++b) {
            const Eigen::Vector3d va = v.row(a).transpose(), vb = v.row(b).transpose();
            const double angle = std::atan2(va.cross(vb).norm(), va.dot(vb));
            out.adoa(a, b) = angle;
            out.adoa(b, a) = angle;
        }
    }
    return out;
}

TrueParameters true_parameters(const NetworkGeometry& geometry, const EdgeSet& edges) {
    return true_parameters(edge_matrix(geometry, structure_matrices(edges)));
}

void require_nondegenerate(const TrueParameters& params, const EdgeSet& edges) {
    if (params.size() != edges.size()) {
        throw Error(ErrorCode::DimensionMismatch, "parameters and edge set disagree on M");
    }
    for (Index m = 0; m < params.size(); ++m) {
        const EdgeParameters& e = params.edges[static_cast<std::size_t>(m)];
        if (e.zero_length) {
            throw Error(ErrorCode::DegenerateEdge, "edge " + std::to_string(m) + " has zero length");
        }
        if (!edges.is_anchor_anchor(m) && (e.flat_projection[0] || e.flat_projection[1] || e.flat_projection[2])) {
            throw Error(ErrorCode::DegenerateEdge, "edge " + std::to_string(m) + " has a flat plane projection");
        }
    }
}

}  // namespace qmds
