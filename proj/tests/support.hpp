#pragma once

#include <Eigen/Dense>

#include <random>

#include "qmds/harness.hpp"

namespace qmds::test {

inline Quaternion random_quaternion(Rng& rng) {
    std::normal_distribution<double> n;
    return {n(rng), n(rng), n(rng), n(rng)};
}

inline Quaternion random_unit_quaternion(Rng& rng) {
    const Quaternion q = random_quaternion(rng);
    return q / q.norm();
}

inline QuaternionVector random_quaternion_vector(Index n, Rng& rng) {
    QuaternionVector v(static_cast<std::size_t>(n));
    for (auto& q : v) q = random_quaternion(rng);
    return v;
}

inline QuaternionMatrix random_quaternion_matrix(Index rows, Index cols, Rng& rng) {
    QuaternionMatrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) m(r, c) = random_quaternion(rng);
    return m;
}

inline double relative_error(const QuaternionMatrix& a, const QuaternionMatrix& b) {
    return (a - b).frobenius_norm() / std::max(b.frobenius_norm(), 1e-300);
}

inline Eigen::Matrix3d random_orthogonal(Rng& rng, bool reflect) {
    std::normal_distribution<double> n;
    Eigen::Matrix3d g;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) g(r, c) = n(rng);
    Eigen::Matrix3d q = Eigen::HouseholderQR<Eigen::Matrix3d>(g).householderQ();
    if ((q.determinant() < 0) != reflect) q.col(0) *= -1.0;
    return q;
}

/// Default room and anchors and uniformly drawn targets.
inline NetworkGeometry random_room_geometry(Rng& rng, Index n_targets = 15) {
    const ExperimentConfig c = default_config();
    std::uniform_real_distribution<double> ux(0.0, c.room.length), uy(0.0, c.room.width), uz(0.0, c.room.height);
    NetworkGeometry g{c.anchors, Points(n_targets, 3)};
    for (Index t = 0; t < n_targets; ++t) g.targets.row(t) << ux(rng), uy(rng), uz(rng);
    return g;
}

/// Exact edge quaternions ν = C χ in edge order.
inline QuaternionVector edge_quaternions(const NetworkGeometry& g, const EdgeSet& edges) {
    return to_quaternions(edge_matrix(g, structure_matrices(edges)));
}

inline MeasurementSet noiseless_measurements(const TrueParameters& truth, Scenario scenario) {
    Rng rng(0);
    return synthesize(truth, {0.0, 0.0}, scenario, rng);
}

}  // namespace qmds::test
