#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <variant>

#include "qmds/measurement.hpp"
#include "qmds/quaternion_matrix.hpp"

namespace qmds {

/// Real-domain Gram edge kernel, K[m][p] = d_m d_p cos α_mp (m²).
struct RealGek {
    Eigen::MatrixXd k;
    Mask mask;  // empty when fully observed
};

/// Quaternion-domain Gram edge kernel (Hermitian, m²).
struct QuatGek {
    QuaternionMatrix k;
    Mask mask;
};

/// Everything the quaternion kernel is assembled from: distances and 3D
/// ADoAs plus, per edge and plane, the projected length and azimuth.
struct QuatGekInputs {
    Eigen::VectorXd distance;
    Eigen::MatrixXd adoa;
    Eigen::MatrixX3d plane_distance;
    Eigen::MatrixX3d azimuth;
};

/// Scenario II: d̃^(plane) = d̃ sin θ̃ and azimuths as measured.
QuatGekInputs quat_inputs_from_measurements(const MeasurementSet& meas);

/// Scenario I: measured d̃ and α̃, with azimuths and elevations taken from
/// an estimate of the edge geometry and d̃^(plane) = d̃ sin θ̂.
QuatGekInputs quat_inputs_from_estimate(const MeasurementSet& meas, const TrueParameters& estimated);

/// Noise-free inputs, mainly for tests.
QuatGekInputs quat_inputs_from_truth(const TrueParameters& truth);

RealGek build_real_gek(const MeasurementSet& meas);
RealGek build_real_gek(const Eigen::VectorXd& distance, const Eigen::MatrixXd& adoa);

/// Entry (m, p) = d_m d_p cos α_mp - i d^xy_m d^xy_p sin α^xy_mp
///               - j d^xz_m d^xz_p sin α^xz_mp - k d^yz_m d^yz_p sin α^yz_mp,
/// evaluated for m < p and mirrored by conjugation.
QuatGek build_quat_gek(const QuatGekInputs& in);

struct GekBlocks {
    QuaternionMatrix k1;  // anchor-anchor × anchor-anchor (never consumed by a solver)
    QuaternionMatrix k2;  // anchor-anchor × anchor-target
    QuaternionMatrix k3;  // anchor-target × anchor-target
};

GekBlocks extract_blocks(const QuaternionMatrix& k, Index n_anchors, Index n_targets);

/// Zeroes unobserved entries and keeps the mask. Throws AsymmetricMask.
RealGek apply_mask(RealGek gek, const Mask& mask);
QuatGek apply_mask(QuatGek gek, const Mask& mask);

/// Flat little-endian dump:
///   bytes 0-3   magic "QGEK"
///   bytes 4-7   uint32 domain tag (0 real, 1 quaternion)
///   bytes 8-15  uint64 M
///   payload     M·M row-major float64 entries, 1 (real) or 4 (w, x, y, z) per entry
void write_gek(std::ostream& out, const Eigen::MatrixXd& k);
void write_gek(std::ostream& out, const QuaternionMatrix& k);
void write_gek(const std::filesystem::path& path, const std::variant<Eigen::MatrixXd, QuaternionMatrix>& k);
std::variant<Eigen::MatrixXd, QuaternionMatrix> read_gek(std::istream& in);
std::variant<Eigen::MatrixXd, QuaternionMatrix> read_gek(const std::filesystem::path& path);

}  // namespace qmds
