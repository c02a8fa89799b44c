#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <random>

#include "qmds/network.hpp"

namespace qmds {

using Rng = std::mt19937_64;
using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kNoAngleNoise = std::numeric_limits<double>::infinity();

/// ε = 0 means noise-free angles.
struct NoiseConfig {
    double sigma_d = 0.0;      // meters
    double epsilon_deg = 0.0;  // degrees
};

/// Probability mass of the zero-mean Tikhonov density with concentration
/// rho on [-bound, bound] (radians).
double tikhonov_mass(double bound, double rho);

/// Concentration ρ whose central 90% interval is ±ε. Solved by bisection
/// and cached per ε. Throws OutOfRange unless 0 < ε < 162°.
double epsilon_to_rho(double epsilon_deg);

/// Gamma(shape d²/σ², scale σ²/d): mean d, standard deviation σ.
double sample_distance(double d, double sigma_d, Rng& rng);

/// Zero-mean Tikhonov (von Mises) draw in (-π, π]. rho = ∞ returns 0.
double sample_tikhonov(double rho, Rng& rng);

/// theta + δ wrapped to (-π, π].
double sample_angle(double theta, double rho, Rng& rng);

double wrap_angle(double a);
/// Reflects into [0, π].
double reflect_angle(double a);

enum class Scenario { I, II };

const char* to_string(Scenario s);

/// Per-edge azimuth and elevation readings, one column per plane (see Plane).
struct PlaneAngles {
    Eigen::MatrixX3d azimuth;
    Eigen::MatrixX3d elevation;
};

struct MeasurementSet {
    Scenario scenario = Scenario::I;
    Eigen::VectorXd distance;           // d̃_m
    Eigen::MatrixXd adoa;               // α̃_mp, symmetric, zero diagonal
    std::optional<PlaneAngles> angles;  // Scenario II only
    Mask mask;                          // true = observed

    Index size() const { return distance.size(); }
    bool has_missing() const { return mask.size() > 0 && !mask.all(); }
};

/// Draws every measured quantity independently. Scenario I carries only
/// distances and ADoAs; Scenario II adds azimuths and elevations.
MeasurementSet synthesize(const TrueParameters& truth, const NoiseConfig& noise, Scenario scenario, Rng& rng);

/// Symmetric observation mask with round(fraction · M(M-1)/2) off-diagonal
/// pairs removed and the diagonal kept.
Mask missing_mask(Index m, double fraction, Rng& rng);

bool is_symmetric(const Mask& mask);

}  // namespace qmds
