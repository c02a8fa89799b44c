#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "qmds/gek.hpp"

namespace qmds {

struct CompletionConfig {
    Index target_rank = 3;
    int max_iters = 500;
    double tol = 1e-8;        // relative Frobenius change between iterates
    double shrinkage = 0.0;   // soft threshold applied to the kept singular values
};

/// Rank used for each Cayley-Dickson half of a rank-1 quaternion GEK.
inline CompletionConfig quaternion_split_config() { return {2, 500, 1e-8, 0.0}; }

enum class Symmetry { None, Symmetric, Hermitian };

template <typename Scalar>
struct Completion {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> value;
    int iterations = 0;
    bool converged = true;
    /// ‖P_Ω(T_r(X_k) - K)‖_F per iteration; non-increasing.
    std::vector<double> objective;
};

/// Alternating projection between the rank-r matrices (truncated SVD) and
/// the matrices that agree with the observations. Starts from the
/// zero-filled input; the returned matrix carries the observed entries
/// exactly. Non-convergence is reported through `converged`, with the last
/// iterate returned.
Completion<double> complete_lowrank(const Eigen::MatrixXd& observed, const Mask& mask, const CompletionConfig& config,
                                    Symmetry symmetry = Symmetry::Symmetric);
Completion<std::complex<double>> complete_lowrank(const Eigen::MatrixXcd& observed, const Mask& mask,
                                                  const CompletionConfig& config, Symmetry symmetry = Symmetry::None);

struct GekCompletionStats {
    int iterations = 0;
    bool converged = true;
};

/// Completes a masked real GEK; the result has no mask.
RealGek complete_real_gek(const RealGek& gek, const CompletionConfig& config, GekCompletionStats* stats = nullptr);

/// Splits K = Qa + Qb j, completes both halves independently, merges and
/// takes the Hermitian part.
QuatGek complete_quat_gek(const QuatGek& gek, const CompletionConfig& config = quaternion_split_config(),
                          GekCompletionStats* stats = nullptr);

}  // namespace qmds
