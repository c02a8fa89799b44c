#include "qmds/completion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace qmds {

namespace {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// For a Hermitian matrix the singular values are |λ| and the leading
// singular subspace is spanned by the eigenvectors of largest |λ|.
template <typename Scalar>
Mat<Scalar> truncate_hermitian(const Mat<Scalar>& x, Index rank, double shrinkage) {
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(x);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    std::vector<Index> order(static_cast<std::size_t>(lambda.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return std::abs(lambda(a)) > std::abs(lambda(b)); });
    const Index r = std::min<Index>(rank, lambda.size());
    Mat<Scalar> u(x.rows(), r);
    Eigen::VectorXd l(r);
    for (Index c = 0; c < r; ++c) {
        const Index k = order[static_cast<std::size_t>(c)];
        u.col(c) = eig.eigenvectors().col(k);
        const double mag = std::max(std::abs(lambda(k)) - shrinkage, 0.0);
        l(c) = lambda(k) < 0.0 ? -mag : mag;
    }
    return u * l.asDiagonal() * u.adjoint();
}

template <typename Scalar>
Mat<Scalar> truncate(const Mat<Scalar>& x, Index rank, double shrinkage, bool hermitian) {
    if (hermitian) return truncate_hermitian<Scalar>(x, rank, shrinkage);
    Eigen::BDCSVD<Mat<Scalar>> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index r = std::min<Index>(rank, svd.singularValues().size());
    Eigen::VectorXd s = svd.singularValues().head(r);
    if (shrinkage > 0.0) s = (s.array() - shrinkage).max(0.0).matrix();
    return svd.matrixU().leftCols(r) * s.asDiagonal() * svd.matrixV().leftCols(r).adjoint();
}

template <typename Scalar>
Completion<Scalar> complete(const Mat<Scalar>& observed, const Mask& mask, const CompletionConfig& config,
                            Symmetry symmetry) {
    if (mask.rows() != observed.rows() || mask.cols() != observed.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "mask and matrix shapes differ");
    }
    if (mask.rows() == mask.cols() && !is_symmetric(mask)) {
        throw Error(ErrorCode::AsymmetricMask, "observation mask is not symmetric");
    }
    if (config.target_rank < 1 || !(config.tol > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "completion needs target_rank >= 1 and tol > 0");
    }

    const Mat<Scalar> known = mask.select(observed, Mat<Scalar>::Zero(observed.rows(), observed.cols()));
    Completion<Scalar> out{known, 0, true, {}};
    if (mask.all()) return out;

    // Iterates of a Hermitian input stay exactly Hermitian.
    const bool hermitian = known.rows() == known.cols() && known == known.adjoint();
    Mat<Scalar>& x = out.value;
    out.converged = false;
    for (int it = 1; it <= config.max_iters; ++it) {
        const Mat<Scalar> low = truncate<Scalar>(x, config.target_rank, config.shrinkage, hermitian);
        out.objective.push_back(mask.select(low - known, Mat<Scalar>::Zero(x.rows(), x.cols())).norm());
        Mat<Scalar> next = mask.select(known, low);
        const double change = (next - x).norm() / std::max(x.norm(), 1e-300);
        x = std::move(next);
        out.iterations = it;
        if (change < config.tol) {
            out.converged = true;
            break;
        }
    }

    if (symmetry == Symmetry::Symmetric) {
        x = (0.5 * (x + x.transpose())).eval();
    } else if (symmetry == Symmetry::Hermitian) {
        x = (0.5 * (x + x.adjoint())).eval();
    }
    return out;
}

}  // namespace

Completion<double> complete_lowrank(const Eigen::MatrixXd& observed, const Mask& mask, const CompletionConfig& config,
                                    Symmetry symmetry) {
    return complete<double>(observed, mask, config, symmetry);
}

Completion<std::complex<double>> complete_lowrank(const Eigen::MatrixXcd& observed, const Mask& mask,
                                                  const CompletionConfig& config, Symmetry symmetry) {
    return complete<std::complex<double>>(observed, mask, config, symmetry);
}

RealGek complete_real_gek(const RealGek& gek, const CompletionConfig& config, GekCompletionStats* stats) {
    if (gek.mask.size() == 0) return gek;
    auto c = complete_lowrank(gek.k, gek.mask, config, Symmetry::Symmetric);
    if (stats) *stats = {c.iterations, c.converged};
    return {std::move(c.value), {}};
}

QuatGek complete_quat_gek(const QuatGek& gek, const CompletionConfig& config, GekCompletionStats* stats) {
    if (gek.mask.size() == 0) return gek;
    const CayleyDicksonPair halves = cayley_dickson_split(gek.k);
    const auto a = complete_lowrank(halves.a, gek.mask, config, Symmetry::None);
    const auto b = complete_lowrank(halves.b, gek.mask, config, Symmetry::None);
    if (stats) *stats = {a.iterations + b.iterations, a.converged && b.converged};
    return {cayley_dickson_merge(a.value, b.value).hermitian_part(), {}};
}

}  // namespace qmds
