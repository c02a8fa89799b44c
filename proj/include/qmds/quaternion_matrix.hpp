#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "qmds/quaternion.hpp"

namespace qmds {

using Index = Eigen::Index;

/// Dense row-major quaternion matrix.
class QuaternionMatrix {
public:
    QuaternionMatrix() = default;
    QuaternionMatrix(Index rows, Index cols);

    static QuaternionMatrix identity(Index n);
    static QuaternionMatrix from_real(const Eigen::MatrixXd& re);
    static QuaternionMatrix from_components(const Eigen::MatrixXd& q0, const Eigen::MatrixXd& q1,
                                            const Eigen::MatrixXd& q2, const Eigen::MatrixXd& q3);
    /// v w^H
    static QuaternionMatrix outer(std::span<const Quaternion> v, std::span<const Quaternion> w);
    static QuaternionMatrix column_vector(std::span<const Quaternion> v);

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }

    Quaternion& operator()(Index r, Index c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
    const Quaternion& operator()(Index r, Index c) const {
        return data_[static_cast<std::size_t>(r * cols_ + c)];
    }

    std::span<const Quaternion> data() const { return data_; }

    /// Real component matrix: 0 → real part, 1 → i, 2 → j, 3 → k.
    Eigen::MatrixXd component(int which) const;

    QuaternionVector col(Index c) const;
    void set_col(Index c, std::span<const Quaternion> v);
    QuaternionMatrix block(Index r0, Index c0, Index nr, Index nc) const;

    /// Conjugate transpose.
    QuaternionMatrix adjoint() const;
    /// (A + A^H) / 2; requires a square matrix.
    QuaternionMatrix hermitian_part() const;
    /// max |A(i,j) - conj(A(j,i))| / max(|A|_max, tiny).
    double hermitian_defect() const;

    /// A v with entries Σ_c A(r,c) v_c (matrix entries on the left).
    QuaternionVector apply(std::span<const Quaternion> v) const;

    double frobenius_norm() const;

    QuaternionMatrix& operator+=(const QuaternionMatrix& o);
    QuaternionMatrix& operator-=(const QuaternionMatrix& o);
    QuaternionMatrix& operator*=(double s);

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<Quaternion> data_;
};

QuaternionMatrix operator+(QuaternionMatrix a, const QuaternionMatrix& b);
QuaternionMatrix operator-(QuaternionMatrix a, const QuaternionMatrix& b);
QuaternionMatrix operator*(const QuaternionMatrix& a, const QuaternionMatrix& b);
QuaternionMatrix operator*(QuaternionMatrix a, double s);

/// Q = Qa + Qb j with Qa = Q0 + i Q1 and Qb = Q2 + i Q3.
struct CayleyDicksonPair {
    Eigen::MatrixXcd a;
    Eigen::MatrixXcd b;
};

CayleyDicksonPair cayley_dickson_split(const QuaternionMatrix& q);
QuaternionMatrix cayley_dickson_merge(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// The 2M×2N complex matrix [[Qa, Qb], [-conj(Qb), conj(Qa)]].
Eigen::MatrixXcd complex_adjoint(const QuaternionMatrix& q);

/// Complex image [xa; -conj(xb)] of a quaternion vector x = xa + xb j, and
/// its inverse. complex_adjoint(Q) * to_complex(x) == to_complex(Q x).
Eigen::VectorXcd to_complex(std::span<const Quaternion> v);
QuaternionVector from_complex(const Eigen::Ref<const Eigen::VectorXcd>& c);

struct QsvdResult {
    QuaternionMatrix u;                 // M×M, unitary
    Eigen::VectorXd singular_values;    // min(M,N), nonincreasing
    QuaternionMatrix v;                 // N×N, unitary

    /// Rectangular M×N diagonal.
    Eigen::MatrixXd d() const;
    /// U D V^H
    QuaternionMatrix reconstruct() const;
};

/// Quaternion SVD through the SVD of the complex adjoint. Each quaternion
/// singular value appears twice in the adjoint spectrum; every second one
/// (starting with the largest) is kept and the matching left vectors are
/// mapped back to H. Inside a cluster of repeated values the kept vectors
/// are chosen by quaternion Gram-Schmidt so U stays unitary. Right vectors
/// are v_k = Q^H u_k / σ_k, completed on the null space.
QsvdResult qsvd(const QuaternionMatrix& q);

struct EigenPair {
    double lambda = 0.0;
    QuaternionVector u;
    /// Hermitian defect of the input before symmetrization.
    double hermitian_defect = 0.0;
};

inline constexpr double kHermitianTolerance = 1e-12;

/// Largest singular value of (K + K^H)/2 and its left singular vector.
/// Vectors are unique only up to right multiplication by a unit quaternion.
EigenPair dominant_eigpair(const QuaternionMatrix& k);

}  // namespace qmds
