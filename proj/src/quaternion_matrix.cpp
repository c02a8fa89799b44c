#include "qmds/quaternion_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qmds {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using cd = std::complex<double>;

void require_same_shape(const QuaternionMatrix& a, const QuaternionMatrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorCode::DimensionMismatch, what);
    }
}

// J[t; s] = [conj(s); -conj(t)] is the complex image of right multiplication
// by j. It is antiunitary, and every singular subspace of a complex adjoint
// is closed under it.
VectorXcd j_image(const VectorXcd& c) {
    const Index n = c.size() / 2;
    VectorXcd out(c.size());
    out.head(n) = c.tail(n).conjugate();
    out.tail(n) = -c.head(n).conjugate();
    return out;
}

// Orthonormal set of complex vectors that is closed under J, i.e. the complex
// image of a quaternion-orthonormal set.
class QuaternionBasis {
public:
    explicit QuaternionBasis(Index dim) : dim_(dim) {}

    Index size() const { return static_cast<Index>(picked_.size()); }
    const std::vector<VectorXcd>& picked() const { return picked_; }

    void project_out(Eigen::Ref<MatrixXcd> cols) const {
        if (span_.empty()) return;
        MatrixXcd a(dim_, static_cast<Index>(span_.size()));
        for (std::size_t k = 0; k < span_.size(); ++k) a.col(static_cast<Index>(k)) = span_[k];
        for (int pass = 0; pass < 2; ++pass) cols -= a * (a.adjoint() * cols);
    }

    VectorXcd add(VectorXcd c) {
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : span_) c -= b * b.dot(c);
        }
        c.normalize();
        VectorXcd jc = j_image(c);
        span_.push_back(c);
        span_.push_back(jc);
        picked_.push_back(c);
        return c;
    }

private:
    Index dim_;
    std::vector<VectorXcd> span_;
    std::vector<VectorXcd> picked_;
};

// Within a set of candidate residual columns take the first one that is
// still mostly outside the basis; otherwise the largest. For a generic
// spectrum this is always the first column of every J-pair.
Index choose_candidate(const MatrixXcd& residuals, const std::vector<Index>& candidates,
                       const std::vector<bool>& used) {
    Index best = -1;
    double best_norm = -1.0;
    for (Index c : candidates) {
        if (used[static_cast<std::size_t>(c)]) continue;
        const double r2 = residuals.col(c).squaredNorm();
        if (r2 > 0.5) return c;
        if (r2 > best_norm) {
            best_norm = r2;
            best = c;
        }
    }
    return best;
}

}  // namespace

QuaternionMatrix::QuaternionMatrix(Index rows, Index cols)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols)) {
    if (rows < 0 || cols < 0) throw Error(ErrorCode::DimensionMismatch, "negative matrix size");
}

QuaternionMatrix QuaternionMatrix::identity(Index n) {
    QuaternionMatrix m(n, n);
    for (Index i = 0; i < n; ++i) m(i, i) = Quaternion(1.0);
    return m;
}

QuaternionMatrix QuaternionMatrix::from_real(const MatrixXd& re) {
    QuaternionMatrix m(re.rows(), re.cols());
    for (Index r = 0; r < re.rows(); ++r)
        for (Index c = 0; c < re.cols(); ++c) m(r, c) = Quaternion(re(r, c));
    return m;
}

QuaternionMatrix QuaternionMatrix::from_components(const MatrixXd& q0, const MatrixXd& q1,
                                                   const MatrixXd& q2, const MatrixXd& q3) {
    const Index r = q0.rows(), c = q0.cols();
    for (const MatrixXd* q : {&q1, &q2, &q3}) {
        if (q->rows() != r || q->cols() != c) {
            throw Error(ErrorCode::DimensionMismatch, "from_components: component shapes differ");
        }
    }
    QuaternionMatrix m(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) m(i, j) = Quaternion(q0(i, j), q1(i, j), q2(i, j), q3(i, j));
    return m;
}

QuaternionMatrix QuaternionMatrix::outer(std::span<const Quaternion> v, std::span<const Quaternion> w) {
    QuaternionMatrix m(static_cast<Index>(v.size()), static_cast<Index>(w.size()));
    for (std::size_t r = 0; r < v.size(); ++r)
        for (std::size_t c = 0; c < w.size(); ++c)
            m(static_cast<Index>(r), static_cast<Index>(c)) = v[r] * w[c].conj();
    return m;
}

QuaternionMatrix QuaternionMatrix::column_vector(std::span<const Quaternion> v) {
    QuaternionMatrix m(static_cast<Index>(v.size()), 1);
    std::copy(v.begin(), v.end(), m.data_.begin());
    return m;
}

MatrixXd QuaternionMatrix::component(int which) const {
    MatrixXd out(rows_, cols_);
    for (Index r = 0; r < rows_; ++r) {
        for (Index c = 0; c < cols_; ++c) {
            const Quaternion& q = (*this)(r, c);
            switch (which) {
                case 0: out(r, c) = q.w; break;
                case 1: out(r, c) = q.x; break;
                case 2: out(r, c) = q.y; break;
                case 3: out(r, c) = q.z; break;
                default: throw Error(ErrorCode::OutOfRange, "component index must be 0..3");
            }
        }
    }
    return out;
}

QuaternionVector QuaternionMatrix::col(Index c) const {
    QuaternionVector v(static_cast<std::size_t>(rows_));
    for (Index r = 0; r < rows_; ++r) v[static_cast<std::size_t>(r)] = (*this)(r, c);
    return v;
}

void QuaternionMatrix::set_col(Index c, std::span<const Quaternion> v) {
    if (static_cast<Index>(v.size()) != rows_) {
        throw Error(ErrorCode::DimensionMismatch, "set_col: length differs from row count");
    }
    for (Index r = 0; r < rows_; ++r) (*this)(r, c) = v[static_cast<std::size_t>(r)];
}

QuaternionMatrix QuaternionMatrix::block(Index r0, Index c0, Index nr, Index nc) const {
    if (r0 < 0 || c0 < 0 || r0 + nr > rows_ || c0 + nc > cols_) {
        throw Error(ErrorCode::DimensionMismatch, "block outside matrix");
    }
    QuaternionMatrix b(nr, nc);
    for (Index r = 0; r < nr; ++r)
        for (Index c = 0; c < nc; ++c) b(r, c) = (*this)(r0 + r, c0 + c);
    return b;
}

QuaternionMatrix QuaternionMatrix::adjoint() const {
    QuaternionMatrix t(cols_, rows_);
    for (Index r = 0; r < rows_; ++r)
        for (Index c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c).conj();
    return t;
}

QuaternionMatrix QuaternionMatrix::hermitian_part() const {
    if (rows_ != cols_) throw Error(ErrorCode::DimensionMismatch, "hermitian_part of a non-square matrix");
    QuaternionMatrix h(rows_, cols_);
    for (Index r = 0; r < rows_; ++r)
        for (Index c = 0; c < cols_; ++c) h(r, c) = ((*this)(r, c) + (*this)(c, r).conj()) * 0.5;
    return h;
}

double QuaternionMatrix::hermitian_defect() const {
    if (rows_ != cols_) throw Error(ErrorCode::DimensionMismatch, "hermitian_defect of a non-square matrix");
    double scale = 0.0, defect = 0.0;
    for (Index r = 0; r < rows_; ++r) {
        for (Index c = 0; c < cols_; ++c) {
            scale = std::max(scale, (*this)(r, c).norm());
            defect = std::max(defect, ((*this)(r, c) - (*this)(c, r).conj()).norm());
        }
    }
    return scale > 0.0 ? defect / scale : defect;
}

QuaternionVector QuaternionMatrix::apply(std::span<const Quaternion> v) const {
    if (static_cast<Index>(v.size()) != cols_) {
        throw Error(ErrorCode::DimensionMismatch, "apply: vector length differs from column count");
    }
    QuaternionVector out(static_cast<std::size_t>(rows_));
    for (Index r = 0; r < rows_; ++r) {
        Quaternion s;
        for (Index c = 0; c < cols_; ++c) s += (*this)(r, c) * v[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] = s;
    }
    return out;
}

double QuaternionMatrix::frobenius_norm() const { return norm(std::span<const Quaternion>(data_)); }

QuaternionMatrix& QuaternionMatrix::operator+=(const QuaternionMatrix& o) {
    require_same_shape(*this, o, "operator+: shapes differ");
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
    return *this;
}

QuaternionMatrix& QuaternionMatrix::operator-=(const QuaternionMatrix& o) {
    require_same_shape(*this, o, "operator-: shapes differ");
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= o.data_[n];
    return *this;
}

QuaternionMatrix& QuaternionMatrix::operator*=(double s) {
    for (auto& q : data_) q *= s;
    return *this;
}

QuaternionMatrix operator+(QuaternionMatrix a, const QuaternionMatrix& b) { return a += b; }
QuaternionMatrix operator-(QuaternionMatrix a, const QuaternionMatrix& b) { return a -= b; }
QuaternionMatrix operator*(QuaternionMatrix a, double s) { return a *= s; }

QuaternionMatrix operator*(const QuaternionMatrix& a, const QuaternionMatrix& b) {
    if (a.cols() != b.rows()) throw Error(ErrorCode::DimensionMismatch, "operator*: inner dimensions differ");
    const MatrixXd a0 = a.component(0), a1 = a.component(1), a2 = a.component(2), a3 = a.component(3);
    const MatrixXd b0 = b.component(0), b1 = b.component(1), b2 = b.component(2), b3 = b.component(3);
    // Hamilton product expanded on the real component matrices.
    const MatrixXd c0 = a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3;
    const MatrixXd c1 = a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2;
    const MatrixXd c2 = a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1;
    const MatrixXd c3 = a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0;
    return QuaternionMatrix::from_components(c0, c1, c2, c3);
}

CayleyDicksonPair cayley_dickson_split(const QuaternionMatrix& q) {
    CayleyDicksonPair p{MatrixXcd(q.rows(), q.cols()), MatrixXcd(q.rows(), q.cols())};
    for (Index r = 0; r < q.rows(); ++r) {
        for (Index c = 0; c < q.cols(); ++c) {
            const Quaternion& e = q(r, c);
            p.a(r, c) = cd(e.w, e.x);
            p.b(r, c) = cd(e.y, e.z);
        }
    }
    return p;
}

QuaternionMatrix cayley_dickson_merge(const MatrixXcd& a, const MatrixXcd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "cayley_dickson_merge: halves differ in shape");
    }
    QuaternionMatrix q(a.rows(), a.cols());
    for (Index r = 0; r < a.rows(); ++r)
        for (Index c = 0; c < a.cols(); ++c)
            q(r, c) = Quaternion(a(r, c).real(), a(r, c).imag(), b(r, c).real(), b(r, c).imag());
    return q;
}

MatrixXcd complex_adjoint(const QuaternionMatrix& q) {
    const auto [a, b] = cayley_dickson_split(q);
    const Index m = q.rows(), n = q.cols();
    MatrixXcd out(2 * m, 2 * n);
    out.topLeftCorner(m, n) = a;
    out.topRightCorner(m, n) = b;
    out.bottomLeftCorner(m, n) = -b.conjugate();
    out.bottomRightCorner(m, n) = a.conjugate();
    return out;
}

VectorXcd to_complex(std::span<const Quaternion> v) {
    const Index n = static_cast<Index>(v.size());
    VectorXcd c(2 * n);
    for (Index r = 0; r < n; ++r) {
        const Quaternion& q = v[static_cast<std::size_t>(r)];
        c(r) = cd(q.w, q.x);
        c(n + r) = cd(-q.y, q.z);
    }
    return c;
}

QuaternionVector from_complex(const Eigen::Ref<const VectorXcd>& c) {
    const Index n = c.size() / 2;
    QuaternionVector v(static_cast<std::size_t>(n));
    for (Index r = 0; r < n; ++r) {
        v[static_cast<std::size_t>(r)] = Quaternion(c(r).real(), c(r).imag(), -c(n + r).real(), c(n + r).imag());
    }
    return v;
}

MatrixXd QsvdResult::d() const {
    MatrixXd out = MatrixXd::Zero(u.rows(), v.rows());
    for (Index k = 0; k < singular_values.size(); ++k) out(k, k) = singular_values(k);
    return out;
}

QuaternionMatrix QsvdResult::reconstruct() const {
    QuaternionMatrix ud = u.block(0, 0, u.rows(), singular_values.size());
    for (Index r = 0; r < ud.rows(); ++r)
        for (Index c = 0; c < ud.cols(); ++c) ud(r, c) *= singular_values(c);
    return ud * v.block(0, 0, v.rows(), singular_values.size()).adjoint();
}

QsvdResult qsvd(const QuaternionMatrix& q) {
    const Index m = q.rows(), n = q.cols(), p = std::min(m, n);
    const MatrixXcd qc = complex_adjoint(q);

    Eigen::BDCSVD<MatrixXcd> svd(qc, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();

    // Left singular values padded with zeros for the left null space, then a
    // stable nonincreasing order so pairs keep their numbering.
    std::vector<double> sigma(static_cast<std::size_t>(2 * m), 0.0);
    for (Index k = 0; k < sv.size(); ++k) sigma[static_cast<std::size_t>(k)] = sv(k);
    std::vector<Index> order(sigma.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return sigma[static_cast<std::size_t>(a)] > sigma[static_cast<std::size_t>(b)]; });

    MatrixXcd left(2 * m, 2 * m);
    std::vector<double> sorted(sigma.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        left.col(static_cast<Index>(k)) = svd.matrixU().col(order[k]);
        sorted[k] = sigma[static_cast<std::size_t>(order[k])];
    }

    const double smax = sorted.empty() ? 0.0 : sorted.front();
    const double cluster_tol = 1e-10 * smax;

    QuaternionBasis ubasis(2 * m);
    std::vector<double> kept;
    std::vector<bool> used(sorted.size(), false);

    Index begin = 0;
    while (begin < 2 * m && ubasis.size() < m) {
        Index end = begin + 1;
        while (end < 2 * m && sorted[static_cast<std::size_t>(end - 1)] - sorted[static_cast<std::size_t>(end)] <= cluster_tol) ++end;

        std::vector<Index> cluster(static_cast<std::size_t>(end - begin));
        std::iota(cluster.begin(), cluster.end(), begin);
        const Index want = std::min((end - begin + 1) / 2, m - ubasis.size());
        for (Index t = 0; t < want; ++t) {
            const Index c = choose_candidate(left, cluster, used);
            if (c < 0 || left.col(c).squaredNorm() < 1e-24) break;
            used[static_cast<std::size_t>(c)] = true;
            const VectorXcd b = ubasis.add(left.col(c));
            const VectorXcd jb = j_image(b);
            auto cols = left.middleCols(begin, end - begin);
            for (int pass = 0; pass < 2; ++pass) {
                cols -= b * (b.adjoint() * cols);
                cols -= jb * (jb.adjoint() * cols);
            }
            kept.push_back(sorted[static_cast<std::size_t>(c)]);
        }
        begin = end;
    }
    if (ubasis.size() < m) {
        // Odd cluster sizes from rounding; finish from whatever remains.
        MatrixXcd rest = left;
        ubasis.project_out(rest);
        std::vector<Index> all(static_cast<std::size_t>(2 * m));
        std::iota(all.begin(), all.end(), Index{0});
        std::vector<bool> none(all.size(), false);
        while (ubasis.size() < m) {
            const Index c = choose_candidate(rest, all, none);
            none[static_cast<std::size_t>(c)] = true;
            ubasis.add(rest.col(c));
            kept.push_back(0.0);
            rest = left;
            ubasis.project_out(rest);
        }
    }

    QsvdResult out{QuaternionMatrix(m, m), Eigen::VectorXd(p), QuaternionMatrix(n, n)};
    for (Index k = 0; k < m; ++k) out.u.set_col(k, from_complex(ubasis.picked()[static_cast<std::size_t>(k)]));
    for (Index k = 0; k < p; ++k) out.singular_values(k) = kept[static_cast<std::size_t>(k)];

    // Right vectors paired with the left ones wherever σ is resolvable.
    const double null_tol = static_cast<double>(2 * std::max(m, n)) * std::numeric_limits<double>::epsilon() * smax;
    QuaternionBasis vbasis(2 * n);
    for (Index k = 0; k < p; ++k) {
        const double s = out.singular_values(k);
        if (s <= null_tol) break;
        vbasis.add(qc.adjoint() * ubasis.picked()[static_cast<std::size_t>(k)] / s);
    }
    if (vbasis.size() < n) {
        MatrixXcd rest = svd.matrixV();
        std::vector<Index> all(static_cast<std::size_t>(2 * n));
        std::iota(all.begin(), all.end(), Index{0});
        std::vector<bool> vused(all.size(), false);
        vbasis.project_out(rest);
        while (vbasis.size() < n) {
            const Index c = choose_candidate(rest, all, vused);
            vused[static_cast<std::size_t>(c)] = true;
            const VectorXcd b = vbasis.add(rest.col(c));
            const VectorXcd jb = j_image(b);
            for (int pass = 0; pass < 2; ++pass) {
                rest -= b * (b.adjoint() * rest);
                rest -= jb * (jb.adjoint() * rest);
            }
        }
    }
    for (Index k = 0; k < n; ++k) out.v.set_col(k, from_complex(vbasis.picked()[static_cast<std::size_t>(k)]));
    return out;
}

EigenPair dominant_eigpair(const QuaternionMatrix& k) {
    if (k.rows() != k.cols()) throw Error(ErrorCode::DimensionMismatch, "dominant_eigpair needs a square matrix");
    EigenPair out;
    out.hermitian_defect = k.hermitian_defect();
    const QsvdResult s = qsvd(k.hermitian_part());
    out.lambda = s.singular_values.size() > 0 ? s.singular_values(0) : 0.0;
    out.u = s.u.col(0);
    return out;
}

}  // namespace qmds
