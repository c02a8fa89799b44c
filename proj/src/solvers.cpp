#include "qmds/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qmds {

namespace {

Points quaternion_rows(std::span<const Quaternion> v) { return from_quaternions(v); }

Points apply_inversion(const AnchorFrame& frame, const Points& v_hat) {
    const Index na = frame.n_anchors();
    if (v_hat.rows() != frame.edges.size()) {
        throw Error(ErrorCode::DimensionMismatch, "edge estimate has the wrong number of rows");
    }
    Points rhs(na + v_hat.rows(), 3);
    rhs.topRows(na) = frame.anchors;
    rhs.bottomRows(v_hat.rows()) = v_hat;
    return frame.inversion * rhs;
}

Estimate finish(const AnchorFrame& frame, const Points& v_hat, Diagnostics diag) {
    const Points x_hat = apply_inversion(frame, v_hat);
    Similarity fit;
    const Points aligned = procrustes_align(x_hat, frame.anchors, &fit);
    diag.procrustes = fit;
    return {aligned.bottomRows(frame.n_targets()), std::move(diag)};
}

Points anchor_anchor_rows(const Points& v, const EdgeSet& edges) {
    Points out(edges.n_anchor_anchor(), 3);
    Index r = 0;
    for (Index m = 0; m < edges.size(); ++m)
        if (edges.is_anchor_anchor(m)) out.row(r++) = v.row(m);
    return out;
}

QuaternionVector anchor_anchor_entries(std::span<const Quaternion> v, const EdgeSet& edges) {
    QuaternionVector out;
    out.reserve(static_cast<std::size_t>(edges.n_anchor_anchor()));
    for (Index m = 0; m < edges.size(); ++m)
        if (edges.is_anchor_anchor(m)) out.push_back(v[static_cast<std::size_t>(m)]);
    return out;
}

Quaternion ambiguity_phase(std::span<const Quaternion> nu_hat_aa, std::span<const Quaternion> nu_aa) {
    const Quaternion s = inner(nu_hat_aa, nu_aa);
    const double scale = norm(nu_hat_aa) * norm(nu_aa);
    if (!(scale > 0.0) || s.norm() <= 1e-12 * scale) {
        throw Error(ErrorCode::AmbiguityResolutionFailure, "estimated and known anchor edges are orthogonal");
    }
    return s / s.norm();
}

double relative_misfit(std::span<const Quaternion> a, std::span<const Quaternion> b) {
    double num = 0.0;
    for (std::size_t m = 0; m < a.size(); ++m) num += (a[m] - b[m]).norm_squared();
    return std::sqrt(num / norm_squared(b));
}

void check_square(Index rows, Index cols, const AnchorFrame& frame) {
    if (rows != cols || rows != frame.edges.size()) {
        throw Error(ErrorCode::DimensionMismatch, "GEK size differs from the number of edges");
    }
}

QuaternionVector scaled(QuaternionVector v, double s) {
    for (Quaternion& q : v) q *= s;
    return v;
}

}  // namespace

const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Smds: return "smds";
        case Algorithm::QdSmds: return "qdsmds";
        case Algorithm::QdMrc: return "mrc";
        case Algorithm::QdMrcIter: return "mrciter";
    }
    return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
    for (Algorithm a : {Algorithm::Smds, Algorithm::QdSmds, Algorithm::QdMrc, Algorithm::QdMrcIter})
        if (name == to_string(a)) return a;
    return std::nullopt;
}

AnchorFrame::AnchorFrame(Points anchors_in, EdgeSet edges_in)
    : anchors(std::move(anchors_in)), edges(std::move(edges_in)) {
    if (anchors.rows() != edges.n_anchors) throw Error(ErrorCode::DimensionMismatch, "anchor count differs from edges");
    structure = structure_matrices(edges);
    chi_a = to_quaternions(anchors);
    for (const Edge& e : edges.pairs)
        if (e.j < edges.n_anchors) nu_aa.push_back(chi_a[static_cast<std::size_t>(e.i)] - chi_a[static_cast<std::size_t>(e.j)]);

    const Index na = edges.n_anchors;
    const Index n = edges.n_nodes();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(na + edges.size(), n);
    a.topLeftCorner(na, na).setIdentity();
    a.bottomRows(edges.size()) = structure.c;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    if (cod.rank() < n) throw Error(ErrorCode::SingularSystem, "edge structure does not determine every node");
    inversion = cod.pseudoInverse();
}

AnchorFrame AnchorFrame::make(const Points& anchors, Index n_targets) {
    return AnchorFrame(anchors, edge_set(anchors.rows(), n_targets));
}

Points Similarity::apply(const Points& x) const {
    Points out = scale * x * rotation;
    out.rowwise() += translation;
    return out;
}

Points anchored_inversion(const Points& v_hat, const Points& anchors, const StructureMatrices& structure) {
    const Index na = anchors.rows();
    const Index m = structure.c.rows();
    const Index n = structure.c.cols();
    if (v_hat.rows() != m) throw Error(ErrorCode::DimensionMismatch, "edge estimate has the wrong number of rows");
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(na + m, n);
    a.topLeftCorner(na, na).setIdentity();
    a.bottomRows(m) = structure.c;
    Eigen::MatrixXd rhs(na + m, 3);
    rhs.topRows(na) = anchors;
    rhs.bottomRows(m) = v_hat;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    if (cod.rank() < n) throw Error(ErrorCode::SingularSystem, "edge structure does not determine every node");
    return cod.solve(rhs);
}

Similarity procrustes_fit(const Points& estimated_anchors, const Points& known_anchors) {
    const Index na = known_anchors.rows();
    if (estimated_anchors.rows() != na) throw Error(ErrorCode::DimensionMismatch, "anchor counts differ");
    if (na < 4) throw Error(ErrorCode::DegenerateAnchors, "at least 4 anchors are needed");

    const Eigen::RowVector3d mu_hat = estimated_anchors.colwise().mean();
    const Eigen::RowVector3d mu = known_anchors.colwise().mean();
    const Points a = estimated_anchors.rowwise() - mu_hat;
    const Points b = known_anchors.rowwise() - mu;

    const Eigen::Vector3d spread = Eigen::JacobiSVD<Eigen::MatrixXd>(b).singularValues();
    if (spread(2) <= 1e-9 * spread(0)) throw Error(ErrorCode::DegenerateAnchors, "known anchors are coplanar");
    const double a_norm2 = a.squaredNorm();
    if (!(a_norm2 > 1e-24 * b.squaredNorm())) {
        throw Error(ErrorCode::DegenerateAnchors, "estimated anchors collapse to a point");
    }

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(a.transpose() * b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Similarity s;
    s.rotation = svd.matrixU() * svd.matrixV().transpose();
    s.scale = svd.singularValues().sum() / a_norm2;
    s.translation = mu - s.scale * mu_hat * s.rotation;
    s.residual = (s.apply(estimated_anchors) - known_anchors).norm();
    return s;
}

Points procrustes_align(const Points& x_hat, const Points& known_anchors, Similarity* fitted) {
    const Index na = known_anchors.rows();
    if (x_hat.rows() < na) throw Error(ErrorCode::DimensionMismatch, "estimate has fewer rows than anchors");
    const Similarity s = procrustes_fit(x_hat.topRows(na), known_anchors);
    if (fitted) *fitted = s;
    return s.apply(x_hat);
}

Eigen::Matrix3d orthogonal_align(const Points& from, const Points& to) {
    if (from.rows() != to.rows()) throw Error(ErrorCode::DimensionMismatch, "row counts differ");
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(from.transpose() * to, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

QuaternionVector resolve_edge_ambiguity(std::span<const Quaternion> nu_hat, std::span<const Quaternion> nu_aa_known,
                                        double* residual) {
    if (nu_aa_known.empty()) throw Error(ErrorCode::ZeroAnchorEdges, "no anchor-anchor edges");
    if (nu_hat.size() < nu_aa_known.size()) throw Error(ErrorCode::DimensionMismatch, "estimate is shorter than ν_AA");
    const auto head = nu_hat.first(nu_aa_known.size());
    const Quaternion g = ambiguity_phase(head, nu_aa_known);
    QuaternionVector out = right_multiply(nu_hat, g);
    if (residual) *residual = relative_misfit(std::span(out).first(nu_aa_known.size()), nu_aa_known);
    return out;
}

Estimate smds(const Eigen::MatrixXd& k_r, const AnchorFrame& frame) {
    check_square(k_r.rows(), k_r.cols(), frame);
    const Eigen::MatrixXd sym = 0.5 * (k_r + k_r.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.info() != Eigen::Success) throw Error(ErrorCode::NonConvergence, "eigendecomposition failed");

    const Eigen::VectorXd& lambda = eig.eigenvalues();
    std::vector<Index> order(static_cast<std::size_t>(lambda.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return std::abs(lambda(a)) > std::abs(lambda(b)); });
    if (order.size() < 3) throw Error(ErrorCode::RankDeficient, "fewer than 3 edges");

    const double tiny = 1e-12 * std::abs(lambda(order.front()));
    if ((lambda.array() > tiny).count() < 3) {
        throw Error(ErrorCode::RankDeficient, "real GEK has fewer than 3 positive eigenvalues");
    }

    Diagnostics diag;
    Points v_hat(k_r.rows(), 3);
    for (int c = 0; c < 3; ++c) {
        const double l = lambda(order[static_cast<std::size_t>(c)]);
        diag.top_values.push_back(l);
        v_hat.col(c) = eig.eigenvectors().col(order[static_cast<std::size_t>(c)]) * std::sqrt(std::max(l, 0.0));
    }

    const Points known_aa = quaternion_rows(frame.nu_aa);
    v_hat = v_hat * orthogonal_align(anchor_anchor_rows(v_hat, frame.edges), known_aa);
    return finish(frame, v_hat, std::move(diag));
}

Estimate qd_smds(const QuaternionMatrix& k_q, const AnchorFrame& frame) {
    check_square(k_q.rows(), k_q.cols(), frame);
    const EigenPair pair = dominant_eigpair(k_q);
    if (pair.lambda < 0.0) throw Error(ErrorCode::NegativeTopValue, "dominant value is negative");

    Diagnostics diag;
    diag.top_values.push_back(pair.lambda);
    diag.hermitian_defect = pair.hermitian_defect;

    const QuaternionVector nu_hat = scaled(pair.u, std::sqrt(pair.lambda));
    const QuaternionVector head = anchor_anchor_entries(nu_hat, frame.edges);
    const Quaternion g = ambiguity_phase(head, frame.nu_aa);
    const QuaternionVector nu = right_multiply(nu_hat, g);
    diag.ambiguity_residual = relative_misfit(anchor_anchor_entries(nu, frame.edges), frame.nu_aa);
    return finish(frame, quaternion_rows(nu), std::move(diag));
}

Points targets_from_anchor_target_edges(std::span<const Quaternion> nu_at, const AnchorFrame& frame) {
    const Index na = frame.n_anchors();
    const Index nt = frame.n_targets();
    if (static_cast<Index>(nu_at.size()) != na * nt) {
        throw Error(ErrorCode::DimensionMismatch, "ν_AT length differs from N_A N_T");
    }
    QuaternionVector chi_t(static_cast<std::size_t>(nt));
    for (Index t = 0; t < nt; ++t) {
        Quaternion sum;
        for (Index a = 0; a < na; ++a)
            sum += frame.chi_a[static_cast<std::size_t>(a)] - nu_at[static_cast<std::size_t>(a * nt + t)];
        chi_t[static_cast<std::size_t>(t)] = sum / static_cast<double>(na);
    }
    return quaternion_rows(chi_t);
}

Estimate qd_mrc_smds(const QuaternionMatrix& k_q, const AnchorFrame& frame) {
    return qd_mrc_smds_iterative(k_q, frame, 0);
}

Estimate qd_mrc_smds_iterative(const QuaternionMatrix& k_q, const AnchorFrame& frame, int tau_max, bool keep_trace) {
    if (tau_max < 0) throw Error(ErrorCode::InvalidConfig, "tau_max must be non-negative");
    check_square(k_q.rows(), k_q.cols(), frame);
    const double a = norm_squared(frame.nu_aa);
    if (!(a > 0.0)) throw Error(ErrorCode::ZeroAnchorEdges, "anchor-anchor edges are empty or zero");

    const GekBlocks blocks = extract_blocks(k_q, frame.n_anchors(), frame.n_targets());
    const QuaternionVector k2h_nu_aa = blocks.k2.adjoint().apply(frame.nu_aa);
    const QuaternionMatrix k3h = blocks.k3.adjoint();

    Diagnostics diag;
    QuaternionVector nu = scaled(k2h_nu_aa, 1.0 / a);
    if (keep_trace) diag.target_trace.push_back(targets_from_anchor_target_edges(nu, frame));
    for (int tau = 1; tau <= tau_max; ++tau) {
        QuaternionVector next = k3h.apply(nu);
        for (std::size_t m = 0; m < next.size(); ++m) next[m] += k2h_nu_aa[m];
        next = scaled(std::move(next), 1.0 / (a + norm_squared(nu)));

        double change = 0.0;
        for (std::size_t m = 0; m < next.size(); ++m) change += (next[m] - nu[m]).norm_squared();
        diag.fixed_point_residuals.push_back(std::sqrt(change) / norm(nu));
        nu = std::move(next);
        diag.iterations = tau;
        if (keep_trace) diag.target_trace.push_back(targets_from_anchor_target_edges(nu, frame));
    }
    return {targets_from_anchor_target_edges(nu, frame), std::move(diag)};
}

namespace {

Eigen::MatrixXd real_kernel(const MeasurementSet& meas, const SolverConfig& config, Diagnostics& diag) {
    RealGek gek = build_real_gek(meas);
    if (!meas.has_missing()) return gek.k;
    GekCompletionStats stats;
    gek = complete_real_gek(apply_mask(std::move(gek), meas.mask), config.real_completion, &stats);
    diag.completion_iterations += stats.iterations;
    diag.completion_converged = diag.completion_converged && stats.converged;
    return gek.k;
}

QuaternionMatrix quaternion_kernel(const MeasurementSet& meas, const QuatGekInputs& inputs, const SolverConfig& config,
                                   Diagnostics& diag) {
    QuatGek gek = build_quat_gek(inputs);
    if (!meas.has_missing()) return gek.k;
    GekCompletionStats stats;
    gek = complete_quat_gek(apply_mask(std::move(gek), meas.mask), config.quat_completion, &stats);
    diag.completion_iterations += stats.iterations;
    diag.completion_converged = diag.completion_converged && stats.converged;
    return gek.k;
}

Estimate run_quaternion_solver(const QuaternionMatrix& k_q, const AnchorFrame& frame, const SolverConfig& config) {
    switch (config.algorithm) {
        case Algorithm::QdSmds: return qd_smds(k_q, frame);
        case Algorithm::QdMrc: return qd_mrc_smds(k_q, frame);
        case Algorithm::QdMrcIter: return qd_mrc_smds_iterative(k_q, frame, config.tau_max, config.keep_trace);
        case Algorithm::Smds: break;
    }
    throw Error(ErrorCode::InvalidConfig, "not a quaternion-domain solver");
}

void merge_completion(Diagnostics& into, const Diagnostics& from) {
    into.completion_iterations += from.completion_iterations;
    into.completion_converged = into.completion_converged && from.completion_converged;
}

}  // namespace

Estimate scenario_one_pipeline(const MeasurementSet& meas, const AnchorFrame& frame, const SolverConfig& config) {
    Diagnostics pre;
    Estimate first = smds(real_kernel(meas, config, pre), frame);
    merge_completion(first.diagnostics, pre);
    if (config.algorithm == Algorithm::Smds) return first;

    const NetworkGeometry estimated{frame.anchors, first.targets};
    const TrueParameters params = true_parameters(estimated, frame.edges);
    Diagnostics qpre = first.diagnostics;
    qpre.procrustes.reset();
    qpre.top_values.clear();
    const QuaternionMatrix k_q = quaternion_kernel(meas, quat_inputs_from_estimate(meas, params), config, qpre);
    Estimate out = run_quaternion_solver(k_q, frame, config);
    out.diagnostics.completion_iterations = qpre.completion_iterations;
    out.diagnostics.completion_converged = qpre.completion_converged;
    return out;
}

Estimate solve(const MeasurementSet& meas, const AnchorFrame& frame, const SolverConfig& config) {
    if (meas.size() != frame.edges.size()) {
        throw Error(ErrorCode::DimensionMismatch, "measurements and edge set disagree on M");
    }
    if (meas.scenario == Scenario::I) return scenario_one_pipeline(meas, frame, config);

    Diagnostics pre;
    if (config.algorithm == Algorithm::Smds) {
        Estimate out = smds(real_kernel(meas, config, pre), frame);
        merge_completion(out.diagnostics, pre);
        return out;
    }
    const QuaternionMatrix k_q = quaternion_kernel(meas, quat_inputs_from_measurements(meas), config, pre);
    Estimate out = run_quaternion_solver(k_q, frame, config);
    merge_completion(out.diagnostics, pre);
    return out;
}

}  // namespace qmds
