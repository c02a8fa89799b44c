#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "support.hpp"

using namespace qmds;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Paired {
    int n = 0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double mean_diff = 0.0;  // a - b
    double se = 0.0;
};

Paired paired(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> d;
    Paired p;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (std::isnan(a[k]) || std::isnan(b[k])) continue;
        p.mean_a += a[k];
        p.mean_b += b[k];
        d.push_back(a[k] - b[k]);
    }
    p.n = static_cast<int>(d.size());
    if (p.n == 0) return p;
    p.mean_a /= p.n;
    p.mean_b /= p.n;
    for (double v : d) p.mean_diff += v;
    p.mean_diff /= p.n;
    double ss = 0.0;
    for (double v : d) ss += (v - p.mean_diff) * (v - p.mean_diff);
    p.se = p.n > 1 ? std::sqrt(ss / (p.n - 1) / p.n) : 0.0;
    return p;
}

ExperimentConfig base(int trials) {
    ExperimentConfig c = default_config();
    c.trials = trials;
    c.master_seed = 2024;
    return c;
}

const std::vector<double>& cell_xi(const ExperimentGrid& g, Scenario sc, Algorithm a, double s, double e) {
    const CellSummary* c = find_cell(g, sc, a, s, e);
    if (!c) throw std::runtime_error("missing grid cell");
    return c->xi;
}

Outcome qsvd_correctness() {
    Rng rng(101);
    std::uniform_int_distribution<int> size(1, 20);
    double worst_rec = 0.0, worst_sv = 0.0;
    for (int t = 0; t < 50; ++t) {
        const QuaternionMatrix q = test::random_quaternion_matrix(size(rng), size(rng), rng);
        const QsvdResult d = qsvd(q);
        worst_rec = std::max(worst_rec, test::relative_error(d.reconstruct(), q));
        const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXcd>(complex_adjoint(q)).singularValues();
        for (Index k = 0; k < d.singular_values.size(); ++k)
            worst_sv = std::max(worst_sv, std::abs(d.singular_values(k) - s(2 * k)));
    }
    return {worst_rec < 1e-8 && worst_sv < 1e-10,
            fmt("50 matrices: max reconstruction error %.3g, max singular value gap %.3g", worst_rec, worst_sv)};
}

Outcome rank_structure() {
    Rng rng(102);
    const EdgeSet e = edge_set(5, 15);
    double worst_r = 0.0, worst_q = 0.0, worst_top = 0.0;
    for (int t = 0; t < 100; ++t) {
        const NetworkGeometry g = test::random_room_geometry(rng);
        const TrueParameters truth = true_parameters(g, e);
        const MeasurementSet meas = test::noiseless_measurements(truth, Scenario::II);
        const Eigen::VectorXd sr = Eigen::JacobiSVD<Eigen::MatrixXd>(build_real_gek(meas).k).singularValues();
        worst_r = std::max(worst_r, sr(3) / sr(2));
        const QuaternionMatrix kq = build_quat_gek(quat_inputs_from_measurements(meas)).k;
        const QsvdResult d = qsvd(kq);
        worst_q = std::max(worst_q, d.singular_values(1) / d.singular_values(0));
        double sum_d2 = 0.0;
        for (const EdgeParameters& p : truth.edges) sum_d2 += p.distance * p.distance;
        worst_top = std::max(worst_top, std::abs(dominant_eigpair(kq).lambda - sum_d2) / sum_d2);
    }
    return {worst_r < 1e-10 && worst_q < 1e-10 && worst_top < 1e-10,
            fmt("100 geometries: max s4/s3 %.3g, max s2/s1 %.3g, max top-value error %.3g", worst_r, worst_q,
                worst_top)};
}

Outcome noiseless_recovery() {
    ExperimentConfig c = base(100);
    c.sigma_d_grid = {0.0};
    c.epsilon_grid = {0.0};
    const ExperimentGrid g = run_grid(c);
    double worst = 0.0;
    int failed = 0;
    for (const CellSummary& cell : g.cells) {
        failed += cell.trials_failed;
        for (double v : cell.xi)
            if (!std::isnan(v)) worst = std::max(worst, v);
    }
    return {failed == 0 && worst < 1e-6,
            fmt("100 instances x 2 scenarios x 4 algorithms: max xi %.3g m, failures %d", worst, failed)};
}

Outcome one_iteration_convergence() {
    ExperimentConfig c = base(200);
    c.scenarios = {Scenario::II};
    c.sigma_d_grid = {2.0, 4.0};
    c.epsilon_grid = {30.0};
    const auto rows = run_convergence(c, 5);
    bool pass = true;
    std::string detail;
    for (double s : c.sigma_d_grid) {
        const ConvergenceRow *r1 = nullptr, *r5 = nullptr;
        double max_residual = 0.0;
        for (const ConvergenceRow& r : rows) {
            if (r.sigma_d != s) continue;
            if (r.tau == 1) {
                r1 = &r;
                max_residual = r.max_fixed_point_residual;
            }
            if (r.tau == 5) r5 = &r;
        }
        const double rel = std::abs(r1->mean_xi - r5->mean_xi) / r5->mean_xi;
        // ‖ν^(2) - ν^(1)‖ / ‖ν^(1)‖ is the residual recorded at τ = 2
        double step2 = 0.0;
        for (const ConvergenceRow& r : rows)
            if (r.sigma_d == s && r.tau == 2) step2 = r.max_fixed_point_residual;
        pass = pass && rel <= 0.01 && step2 < 1e-6;
        detail += fmt("sigma %g: xi(1) %.4f xi(5) %.4f rel %.4f, max residual tau1 %.3g tau2 %.3g; ", s, r1->mean_xi,
                      r5->mean_xi, rel, max_residual, step2);
    }
    return {pass, detail};
}

Outcome large_angle_superiority() {
    ExperimentConfig c = base(200);
    c.sigma_d_grid = {1.0, 2.0, 3.0};
    c.epsilon_grid = {50.0};
    c.algorithms = {Algorithm::Smds, Algorithm::QdSmds};
    const ExperimentGrid g = run_grid(c);
    bool pass = true;
    std::string detail;
    for (Scenario sc : c.scenarios)
        for (double s : c.sigma_d_grid) {
            const Paired p = paired(cell_xi(g, sc, Algorithm::Smds, s, 50.0), cell_xi(g, sc, Algorithm::QdSmds, s, 50.0));
            const bool ok = p.mean_b < p.mean_a && p.mean_diff > 2.0 * p.se;
            pass = pass && ok;
            detail += fmt("%s sigma %g: smds %.4f qdsmds %.4f diff %.4f se %.4f n %d %s; ", to_string(sc), s, p.mean_a,
                          p.mean_b, p.mean_diff, p.se, p.n, ok ? "ok" : "FAIL");
        }
    return {pass, detail};
}

Outcome small_angle_crossover() {
    ExperimentConfig c = base(200);
    c.scenarios = {Scenario::I};
    c.sigma_d_grid = {3.0};
    c.epsilon_grid = {10.0};
    c.algorithms = {Algorithm::Smds, Algorithm::QdSmds};
    const ExperimentGrid g = run_grid(c);
    const Paired p = paired(cell_xi(g, Scenario::I, Algorithm::Smds, 3.0, 10.0),
                            cell_xi(g, Scenario::I, Algorithm::QdSmds, 3.0, 10.0));
    return {p.mean_a <= p.mean_b, fmt("smds %.4f qdsmds %.4f over %d paired trials", p.mean_a, p.mean_b, p.n)};
}

Outcome mrc_family_gap() {
    ExperimentConfig c = base(500);
    c.scenarios = {Scenario::II};
    c.sigma_d_grid = {2.0};
    c.epsilon_grid = {50.0};
    c.algorithms = {Algorithm::QdMrcIter, Algorithm::QdSmds};
    const ExperimentGrid g = run_grid(c);
    const Paired p = paired(cell_xi(g, Scenario::II, Algorithm::QdMrcIter, 2.0, 50.0),
                            cell_xi(g, Scenario::II, Algorithm::QdSmds, 2.0, 50.0));
    return {std::abs(p.mean_diff) <= 0.05 + 2.0 * p.se,
            fmt("mrciter %.4f qdsmds %.4f |diff| %.4f bound %.4f n %d", p.mean_a, p.mean_b, std::abs(p.mean_diff),
                0.05 + 2.0 * p.se, p.n)};
}

Outcome noise_statistics() {
    Rng rng(108);
    bool pass = true;
    std::string detail;
    const int n = 1000000;
    for (auto [d, s] : {std::pair{10.0, 2.0}, {5.0, 1.0}}) {
        double sum = 0.0, sum2 = 0.0;
        for (int k = 0; k < n; ++k) {
            const double x = sample_distance(d, s, rng);
            sum += x;
            sum2 += x * x;
        }
        const double mean = sum / n, var = sum2 / n - mean * mean;
        const double em = std::abs(mean - d) / d, ev = std::abs(var - s * s) / (s * s);
        pass = pass && em <= 0.02 && ev <= 0.02;
        detail += fmt("gamma(%g,%g) mean err %.4f var err %.4f; ", d, s, em, ev);
    }
    std::vector<double> a(static_cast<std::size_t>(n));
    for (double e : {10.0, 20.0, 30.0, 40.0, 50.0}) {
        const double rho = epsilon_to_rho(e);
        for (double& v : a) v = std::abs(sample_tikhonov(rho, rng));
        const auto k = static_cast<std::size_t>(0.9 * n);
        std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k), a.end());
        const double got = a[k] * 180.0 / std::numbers::pi;
        pass = pass && std::abs(got - e) <= 1.0;
        detail += fmt("eps %g -> %.3f; ", e, got);
    }
    return {pass, detail};
}

Outcome missing_data() {
    ExperimentConfig exact = base(20);
    exact.scenarios = {Scenario::II};
    exact.sigma_d_grid = {0.0};
    exact.epsilon_grid = {0.0};
    exact.algorithms = {Algorithm::QdSmds};
    exact.missing_fraction = 0.3;
    const ExperimentGrid ge = run_grid(exact);
    double worst = 0.0;
    for (double v : ge.cells.front().xi) worst = std::isnan(v) ? INFINITY : std::max(worst, v);

    ExperimentConfig c = base(200);
    c.scenarios = {Scenario::II};
    c.sigma_d_grid = {2.0};
    c.epsilon_grid = {50.0};
    c.algorithms = {Algorithm::Smds, Algorithm::QdSmds};
    c.missing_fraction = 0.3;
    const ExperimentGrid g = run_grid(c);
    const Paired p = paired(cell_xi(g, Scenario::II, Algorithm::Smds, 2.0, 50.0),
                            cell_xi(g, Scenario::II, Algorithm::QdSmds, 2.0, 50.0));
    return {worst < 1e-2 && p.mean_b < p.mean_a,
            fmt("noiseless max xi %.3g m over 20 trials; noisy smds %.4f qdsmds %.4f over %d paired trials", worst,
                p.mean_a, p.mean_b, p.n)};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "qmds_acceptance";
    std::filesystem::create_directories(dir);
    const auto cfg = dir / "config.json";
    std::ofstream(cfg) << R"({"trials": 5, "sigma_d_grid": [1, 3], "epsilon_grid": [0, 30],
  "missing_fraction": 0.1, "master_seed": 77})";
    const auto a = dir / "a.csv", b = dir / "b.csv";
    std::filesystem::remove(a);
    std::filesystem::remove(b);
    const std::string cmd = std::string(QMDS_CLI) + " run --config " + cfg.string() + " --seed 9 --out ";
    const int ra = std::system((cmd + a.string()).c_str());
    const int rb = std::system((cmd + b.string() + " --threads 1").c_str());
    const std::string sa = slurp(a), sb = slurp(b);
    const bool pass = ra == 0 && rb == 0 && !sa.empty() && sa == sb;
    return {pass, fmt("exit codes %d/%d, %zu and %zu bytes, identical %s", ra, rb, sa.size(), sb.size(),
                      sa == sb ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::vector<int> selected;
    app.add_option("--criterion", selected, "criteria to run (default: all)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    const std::map<int, std::pair<const char*, std::function<Outcome()>>> checks{
        {1, {"qsvd correctness", qsvd_correctness}},
        {2, {"noiseless rank structure", rank_structure}},
        {3, {"noiseless exact recovery", noiseless_recovery}},
        {4, {"one-iteration convergence", one_iteration_convergence}},
        {5, {"large-angle superiority", large_angle_superiority}},
        {6, {"small-angle crossover", small_angle_crossover}},
        {7, {"MRC family gap", mrc_family_gap}},
        {8, {"noise-model statistics", noise_statistics}},
        {9, {"missing-data pipeline", missing_data}},
        {10, {"determinism", determinism}},
    };
    if (selected.empty())
        for (const auto& [k, v] : checks) selected.push_back(k);

    bool all = true;
    for (int k : selected) {
        const auto& [name, run] = checks.at(k);
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        std::printf("criterion %d %s: %s | %s\n", k, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
