#include "qmds/harness.hpp"

#include <json.hpp>

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace qmds {

namespace {

using nlohmann::json;

constexpr int kMaxResamples = 1000;

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
}

std::string format_number(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct MeanStd {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double std = std::numeric_limits<double>::quiet_NaN();
    int n = 0;
};

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd out;
    double sum = 0.0;
    for (double v : values) {
        if (std::isnan(v)) continue;
        sum += v;
        ++out.n;
    }
    if (out.n == 0) return out;
    out.mean = sum / out.n;
    if (out.n < 2) {
        out.std = 0.0;
        return out;
    }
    double ss = 0.0;
    for (double v : values)
        if (!std::isnan(v)) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / (out.n - 1));
    return out;
}

[[noreturn]] void bad_config(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

Scenario parse_scenario(const std::string& s) {
    if (s == "I" || s == "1") return Scenario::I;
    if (s == "II" || s == "2") return Scenario::II;
    bad_config("unknown scenario '" + s + "'");
}

}  // namespace

ExperimentConfig default_config() {
    ExperimentConfig c;
    c.anchors.resize(5, 3);
    c.anchors << 0, 0, 10,
                 30, 0, 10,
                 30, 30, 10,
                 0, 30, 10,
                 0, 0, 0;
    for (int k = 1; k <= 20; ++k) c.sigma_d_grid.push_back(k / 5.0);
    c.epsilon_grid = {10, 20, 30, 40, 50};
    return c;
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        bad_config(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) bad_config("config must be a JSON object");

    ExperimentConfig c = default_config();
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "room") {
                if (value.is_array()) {
                    c.room = {value.at(0).get<double>(), value.at(1).get<double>(), value.at(2).get<double>()};
                } else {
                    c.room = {value.value("length", c.room.length), value.value("width", c.room.width),
                              value.value("height", c.room.height)};
                }
            } else if (key == "anchors") {
                c.anchors.resize(static_cast<Index>(value.size()), 3);
                for (std::size_t a = 0; a < value.size(); ++a) {
                    if (value[a].size() != 3) bad_config("anchor positions need 3 coordinates");
                    for (int d = 0; d < 3; ++d) c.anchors(static_cast<Index>(a), d) = value[a][static_cast<std::size_t>(d)].get<double>();
                }
            } else if (key == "n_targets") {
                c.n_targets = value.get<Index>();
            } else if (key == "sigma_d_grid") {
                c.sigma_d_grid = value.get<std::vector<double>>();
            } else if (key == "epsilon_grid") {
                c.epsilon_grid = value.get<std::vector<double>>();
            } else if (key == "scenarios") {
                c.scenarios.clear();
                for (const auto& s : value) c.scenarios.push_back(parse_scenario(s.get<std::string>()));
            } else if (key == "algorithms") {
                c.algorithms.clear();
                for (const auto& s : value) {
                    const auto a = parse_algorithm(s.get<std::string>());
                    if (!a) bad_config("unknown algorithm '" + s.get<std::string>() + "'");
                    c.algorithms.push_back(*a);
                }
            } else if (key == "trials") {
                c.trials = value.get<int>();
            } else if (key == "missing_fraction") {
                c.missing_fraction = value.get<double>();
            } else if (key == "tau_max") {
                c.tau_max = value.get<int>();
            } else if (key == "master_seed") {
                c.master_seed = value.get<std::uint64_t>();
            } else if (key == "threads") {
                c.threads = value.get<unsigned>();
            } else if (key == "timing") {
                c.timing = value.get<bool>();
            } else {
                bad_config("unknown config key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        bad_config(std::string("bad config value: ") + e.what());
    }
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void validate(const ExperimentConfig& c) {
    if (!(c.room.length > 0 && c.room.width > 0 && c.room.height > 0)) bad_config("room dimensions must be positive");
    if (c.anchors.rows() < 2) bad_config("at least 2 anchors are needed");
    if (c.n_targets < 1) bad_config("n_targets must be at least 1");
    if (c.sigma_d_grid.empty() || c.epsilon_grid.empty()) bad_config("sigma_d_grid and epsilon_grid must be non-empty");
    for (double s : c.sigma_d_grid)
        if (!(s >= 0.0) || !std::isfinite(s)) bad_config("sigma_d must be finite and non-negative");
    for (double e : c.epsilon_grid)
        if (!(e >= 0.0 && e < 162.0)) bad_config("epsilon must lie in [0, 162) degrees");
    if (c.scenarios.empty() || c.algorithms.empty()) bad_config("scenarios and algorithms must be non-empty");
    if (c.trials < 1) bad_config("trials must be at least 1");
    if (!(c.missing_fraction >= 0.0 && c.missing_fraction < 1.0)) bad_config("missing_fraction must lie in [0, 1)");
    if (c.tau_max < 0) bad_config("tau_max must be non-negative");
}

double metric_xi(const Points& estimate, const Points& truth) {
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
        throw Error(ErrorCode::ShapeMismatch, "estimate and truth have different shapes");
    }
    if (truth.rows() == 0) throw Error(ErrorCode::ShapeMismatch, "no targets");
    return (estimate - truth).norm() / static_cast<double>(truth.rows());
}

Rng trial_rng(std::uint64_t master_seed, Scenario scenario, double sigma_d, double epsilon_deg, int trial) {
    const auto sigma_bits = std::bit_cast<std::uint64_t>(sigma_d);
    const auto eps_bits = std::bit_cast<std::uint64_t>(epsilon_deg);
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(scenario),     static_cast<std::uint32_t>(sigma_bits),
                      static_cast<std::uint32_t>(sigma_bits >> 32), static_cast<std::uint32_t>(eps_bits),
                      static_cast<std::uint32_t>(eps_bits >> 32),   static_cast<std::uint32_t>(trial)};
    return Rng(seq);
}

NoiseConfig noise_for(double sigma_d, double epsilon_deg) {
    return {sigma_d, epsilon_deg};
}

TrialInstance make_instance(const ExperimentConfig& config, const AnchorFrame& frame, Scenario scenario,
                            double sigma_d, double epsilon_deg, int trial) {
    Rng rng = trial_rng(config.master_seed, scenario, sigma_d, epsilon_deg, trial);
    std::uniform_real_distribution<double> ux(0.0, config.room.length), uy(0.0, config.room.width),
        uz(0.0, config.room.height);

    TrialInstance inst;
    inst.geometry.anchors = frame.anchors;
    for (int attempt = 0;; ++attempt) {
        if (attempt == kMaxResamples) throw Error(ErrorCode::DegenerateEdge, "could not draw a non-degenerate network");
        Points targets(frame.n_targets(), 3);
        for (Index t = 0; t < targets.rows(); ++t) {
            targets(t, 0) = ux(rng);
            targets(t, 1) = uy(rng);
            targets(t, 2) = uz(rng);
        }
        inst.geometry.targets = targets;
        inst.truth = true_parameters(inst.geometry, frame.edges);
        try {
            require_nondegenerate(inst.truth, frame.edges);
            break;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateEdge) throw;
        }
    }
    inst.measurements = synthesize(inst.truth, noise_for(sigma_d, epsilon_deg), scenario, rng);
    if (config.missing_fraction > 0.0) inst.measurements.mask = missing_mask(inst.truth.size(), config.missing_fraction, rng);
    return inst;
}

SolverConfig solver_config(const ExperimentConfig& config, Algorithm algorithm) {
    SolverConfig s;
    s.algorithm = algorithm;
    s.tau_max = config.tau_max;
    return s;
}

namespace {

TrialResult evaluate(const ExperimentConfig& config, const AnchorFrame& frame, const TrialInstance& inst,
                     Scenario scenario, Algorithm algorithm, double sigma_d, double epsilon_deg, int trial) {
    TrialResult r;
    r.scenario = scenario;
    r.algorithm = algorithm;
    r.sigma_d = sigma_d;
    r.epsilon = epsilon_deg;
    r.trial_index = trial;
    const auto start = std::chrono::steady_clock::now();
    try {
        const Estimate est = solve(inst.measurements, frame, solver_config(config, algorithm));
        r.xi = metric_xi(est.targets, inst.geometry.targets);
        r.iterations = est.diagnostics.iterations + est.diagnostics.completion_iterations;
        r.ok = std::isfinite(r.xi);
        if (!r.ok) r.error = "non-finite estimate";
    } catch (const Error& e) {
        r.error = e.what();
    }
    if (config.timing) {
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    return r;
}

}  // namespace

TrialResult run_trial(const ExperimentConfig& config, const AnchorFrame& frame, Scenario scenario,
                      Algorithm algorithm, double sigma_d, double epsilon_deg, int trial) {
    const TrialInstance inst = make_instance(config, frame, scenario, sigma_d, epsilon_deg, trial);
    return evaluate(config, frame, inst, scenario, algorithm, sigma_d, epsilon_deg, trial);
}

std::vector<TrialResult> run_paired(const ExperimentConfig& config, const AnchorFrame& frame, Scenario scenario,
                                    double sigma_d, double epsilon_deg, int trial) {
    std::vector<TrialResult> out;
    std::optional<TrialInstance> inst;
    std::string failure;
    try {
        inst = make_instance(config, frame, scenario, sigma_d, epsilon_deg, trial);
    } catch (const Error& e) {
        failure = e.what();
    }
    for (Algorithm a : config.algorithms) {
        if (inst) {
            out.push_back(evaluate(config, frame, *inst, scenario, a, sigma_d, epsilon_deg, trial));
        } else {
            TrialResult r;
            r.scenario = scenario;
            r.algorithm = a;
            r.sigma_d = sigma_d;
            r.epsilon = epsilon_deg;
            r.trial_index = trial;
            r.error = failure;
            out.push_back(r);
        }
    }
    return out;
}

ExperimentGrid run_grid(const ExperimentConfig& config) {
    validate(config);
    const AnchorFrame frame = AnchorFrame::make(config.anchors, config.n_targets);

    const std::size_t n_sc = config.scenarios.size(), n_s = config.sigma_d_grid.size(),
                      n_e = config.epsilon_grid.size(), n_t = static_cast<std::size_t>(config.trials),
                      n_a = config.algorithms.size();
    const std::size_t tasks = n_sc * n_s * n_e * n_t;
    std::vector<std::vector<TrialResult>> results(tasks);

    parallel_for(tasks, config.threads, [&](std::size_t k) {
        const std::size_t trial = k % n_t;
        const std::size_t e = (k / n_t) % n_e;
        const std::size_t s = (k / (n_t * n_e)) % n_s;
        const std::size_t sc = k / (n_t * n_e * n_s);
        results[k] = run_paired(config, frame, config.scenarios[sc], config.sigma_d_grid[s], config.epsilon_grid[e],
                                static_cast<int>(trial));
    });

    ExperimentGrid grid;
    grid.timing = config.timing;
    for (std::size_t sc = 0; sc < n_sc; ++sc) {
        for (std::size_t a = 0; a < n_a; ++a) {
            for (std::size_t s = 0; s < n_s; ++s) {
                for (std::size_t e = 0; e < n_e; ++e) {
                    CellSummary cell;
                    cell.scenario = config.scenarios[sc];
                    cell.algorithm = config.algorithms[a];
                    cell.sigma_d = config.sigma_d_grid[s];
                    cell.epsilon = config.epsilon_grid[e];
                    cell.missing_fraction = config.missing_fraction;
                    std::vector<double> iters, wall;
                    for (std::size_t t = 0; t < n_t; ++t) {
                        const TrialResult& r = results[((sc * n_s + s) * n_e + e) * n_t + t][a];
                        const double nan = std::numeric_limits<double>::quiet_NaN();
                        cell.xi.push_back(r.ok ? r.xi : nan);
                        iters.push_back(r.ok ? r.iterations : nan);
                        wall.push_back(r.ok ? r.wall_ms : nan);
                        (r.ok ? cell.trials_ok : cell.trials_failed)++;
                    }
                    const MeanStd xi = mean_std(cell.xi);
                    cell.mean_xi = xi.mean;
                    cell.std_xi = xi.std;
                    cell.mean_iterations = mean_std(iters).mean;
                    cell.mean_wall_ms = config.timing ? mean_std(wall).mean : std::numeric_limits<double>::quiet_NaN();
                    grid.cells.push_back(std::move(cell));
                }
            }
        }
    }
    return grid;
}

const CellSummary* find_cell(const ExperimentGrid& grid, Scenario scenario, Algorithm algorithm, double sigma_d,
                             double epsilon_deg) {
    for (const CellSummary& c : grid.cells)
        if (c.scenario == scenario && c.algorithm == algorithm && c.sigma_d == sigma_d && c.epsilon == epsilon_deg)
            return &c;
    return nullptr;
}

void write_csv(std::ostream& out, const ExperimentGrid& grid) {
    out << "scenario,algorithm,sigma_d_m,epsilon_deg,missing_fraction,trials_ok,trials_failed,mean_xi_m,std_xi_m,"
           "mean_iterations,mean_wall_ms\n";
    for (const CellSummary& c : grid.cells) {
        out << to_string(c.scenario) << ',' << to_string(c.algorithm) << ',' << format_number(c.sigma_d) << ','
            << format_number(c.epsilon) << ',' << format_number(c.missing_fraction) << ',' << c.trials_ok << ','
            << c.trials_failed << ',' << format_number(c.mean_xi) << ',' << format_number(c.std_xi) << ','
            << format_number(c.mean_iterations) << ',' << format_number(c.mean_wall_ms) << '\n';
    }
    if (!out) throw Error(ErrorCode::Io, "failed writing CSV");
}

void write_csv(const std::filesystem::path& path, const ExperimentGrid& grid) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string());
    write_csv(out, grid);
}

std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& config, int tau_max) {
    validate(config);
    if (tau_max < 0) bad_config("tau_max must be non-negative");
    const AnchorFrame frame = AnchorFrame::make(config.anchors, config.n_targets);
    SolverConfig solver = solver_config(config, Algorithm::QdMrcIter);
    solver.tau_max = tau_max;
    solver.keep_trace = true;

    const std::size_t n_sc = config.scenarios.size(), n_s = config.sigma_d_grid.size(),
                      n_e = config.epsilon_grid.size(), n_t = static_cast<std::size_t>(config.trials);
    const std::size_t tasks = n_sc * n_s * n_e * n_t;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    // Per task: ξ and fixed-point residual for each τ.
    std::vector<std::vector<std::pair<double, double>>> results(tasks);

    parallel_for(tasks, config.threads, [&](std::size_t k) {
        const std::size_t trial = k % n_t;
        const std::size_t e = (k / n_t) % n_e;
        const std::size_t s = (k / (n_t * n_e)) % n_s;
        const std::size_t sc = k / (n_t * n_e * n_s);
        auto& row = results[k];
        row.assign(static_cast<std::size_t>(tau_max) + 1, {nan, nan});
        try {
            const TrialInstance inst = make_instance(config, frame, config.scenarios[sc], config.sigma_d_grid[s],
                                                     config.epsilon_grid[e], static_cast<int>(trial));
            const Estimate est = solve(inst.measurements, frame, solver);
            for (std::size_t tau = 0; tau < row.size(); ++tau) {
                row[tau].first = metric_xi(est.diagnostics.target_trace[tau], inst.geometry.targets);
                if (tau > 0) row[tau].second = est.diagnostics.fixed_point_residuals[tau - 1];
            }
        } catch (const Error&) {
        }
    });

    std::vector<ConvergenceRow> rows;
    for (std::size_t sc = 0; sc < n_sc; ++sc) {
        for (std::size_t s = 0; s < n_s; ++s) {
            for (std::size_t e = 0; e < n_e; ++e) {
                for (int tau = 0; tau <= tau_max; ++tau) {
                    ConvergenceRow r;
                    r.scenario = config.scenarios[sc];
                    r.sigma_d = config.sigma_d_grid[s];
                    r.epsilon = config.epsilon_grid[e];
                    r.tau = tau;
                    std::vector<double> res;
                    for (std::size_t t = 0; t < n_t; ++t) {
                        const auto& [xi, fp] = results[((sc * n_s + s) * n_e + e) * n_t + t][static_cast<std::size_t>(tau)];
                        r.xi.push_back(xi);
                        res.push_back(fp);
                    }
                    const MeanStd m = mean_std(r.xi);
                    r.trials_ok = m.n;
                    r.mean_xi = m.mean;
                    r.std_xi = m.std;
                    r.mean_fixed_point_residual = mean_std(res).mean;
                    r.max_fixed_point_residual = nan;
                    for (double v : res)
                        if (!std::isnan(v) && !(v <= r.max_fixed_point_residual)) r.max_fixed_point_residual = v;
                    rows.push_back(std::move(r));
                }
            }
        }
    }
    return rows;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
    out << "scenario,sigma_d_m,epsilon_deg,tau,trials_ok,mean_xi_m,std_xi_m,mean_fixed_point_residual,"
           "max_fixed_point_residual\n";
    for (const ConvergenceRow& r : rows) {
        out << to_string(r.scenario) << ',' << format_number(r.sigma_d) << ',' << format_number(r.epsilon) << ','
            << r.tau << ',' << r.trials_ok << ',' << format_number(r.mean_xi) << ',' << format_number(r.std_xi) << ','
            << format_number(r.mean_fixed_point_residual) << ',' << format_number(r.max_fixed_point_residual) << '\n';
    }
    if (!out) throw Error(ErrorCode::Io, "failed writing CSV");
}

}  // namespace qmds
