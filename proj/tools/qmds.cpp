#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qmds/harness.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string scenario;
    std::string algorithms;
    std::vector<double> sigma_d;
    std::vector<double> epsilon;
    std::optional<double> missing;
    std::optional<int> trials;
    std::optional<int> tau_max;
    std::optional<unsigned> threads;
    bool timing = false;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream in(s);
    for (std::string item; std::getline(in, item, sep);)
        if (!item.empty()) parts.push_back(item);
    return parts;
}

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--out", o.out, "output CSV (default: stdout)");
    cmd->add_option("--scenario", o.scenario, "I, II, or I,II");
    cmd->add_option("--sigma-d", o.sigma_d, "distance noise grid, meters")->delimiter(',');
    cmd->add_option("--epsilon", o.epsilon, "bounding-angle grid, degrees (0 = noiseless)")->delimiter(',');
    cmd->add_option("--missing", o.missing, "fraction of GEK pairs removed");
    cmd->add_option("--trials", o.trials, "trials per cell");
    cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

qmds::ExperimentConfig build_config(const Overrides& o) {
    qmds::ExperimentConfig c = o.config_path.empty() ? qmds::default_config() : qmds::load_config(o.config_path);
    if (o.seed) c.master_seed = *o.seed;
    if (!o.scenario.empty()) {
        c.scenarios.clear();
        for (const std::string& s : split(o.scenario, ',')) {
            if (s == "I") c.scenarios.push_back(qmds::Scenario::I);
            else if (s == "II") c.scenarios.push_back(qmds::Scenario::II);
            else throw qmds::Error(qmds::ErrorCode::InvalidConfig, "unknown scenario '" + s + "'");
        }
    }
    if (!o.algorithms.empty()) {
        c.algorithms.clear();
        for (const std::string& s : split(o.algorithms, ',')) {
            const auto a = qmds::parse_algorithm(s);
            if (!a) throw qmds::Error(qmds::ErrorCode::InvalidConfig, "unknown algorithm '" + s + "'");
            c.algorithms.push_back(*a);
        }
    }
    if (!o.sigma_d.empty()) c.sigma_d_grid = o.sigma_d;
    if (!o.epsilon.empty()) c.epsilon_grid = o.epsilon;
    if (o.missing) c.missing_fraction = *o.missing;
    if (o.trials) c.trials = *o.trials;
    if (o.tau_max) c.tau_max = *o.tau_max;
    if (o.threads) c.threads = *o.threads;
    if (o.timing) c.timing = true;
    qmds::validate(c);
    return c;
}

template <typename Write>
void emit(const std::string& path, Write&& write) {
    if (path.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw qmds::Error(qmds::ErrorCode::Io, "cannot open " + path);
    write(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quaternion-domain Super MDS localization experiments"};
    app.require_subcommand(1);

    Overrides run_opts;
    CLI::App* run = app.add_subcommand("run", "Monte-Carlo grid over scenario, algorithm, sigma_d and epsilon");
    add_common(run, run_opts);
    run->add_option("--algorithms", run_opts.algorithms, "comma list of smds,qdsmds,mrc,mrciter");
    run->add_option("--tau-max", run_opts.tau_max, "iterative MRC updates");
    run->add_flag("--timing", run_opts.timing, "fill mean_wall_ms (makes output nondeterministic)");

    Overrides conv_opts;
    int conv_tau = 10;
    CLI::App* converge = app.add_subcommand("converge", "mean xi per iteration of the iterative MRC solver");
    add_common(converge, conv_opts);
    converge->add_option("--tau-max", conv_tau, "last iteration reported");

    std::string gek_out;
    Overrides gek_opts;
    std::string gek_domain = "quaternion";
    CLI::App* gek = app.add_subcommand("gek", "dump the GEK of one trial in the binary QGEK format");
    add_common(gek, gek_opts);
    gek->add_option("--domain", gek_domain, "real or quaternion")->check(CLI::IsMember({"real", "quaternion"}));
    gek->add_option("--file", gek_out, "output path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const qmds::ExperimentConfig c = build_config(run_opts);
            const qmds::ExperimentGrid grid = qmds::run_grid(c);
            emit(run_opts.out, [&](std::ostream& out) { qmds::write_csv(out, grid); });
        } else if (*converge) {
            qmds::ExperimentConfig c = build_config(conv_opts);
            if (conv_opts.scenario.empty()) c.scenarios = {qmds::Scenario::II};
            const auto rows = qmds::run_convergence(c, conv_tau);
            emit(conv_opts.out, [&](std::ostream& out) { qmds::write_convergence_csv(out, rows); });
        } else if (*gek) {
            qmds::ExperimentConfig c = build_config(gek_opts);
            if (gek_opts.scenario.empty()) c.scenarios = {qmds::Scenario::II};
            const qmds::AnchorFrame frame = qmds::AnchorFrame::make(c.anchors, c.n_targets);
            const qmds::TrialInstance inst = qmds::make_instance(c, frame, c.scenarios.front(), c.sigma_d_grid.front(),
                                                                 c.epsilon_grid.front(), 0);
            if (gek_domain == "real") {
                qmds::write_gek(gek_out, qmds::build_real_gek(inst.measurements).k);
            } else {
                qmds::write_gek(gek_out, qmds::build_quat_gek(qmds::quat_inputs_from_measurements(inst.measurements)).k);
            }
        }
    } catch (const qmds::Error& e) {
        std::cerr << "qmds: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
