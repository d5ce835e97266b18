// Command-line front end: build / oracle / solve / reproduce.
//
// Flag precedence is defaults < preset (reproduce only) < explicit flags
// < config file, i.e. a config file passed with -c overrides everything.
// Exit status: 0 = ran and reported (warnings included), 2 = bad input or
// configuration, 3 = a requested computation exceeds the supported size,
// 1 = unexpected failure.

#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "vrpqaoa/pipeline.hpp"

namespace {

// One set of option pointers per subcommand so we can tell explicit flags
// from untouched defaults.
struct ConfigFlags {
    CLI::Option* instance = nullptr;
    CLI::Option* penalty = nullptr;
    CLI::Option* depth = nullptr;
    CLI::Option* optimizer = nullptr;
    CLI::Option* budget = nullptr;
    CLI::Option* starts = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* shots = nullptr;
    CLI::Option* objective_shots = nullptr;
    CLI::Option* top = nullptr;
    CLI::Option* beta_max = nullptr;
    CLI::Option* gamma_max = nullptr;
    CLI::Option* output_dir = nullptr;
    CLI::Option* config_file = nullptr;

    vrpqaoa::ExperimentConfig staging;  // filled by CLI11 during parse
    std::string config_path;
};

void add_config_flags(CLI::App& cmd, ConfigFlags& out) {
    ConfigFlags* f = &out;
    f->instance = cmd.add_option("-i,--instance", f->staging.instance_ref,
                                 "instance preset (vrp-4-2, vrp-5-2, vrp-5-3) or file path");
    f->penalty = cmd.add_option("-A,--penalty", f->staging.penalty, "constraint penalty; 0 picks n*max(w)");
    f->depth = cmd.add_option("-p,--depth", f->staging.depth, "number of alternating layers");
    f->optimizer = cmd.add_option("--optimizer", f->staging.optimizer, "nelder-mead or coordinate");
    f->budget = cmd.add_option("--budget", f->staging.budget,
                               "objective evaluations per start; -1 = 500*depth, 0 = no optimization");
    f->starts = cmd.add_option("--starts", f->staging.starts, "independent optimizer starts");
    f->seed = cmd.add_option("--seed", f->staging.seed, "seed for starts and sampling");
    f->shots = cmd.add_option("--shots", f->staging.shots, "samples for the reported histogram; 0 = exact");
    f->objective_shots = cmd.add_option("--objective-shots", f->staging.objective_shots,
                                        "samples per objective evaluation; 0 = exact expectation");
    f->top = cmd.add_option("-k,--top", f->staging.top_k, "histogram entries to report");
    f->beta_max = cmd.add_option("--beta-max", f->staging.beta_max, "mixer ramp peak; 0 picks pi/4");
    f->gamma_max =
        cmd.add_option("--gamma-max", f->staging.gamma_max, "phase ramp peak; 0 picks 2*pi/cost-spread");
    f->output_dir = cmd.add_option("-o,--output-dir", f->staging.output_dir, "artifact directory");
    f->config_file = cmd.add_option("-c,--config", f->config_path, "config file; overrides flags");
}

// Layer the parsed command line onto `config`: explicitly passed flags
// first, then the config file when one was given.
void overlay_flags(vrpqaoa::ExperimentConfig& config, const ConfigFlags& f) {
    if (f.instance->count()) config.instance_ref = f.staging.instance_ref;
    if (f.penalty->count()) config.penalty = f.staging.penalty;
    if (f.depth->count()) config.depth = f.staging.depth;
    if (f.optimizer->count()) config.optimizer = f.staging.optimizer;
    if (f.budget->count()) config.budget = f.staging.budget;
    if (f.starts->count()) config.starts = f.staging.starts;
    if (f.seed->count()) config.seed = f.staging.seed;
    if (f.shots->count()) config.shots = f.staging.shots;
    if (f.objective_shots->count()) config.objective_shots = f.staging.objective_shots;
    if (f.top->count()) config.top_k = f.staging.top_k;
    if (f.beta_max->count()) config.beta_max = f.staging.beta_max;
    if (f.gamma_max->count()) config.gamma_max = f.staging.gamma_max;
    if (f.output_dir->count()) config.output_dir = f.staging.output_dir;
    if (f.config_file->count()) {
        std::ifstream in(f.config_path);
        if (!in) throw vrpqaoa::parse_error("cannot open config file '" + f.config_path + "'");
        vrpqaoa::apply_config_text(config, in);
    }
}

int run_build_cmd(const vrpqaoa::ExperimentConfig& config) {
    const vrpqaoa::BuildSummary summary = vrpqaoa::run_build(config);
    vrpqaoa::render_build(std::cout, summary);
    vrpqaoa::write_build_artifacts(config, summary);
    std::cout << "wrote qubo.txt ising.txt to " << config.output_dir << "\n";
    return 0;
}

int run_oracle_cmd(const vrpqaoa::ExperimentConfig& config) {
    const vrpqaoa::OracleSummary summary = vrpqaoa::run_oracle(config);
    vrpqaoa::render_oracle(std::cout, summary);
    return 0;
}

int run_solve_cmd(const vrpqaoa::ExperimentConfig& config) {
    const vrpqaoa::SolveOutcome outcome = vrpqaoa::run_solve(config);
    std::ostringstream report;
    vrpqaoa::render_solve(report, config, outcome);
    std::cout << report.str();
    vrpqaoa::write_solve_artifacts(config, outcome, report.str());
    std::cout << "wrote report.txt histogram.txt trace.txt config.txt to " << config.output_dir << "\n";
    return 0;
}

int run_reproduce_cmd(const std::string& experiment, bool sweep, const ConfigFlags& flags) {
    vrpqaoa::ReproduceSettings settings = vrpqaoa::reproduce_settings(experiment);
    overlay_flags(settings.config, flags);
    if (sweep) settings.sweep_depths = vrpqaoa::default_sweep_depths();
    const vrpqaoa::ReproduceOutcome outcome = vrpqaoa::run_reproduce(settings);
    std::ostringstream report;
    vrpqaoa::render_reproduce(report, settings, outcome);
    std::cout << report.str();
    vrpqaoa::ExperimentConfig best_config = settings.config;
    best_config.depth = outcome.depths[outcome.best];
    vrpqaoa::write_solve_artifacts(best_config, outcome.runs[outcome.best], report.str());
    std::cout << "wrote report.txt histogram.txt trace.txt config.txt to " << settings.config.output_dir
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"QAOA workbench for small vehicle-routing instances"};
    app.require_subcommand(1);

    CLI::App* build = app.add_subcommand("build", "encode an instance as QUBO and Ising models");
    ConfigFlags build_flags;
    add_config_flags(*build, build_flags);

    CLI::App* oracle = app.add_subcommand("oracle", "exact classical answers for an instance");
    ConfigFlags oracle_flags;
    add_config_flags(*oracle, oracle_flags);

    CLI::App* solve = app.add_subcommand("solve", "optimize a schedule and report the distribution");
    ConfigFlags solve_flags;
    add_config_flags(*solve, solve_flags);

    CLI::App* reproduce = app.add_subcommand("reproduce", "run a bundled experiment preset");
    std::string experiment;
    reproduce->add_option("experiment", experiment, "exp1, exp2 or exp3")->required();
    bool sweep = false;
    reproduce->add_flag("--sweep", sweep, "scan depths 6..40 instead of the preset depth");
    ConfigFlags reproduce_flags;
    add_config_flags(*reproduce, reproduce_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (build->parsed()) {
            vrpqaoa::ExperimentConfig config;
            overlay_flags(config, build_flags);
            return run_build_cmd(config);
        }
        if (oracle->parsed()) {
            vrpqaoa::ExperimentConfig config;
            overlay_flags(config, oracle_flags);
            return run_oracle_cmd(config);
        }
        if (solve->parsed()) {
            vrpqaoa::ExperimentConfig config;
            overlay_flags(config, solve_flags);
            return run_solve_cmd(config);
        }
        if (reproduce->parsed()) return run_reproduce_cmd(experiment, sweep, reproduce_flags);
        return 2;
    } catch (const vrpqaoa::resource_error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 3;
    } catch (const vrpqaoa::parse_error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const vrpqaoa::validation_error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::domain_error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "unexpected error: " << err.what() << "\n";
        return 1;
    }
}
