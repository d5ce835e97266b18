#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "vrpqaoa/pipeline.hpp"

using namespace vrpqaoa;

namespace {

std::filesystem::path fresh_dir(const std::string& leaf) {
    auto dir = std::filesystem::temp_directory_path() / leaf;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& file) {
    std::ifstream in(file);
    REQUIRE(in);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

bool has_line_starting(const std::string& text, const std::string& prefix) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(prefix, 0) == 0) return true;
    return false;
}

// Spawns the installed command-line binary and returns its exit status.
int run_cli(const std::string& args) {
    const std::string cmd = std::string(VRPQAOA_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("experiment configuration", "[pipeline]") {
    SECTION("defaults validate") {
        ExperimentConfig config;
        CHECK_NOTHROW(validate_config(config));
    }

    SECTION("rejections") {
        auto broken = [](auto&& tweak) {
            ExperimentConfig config;
            tweak(config);
            return config;
        };
        CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.depth = 0; })), validation_error);
        CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.starts = 0; })), validation_error);
        CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.top_k = 0; })), validation_error);
        CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.budget = -2; })), validation_error);
        CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.penalty = -1.0; })), validation_error);
        CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.beta_max = -0.5; })), validation_error);
        CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.optimizer = "cobyla"; })), validation_error);
    }

    SECTION("text round-trip preserves every field") {
        ExperimentConfig config;
        config.instance_ref = "vrp-5-3";
        config.penalty = 321.5;
        config.depth = 7;
        config.optimizer = "coordinate";
        config.budget = 123;
        config.starts = 3;
        config.seed = 987654321;
        config.shots = 0;
        config.objective_shots = 64;
        config.top_k = 5;
        config.beta_max = 0.5;
        config.gamma_max = 0.125;
        config.output_dir = "runs/a";

        std::ostringstream out;
        write_experiment_config(out, config);
        ExperimentConfig back = parse_experiment_config(out.str());
        CHECK(back.instance_ref == config.instance_ref);
        CHECK(back.penalty == config.penalty);
        CHECK(back.depth == config.depth);
        CHECK(back.optimizer == config.optimizer);
        CHECK(back.budget == config.budget);
        CHECK(back.starts == config.starts);
        CHECK(back.seed == config.seed);
        CHECK(back.shots == config.shots);
        CHECK(back.objective_shots == config.objective_shots);
        CHECK(back.top_k == config.top_k);
        CHECK(back.beta_max == config.beta_max);
        CHECK(back.gamma_max == config.gamma_max);
        CHECK(back.output_dir == config.output_dir);
    }

    SECTION("a document only touches the keys it names") {
        ExperimentConfig config;
        config.depth = 9;
        config.seed = 42;
        std::istringstream in("# comment\nbudget 11\nshots 500\n");
        apply_config_text(config, in);
        CHECK(config.budget == 11);
        CHECK(config.shots == 500);
        CHECK(config.depth == 9);
        CHECK(config.seed == 42);
        CHECK(config.instance_ref == "vrp-4-2");
    }

    SECTION("parse failures") {
        CHECK_THROWS_AS(parse_experiment_config("frobnicate 3"), parse_error);
        CHECK_THROWS_AS(parse_experiment_config("depth"), parse_error);
        CHECK_THROWS_AS(parse_experiment_config("depth twelve"), parse_error);
        CHECK_THROWS_AS(parse_experiment_config("seed -4"), parse_error);
        CHECK_THROWS_AS(parse_experiment_config("penalty 3.5.1"), parse_error);
    }
}

TEST_CASE("build pipeline", "[pipeline]") {
    SECTION("first instance shape") {
        ExperimentConfig config;
        BuildSummary summary = run_build(config);
        CHECK(summary.qubo.num_vars == 12);
        CHECK(summary.ising.num_spins == 12);
        // two variables couple iff they share a degree equation:
        // 2 * n * C(n-1, 2) pairs
        CHECK(summary.ising.couplings.size() == 24);
        CHECK_THAT(summary.penalty, Catch::Matchers::WithinRel(summary.instance.default_penalty(), 1e-15));
    }

    SECTION("five-node instances have twenty variables and sixty couplings") {
        for (const char* ref : {"vrp-5-2", "vrp-5-3"}) {
            ExperimentConfig config;
            config.instance_ref = ref;
            BuildSummary summary = run_build(config);
            CHECK(summary.qubo.num_vars == 20);
            CHECK(summary.ising.couplings.size() == 60);
        }
    }

    SECTION("explicit penalty wins over the automatic one") {
        ExperimentConfig config;
        config.penalty = 400.0;
        BuildSummary summary = run_build(config);
        CHECK(summary.penalty == 400.0);
        CHECK(summary.qubo.penalty == 400.0);
    }

    SECTION("render carries the headline numbers") {
        ExperimentConfig config;
        std::ostringstream out;
        render_build(out, run_build(config));
        CHECK(has_line_starting(out.str(), "instance 4 nodes 2 vehicles"));
        CHECK(has_line_starting(out.str(), "variables 12"));
        CHECK(has_line_starting(out.str(), "coupling-terms 24"));
    }
}

TEST_CASE("oracle pipeline", "[pipeline]") {
    SECTION("first instance: both optima coincide") {
        ExperimentConfig config;
        OracleSummary summary = run_oracle(config);
        CHECK_THAT(summary.ground.minimum, Catch::Matchers::WithinAbs(124.871, 1e-3));
        CHECK(summary.ground.argmin == std::vector<std::uint64_t>{779, 2125});
        CHECK_THAT(summary.route_optimal.cost, Catch::Matchers::WithinAbs(124.871, 1e-3));
        CHECK(!summary.gap);

        std::ostringstream out;
        render_oracle(out, summary);
        CHECK(has_line_starting(out.str(), "ground-state"));
        CHECK(has_line_starting(out.str(), "route-optimal"));
        CHECK(!has_line_starting(out.str(), "WARN"));
    }

    SECTION("second instance: encoding prefers a depot-free subtour") {
        ExperimentConfig config;
        config.instance_ref = "vrp-5-2";
        OracleSummary summary = run_oracle(config);
        CHECK(summary.gap);
        CHECK_THAT(summary.degree_feasible.cost, Catch::Matchers::WithinAbs(128.545, 1e-3));
        CHECK_THAT(summary.route_optimal.cost, Catch::Matchers::WithinAbs(138.511, 1e-3));
        CHECK(summary.degree_feasible.cost < summary.route_optimal.cost);

        std::ostringstream out;
        render_oracle(out, summary);
        CHECK(has_line_starting(out.str(), "WARN degree-feasible minimum"));
    }
}

TEST_CASE("solve pipeline", "[pipeline]") {
    SECTION("zero budget reports the uniform state") {
        ExperimentConfig config;
        config.depth = 1;
        config.budget = 0;
        config.shots = 0;
        SolveOutcome outcome = run_solve(config);

        const auto ising = qubo_to_ising(build_qubo_closed_form(resolve_instance("vrp-4-2"),
                                                                outcome.penalty));
        const auto diag = build_cost_diagonal(ising);
        detail::CompensatedSum mean;
        for (double v : diag.values) mean.add(v);
        const double diagonal_mean = mean.value() / static_cast<double>(diag.values.size());

        CHECK_THAT(outcome.final_expectation, Catch::Matchers::WithinRel(diagonal_mean, 1e-12));
        CHECK_THAT(outcome.uniform_expectation, Catch::Matchers::WithinRel(diagonal_mean, 1e-12));
        CHECK(outcome.evaluations == 0);
        CHECK(outcome.schedule.betas == std::vector<double>{0.0});
        CHECK(outcome.schedule.gammas == std::vector<double>{0.0});
        for (const auto& entry : outcome.top)
            CHECK_THAT(entry.probability, Catch::Matchers::WithinRel(1.0 / 4096.0, 1e-9));
    }

    SECTION("report invariants at a small depth") {
        ExperimentConfig config;
        config.depth = 2;
        config.budget = 40;
        config.starts = 2;
        config.shots = 0;
        SolveOutcome outcome = run_solve(config);

        CHECK(outcome.final_expectation < outcome.uniform_expectation);
        CHECK(outcome.final_expectation >= outcome.ground.minimum - 1e-6);
        CHECK(outcome.evaluations <= 40);
        CHECK(outcome.start_values.size() == 2);
        CHECK(outcome.top.size() == 12);

        double mass = 0.0;
        for (std::size_t e = 0; e < outcome.top.size(); ++e) {
            const auto& entry = outcome.top[e];
            CHECK(entry.probability >= 0.0);
            CHECK(entry.probability <= 1.0);
            if (e) CHECK(entry.probability <= outcome.top[e - 1].probability + 1e-15);
            mass += entry.probability;
            Configuration decoded(4, entry.index);
            CHECK(entry.bitstring == decoded.bitstring());
            CHECK_THAT(entry.cost, Catch::Matchers::WithinAbs(route_cost(decoded, outcome.instance), 1e-12));
        }
        CHECK(mass <= 1.0 + 1e-9);
        CHECK(outcome.optimal_mass <= 1.0 + 1e-9);

        CHECK(!outcome.trace.empty());
        CHECK(outcome.trace.back().best == outcome.final_expectation);
    }

    SECTION("rendering the same outcome twice is byte-identical") {
        ExperimentConfig config;
        config.depth = 1;
        config.budget = 12;
        config.starts = 1;
        SolveOutcome first = run_solve(config);
        SolveOutcome second = run_solve(config);
        std::ostringstream a, b;
        render_solve(a, config, first);
        render_solve(b, config, second);
        CHECK(a.str() == b.str());
    }

    SECTION("sampled histogram probabilities are counts over shots") {
        ExperimentConfig config;
        config.depth = 1;
        config.budget = 0;
        config.shots = 4096;
        config.top_k = 4;
        SolveOutcome outcome = run_solve(config);
        CHECK(outcome.top.size() == 4);
        for (const auto& entry : outcome.top) {
            const double scaled = entry.probability * 4096.0;
            CHECK_THAT(scaled, Catch::Matchers::WithinAbs(std::round(scaled), 1e-9));
        }
    }

    SECTION("coordinate optimizer runs through the same plumbing") {
        ExperimentConfig config;
        config.depth = 1;
        config.optimizer = "coordinate";
        config.budget = 30;
        config.starts = 2;
        config.shots = 0;
        SolveOutcome outcome = run_solve(config);
        CHECK(outcome.final_expectation < outcome.uniform_expectation);
        CHECK(outcome.start_values.size() == 2);
    }

    SECTION("shot-based objective stays deterministic") {
        ExperimentConfig config;
        config.depth = 1;
        config.budget = 10;
        config.starts = 1;
        config.objective_shots = 256;
        config.shots = 0;
        SolveOutcome first = run_solve(config);
        SolveOutcome second = run_solve(config);
        CHECK(first.final_expectation == second.final_expectation);
        CHECK(first.schedule.gammas == second.schedule.gammas);
    }

    SECTION("subtour gap and optimum-miss warnings render for the second instance") {
        ExperimentConfig config;
        config.instance_ref = "vrp-5-2";
        config.depth = 1;
        config.budget = 0;
        config.shots = 0;
        SolveOutcome outcome = run_solve(config);
        CHECK(outcome.gap);
        std::ostringstream out;
        render_solve(out, config, outcome);
        CHECK(has_line_starting(out.str(), "WARN degree-feasible minimum"));
        CHECK(has_line_starting(out.str(), "WARN no ground state among the top sampled entries"));
    }
}

TEST_CASE("artifact files", "[pipeline]") {
    const auto dir = fresh_dir("vrpqaoa-test-artifacts");

    ExperimentConfig config;
    config.depth = 1;
    config.budget = 8;
    config.starts = 1;
    config.shots = 0;
    config.output_dir = (dir / "solve").string();

    SolveOutcome outcome = run_solve(config);
    std::ostringstream report;
    render_solve(report, config, outcome);
    write_solve_artifacts(config, outcome, report.str());

    SECTION("solve artifacts exist and agree with the report") {
        CHECK(slurp(dir / "solve" / "report.txt") == report.str());
        const std::string histogram = slurp(dir / "solve" / "histogram.txt");
        CHECK(has_line_starting(histogram, "index bitstring probability cost class"));
        const std::string trace = slurp(dir / "solve" / "trace.txt");
        CHECK(has_line_starting(trace, "evaluations best-expectation"));
        ExperimentConfig saved = parse_experiment_config(slurp(dir / "solve" / "config.txt"));
        CHECK(saved.depth == config.depth);
        CHECK(saved.budget == config.budget);
        CHECK(saved.output_dir == config.output_dir);
    }

    SECTION("re-running the saved config reproduces the report byte for byte") {
        ExperimentConfig saved = parse_experiment_config(slurp(dir / "solve" / "config.txt"));
        SolveOutcome again = run_solve(saved);
        std::ostringstream replay;
        render_solve(replay, saved, again);
        CHECK(replay.str() == slurp(dir / "solve" / "report.txt"));
    }

    SECTION("build artifacts parse back into the same models") {
        ExperimentConfig build_config;
        build_config.output_dir = (dir / "build").string();
        BuildSummary summary = run_build(build_config);
        write_build_artifacts(build_config, summary);

        std::istringstream qubo_in(slurp(dir / "build" / "qubo.txt"));
        QuboModel qubo = parse_qubo(qubo_in);
        CHECK(qubo.num_vars == summary.qubo.num_vars);
        CHECK(qubo.offset == summary.qubo.offset);

        std::istringstream ising_in(slurp(dir / "build" / "ising.txt"));
        IsingModel ising = parse_ising(ising_in);
        CHECK(ising.num_spins == summary.ising.num_spins);
        CHECK(ising.couplings.size() == summary.ising.couplings.size());
    }
}

TEST_CASE("reproduction presets", "[pipeline]") {
    SECTION("experiment table") {
        ReproduceSettings exp1 = reproduce_settings("exp1");
        CHECK(exp1.config.instance_ref == "vrp-4-2");
        CHECK(exp1.config.depth == 12);
        CHECK_THAT(exp1.reference_ground, Catch::Matchers::WithinAbs(124.871, 1e-12));
        CHECK(!exp1.expect_gap);

        ReproduceSettings exp2 = reproduce_settings("exp2");
        CHECK(exp2.config.instance_ref == "vrp-5-2");
        CHECK(exp2.config.depth == 24);
        CHECK(exp2.expect_gap);
        CHECK_THAT(exp2.reference_ground, Catch::Matchers::WithinAbs(128.545, 1e-12));
        CHECK_THAT(exp2.reference_optimum, Catch::Matchers::WithinAbs(138.511, 1e-12));

        ReproduceSettings exp3 = reproduce_settings("exp3");
        CHECK(exp3.config.instance_ref == "vrp-5-3");
        CHECK_THAT(exp3.reference_ground, Catch::Matchers::WithinAbs(30.53, 1e-12));

        CHECK_THROWS_AS(reproduce_settings("exp9"), validation_error);
    }

    SECTION("reference comparison lines for the first experiment") {
        ReproduceSettings settings = reproduce_settings("exp1");
        settings.config.depth = 1;
        settings.config.budget = 0;
        settings.config.shots = 0;
        SolveOutcome outcome = run_solve(settings.config);
        std::ostringstream out;
        render_reproduce(out, settings, outcome);
        CHECK(has_line_starting(out.str(), "reference-comparison exp1"));
        CHECK(has_line_starting(out.str(), "ground-matches yes"));
        CHECK(has_line_starting(out.str(), "optimum-matches yes"));
    }

    SECTION("reference comparison holds on the tolerance boundary") {
        // The second preset's route optimum differs from its reference anchor by exactly
        // one thousandth; the additive band check must accept that boundary case even
        // though the rounded difference of the doubles exceeds 1e-3 by ~5e-12.
        CHECK(detail::matches_reference(138.510, 138.511, 1e-3));
        CHECK(!(std::abs(138.510 - 138.511) <= 1e-3));
        CHECK(!detail::matches_reference(138.509, 138.511, 1e-3));

        ReproduceSettings settings = reproduce_settings("exp2");
        settings.config.depth = 1;
        settings.config.budget = 0;
        settings.config.shots = 0;
        SolveOutcome outcome = run_solve(settings.config);
        std::ostringstream out;
        render_reproduce(out, settings, outcome);
        CHECK(has_line_starting(out.str(), "reference-comparison exp2"));
        CHECK(has_line_starting(out.str(), "ground-matches yes"));
        CHECK(has_line_starting(out.str(), "optimum-matches yes"));
        CHECK(has_line_starting(out.str(), "note the reproduced result sits on the encoding's true ground state"));
    }

    SECTION("a depth sweep reports one line per depth and keeps the best") {
        ReproduceSettings settings = reproduce_settings("exp1");
        settings.config.budget = 8;
        settings.config.starts = 1;
        settings.config.shots = 0;
        settings.sweep_depths = {1, 2, 3};
        ReproduceOutcome outcome = run_reproduce(settings);
        REQUIRE(outcome.runs.size() == 3);
        CHECK(outcome.depths == std::vector<int>{1, 2, 3});
        for (std::size_t r = 0; r < outcome.runs.size(); ++r) {
            CHECK(outcome.runs[r].schedule.depth() == outcome.depths[r]);
            CHECK(outcome.runs[outcome.best].final_expectation <= outcome.runs[r].final_expectation);
        }
        std::ostringstream out;
        render_reproduce(out, settings, outcome);
        CHECK(has_line_starting(out.str(), "depth-sweep 3"));
        CHECK(has_line_starting(out.str(), "best-depth"));
        CHECK(has_line_starting(out.str(), "reference-comparison exp1"));
    }
}

TEST_CASE("command-line binary", "[pipeline][cli]") {
    const auto dir = fresh_dir("vrpqaoa-test-cli");

    SECTION("build writes its models") {
        CHECK(run_cli("build -i vrp-4-2 -o " + (dir / "b").string()) == 0);
        CHECK(std::filesystem::exists(dir / "b" / "qubo.txt"));
        CHECK(std::filesystem::exists(dir / "b" / "ising.txt"));
        std::ifstream in(dir / "b" / "qubo.txt");
        QuboModel qubo = parse_qubo(in);
        CHECK(qubo.num_vars == 12);
    }

    SECTION("oracle runs clean") { CHECK(run_cli("oracle -i vrp-4-2") == 0); }

    SECTION("solve writes the full artifact set") {
        const auto out = dir / "s";
        CHECK(run_cli("solve -i vrp-4-2 -p 1 --budget 8 --starts 1 --shots 0 -o " + out.string()) == 0);
        for (const char* name : {"report.txt", "histogram.txt", "trace.txt", "config.txt"})
            CHECK(std::filesystem::exists(out / name));
        ExperimentConfig saved = parse_experiment_config(slurp(out / "config.txt"));
        CHECK(saved.depth == 1);
        CHECK(saved.budget == 8);
    }

    SECTION("a config file overrides explicit flags") {
        const auto out = dir / "override";
        const auto file = dir / "override.cfg";
        {
            std::ofstream cfg(file);
            cfg << "depth 2\nbudget 6\nstarts 1\nshots 0\n";
        }
        CHECK(run_cli("solve -i vrp-4-2 -p 5 --budget 40 -c " + file.string() + " -o " + out.string()) == 0);
        ExperimentConfig saved = parse_experiment_config(slurp(out / "config.txt"));
        CHECK(saved.depth == 2);
        CHECK(saved.budget == 6);
    }

    SECTION("validation problems exit with status 2") {
        CHECK(run_cli("solve -i vrp-4-2 -p 0") == 2);
        CHECK(run_cli("solve -i no-such-file") == 2);
        CHECK(run_cli("frobnicate") == 2);
        CHECK(run_cli("reproduce exp9") == 2);
    }

    SECTION("oversized requests exit with status 3") {
        const auto file = dir / "six.txt";
        {
            std::ofstream inst(file);
            inst << "n 6\nk 2\nweights\n";
            for (int i = 0; i < 6; ++i) {
                for (int j = 0; j < 6; ++j) inst << (j ? " " : "") << (i == j ? 0.0 : 1.0 + i + 2 * j);
                inst << "\n";
            }
        }
        CHECK(run_cli("solve -i " + file.string()) == 3);
    }
}
