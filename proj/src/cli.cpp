#include "qrepsim/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "qrepsim/error.hpp"
#include "qrepsim/experiments.hpp"
#include "qrepsim/model.hpp"
#include "qrepsim/protocols.hpp"
#include "qrepsim/validation.hpp"

namespace qrepsim::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 7;

// Raised for bad flag values that CLI11 itself cannot catch.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::string& text) {
    if (text == "random") {
        std::random_device device;
        return (static_cast<std::uint64_t>(device()) << 32) ^ device();
    }
    std::uint64_t seed = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw UsageError("--seed must be a non-negative integer or 'random' (got '" + text + "')");
    }
    return seed;
}

struct RunConfig {
    NetworkParams params;
    std::string protocol = "parallel";
    std::string accounting = "per-attempt";
    std::uint64_t attempt_cap = kDefaultAttemptCap;
    std::uint64_t trials = 10'000;
    std::string seed = std::to_string(kDefaultSeed);
    std::string trials_csv;
};

struct SweepConfig {
    std::string spec_path;
    std::string output;
    std::string json_output;
};

struct ValidateConfig {
    double tolerance = 0.0;
    std::vector<std::string> only;
    std::uint64_t trials = 100'000;
    std::uint64_t seed = ValidationOptions{}.seed;
};

std::string trials_to_csv(std::span<const FidelityResult> trials) {
    std::string out = "trial,fidelity,hashing_rate,memory_time_s,clock_time_s\r\n";
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const auto& t = trials[i];
        out += std::to_string(i) + ',' + format_double(t.fidelity) + ',' +
               format_double(hashing_rate(t.fidelity, t.clock_time_s)) + ',' + format_double(t.memory_time_s) + ',' +
               format_double(t.clock_time_s) + "\r\n";
    }
    return out;
}

int cmd_run(const RunConfig& config, std::ostream& out) {
    SweepSpec spec;
    spec.node_values = {config.params.num_nodes};
    spec.dephasing_values_s = {config.params.dephasing_time_s};
    spec.bsm_values = {config.params.bsm_ideality};
    spec.protocols = {parse_protocol(config.protocol)};
    spec.total_length_km = config.params.total_length_km;
    spec.attenuation_length_km = config.params.attenuation_length_km;
    spec.fiber_speed_m_per_s = config.params.fiber_speed_m_per_s;
    spec.trials = config.trials;
    spec.master_seed = resolve_seed(config.seed);
    spec.options.accounting = parse_accounting(config.accounting);
    spec.options.attempt_cap = config.attempt_cap;
    config.params.validate();
    spec.validate();

    const SweepCell cell = enumerate_cells(spec).front();
    const auto trials = run_cell_trials(spec, cell, 0, default_worker_count());
    const CellStats stats = summarize_cell(cell, trials);
    if (!config.trials_csv.empty()) write_file_atomic(config.trials_csv, trials_to_csv(trials));

    const auto& p = config.params;
    auto row = [&](std::string_view label, const std::string& value) {
        out << std::left << std::setw(26) << label << value << '\n';
    };
    row("protocol", config.protocol);
    row("accounting", config.accounting);
    row("nodes", std::to_string(p.num_nodes));
    row("total length [km]", format_double(p.total_length_km));
    row("link success probability", format_double(p.success_probability()));
    row("dephasing time [s]", format_double(p.dephasing_time_s));
    row("BSM ideality", format_double(p.bsm_ideality));
    row("trials", std::to_string(config.trials));
    row("seed", std::to_string(spec.master_seed));
    row("mean fidelity", format_double(stats.mean_fidelity) + " +/- " + format_double(stats.fidelity_stderr));
    row("mean hashing rate [1/s]", format_double(stats.mean_hashing_rate) + " +/- " + format_double(stats.rate_stderr));
    row("aggregate hashing rate", format_double(stats.aggregate_hashing_rate));
    row("mean clock time [s]", format_double(stats.mean_clock_s));
    row("mean memory time [s]", format_double(stats.mean_memory_s));
    return kExitOk;
}

std::string default_json_path(const std::string& csv_path) {
    std::filesystem::path path(csv_path);
    path.replace_extension(".json");
    return path.string();
}

int cmd_sweep(const SweepConfig& config, std::ostream& out, std::ostream& err) {
    SweepSpec spec;
    try {
        spec = load_sweep_spec(config.spec_path);
    } catch (const SpecParseError& e) {
        throw UsageError(config.spec_path + ": " + e.what());
    } catch (const std::runtime_error& e) {
        throw UsageError(e.what());
    }
    const std::string json_path = config.json_output.empty() ? default_json_path(config.output) : config.json_output;
    const auto cells = enumerate_cells(spec);
    err << "sweep: " << cells.size() << " cells x " << spec.trials << " trials\n";
    std::size_t last_percent = 0;
    const SweepResult result = run_sweep(spec, default_worker_count(), [&](std::size_t done, std::size_t total) {
        const std::size_t percent = 100 * done / total;
        if (percent >= last_percent + 10 || done == total) {
            last_percent = percent;
            err << "sweep: " << done << "/" << total << " cells\n";
        }
    });
    write_file_atomic(config.output, sweep_to_csv(result));
    try {
        write_file_atomic(json_path, sweep_to_json(result));
    } catch (...) {
        std::remove(config.output.c_str());
        throw;
    }
    out << "wrote " << result.size() << " rows to " << config.output << " and " << json_path << '\n';
    return kExitOk;
}

int cmd_validate(const ValidateConfig& config, bool tolerance_set, std::ostream& out) {
    ValidationOptions options;
    if (tolerance_set) options.tolerance = config.tolerance;
    options.only = config.only;
    options.monte_carlo_trials = config.trials;
    options.seed = config.seed;
    const auto results = run_validation(options);

    std::size_t name_width = 5;
    for (const auto& r : results) name_width = std::max(name_width, r.group.size() + 2 + r.name.size());
    out << std::left << std::setw(static_cast<int>(name_width + 2)) << "check" << std::setw(14) << "observed"
        << std::setw(14) << "threshold"
        << "result\n";
    std::vector<const CheckResult*> failed;
    for (const auto& r : results) {
        std::ostringstream observed;
        observed << std::setprecision(3) << r.observed;
        std::ostringstream threshold;
        threshold << std::setprecision(3) << r.threshold;
        out << std::left << std::setw(static_cast<int>(name_width + 2)) << (r.group + ": " + r.name)
            << std::setw(14) << observed.str() << std::setw(14) << threshold.str() << (r.passed ? "PASS" : "FAIL");
        if (!r.detail.empty()) out << "  (" << r.detail << ")";
        out << '\n';
        if (!r.passed) failed.push_back(&r);
    }
    out << results.size() - failed.size() << "/" << results.size() << " checks passed\n";
    if (failed.empty()) return kExitOk;
    out << "failing checks:\n";
    for (const auto* r : failed) {
        out << "  " << r->group << ": " << r->name << " deviation " << r->observed << " > " << r->threshold << '\n';
    }
    return kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Monte Carlo simulator for Bell-pair distribution over linear quantum-repeater chains", "qrepsim"};
    app.require_subcommand(1);

    RunConfig run_config;
    auto* run_cmd = app.add_subcommand("run", "Simulate one network configuration and print summary statistics");
    run_cmd->add_option("--protocol", run_config.protocol, "Distribution protocol")
        ->check(CLI::IsMember({"sequential", "parallel"}))
        ->capture_default_str();
    run_cmd->add_option("--nodes", run_config.params.num_nodes, "Number of nodes N >= 2 (sender, receiver, repeaters)")
        ->capture_default_str();
    run_cmd->add_option("--length-km", run_config.params.total_length_km, "Total chain length [km]")
        ->capture_default_str();
    run_cmd->add_option("--attenuation-km", run_config.params.attenuation_length_km, "Fiber attenuation length [km]")
        ->capture_default_str();
    run_cmd->add_option("--fiber-speed", run_config.params.fiber_speed_m_per_s, "Light speed in fiber [m/s]")
        ->capture_default_str();
    run_cmd->add_option("--t-dp", run_config.params.dephasing_time_s, "Memory dephasing time T_dp [s]")
        ->capture_default_str();
    run_cmd->add_option("--lambda-bsm", run_config.params.bsm_ideality, "BSM ideality in [0, 1] [dimensionless]")
        ->capture_default_str();
    run_cmd->add_option("--trials", run_config.trials, "Monte Carlo trials [count]")->capture_default_str();
    run_cmd->add_option("--seed", run_config.seed, "Master seed [integer], or 'random' for an entropy seed")
        ->capture_default_str();
    run_cmd->add_option("--accounting", run_config.accounting,
                        "Sequential time accounting: per-attempt, or literal (charged on success only)")
        ->check(CLI::IsMember({"per-attempt", "literal"}))
        ->capture_default_str();
    run_cmd->add_option("--attempt-cap", run_config.attempt_cap, "Generation attempts allowed per trial [count]")
        ->capture_default_str();
    run_cmd->add_option("--trials-csv", run_config.trials_csv, "Also write per-trial results (times in [s]) to CSV");

    SweepConfig sweep_config;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter grid described by a sweep spec file");
    sweep_cmd->add_option("spec", sweep_config.spec_path, "Sweep spec file (key = value; lengths [km], times [s])")
        ->required();
    sweep_cmd->add_option("-o,--output", sweep_config.output, "Output CSV path (times [s], rates [1/s])")->required();
    sweep_cmd->add_option("--json", sweep_config.json_output, "Output JSON path (default: CSV path with .json)");

    ValidateConfig validate_config;
    auto* validate_cmd = app.add_subcommand("validate", "Check the closed-form model against the exact oracle");
    auto* tolerance_opt = validate_cmd->add_option(
        "--tolerance", validate_config.tolerance, "Override every numeric tolerance [dimensionless]");
    validate_cmd->add_option("--only", validate_config.only, "Comma-separated check groups to run")
        ->delimiter(',')
        ->check(CLI::IsMember(validation_groups()));
    validate_cmd->add_option("--trials", validate_config.trials, "Monte Carlo trials per expectation check [count]")
        ->capture_default_str();
    validate_cmd->add_option("--seed", validate_config.seed, "Seed for random draws [integer]")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(run_config, out);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_config, out, err);
        return cmd_validate(validate_config, tolerance_opt->count() > 0, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidParameter& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace qrepsim::cli
