#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qrepsim/model.hpp"
#include "qrepsim/protocols.hpp"

namespace qrepsim {

struct SweepSpec {
    std::vector<int> node_values;
    std::vector<double> dephasing_values_s;
    std::vector<double> bsm_values{1.0};
    std::vector<Protocol> protocols{Protocol::sequential, Protocol::parallel};
    double total_length_km = 50.0;
    double attenuation_length_km = 22.0;
    double fiber_speed_m_per_s = 2.0e8;
    std::uint64_t trials = 10'000;
    std::uint64_t master_seed = 1;
    ProtocolOptions options{};

    // Throws InvalidParameter.
    void validate() const;
};

// Malformed sweep spec text. `line` is 1-based, 0 when the problem is not tied
// to a line (e.g. a missing key).
class SpecParseError : public std::runtime_error {
public:
    SpecParseError(int line, std::string field, const std::string& message);

    int line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    int line_;
    std::string field_;
};

// Parses the flat `key = value` sweep format. Lists are comma separated;
// `logrange(a, b, n)` expands to n log-spaced values from a to b inclusive and
// `range(a, b)` to the integers a..b.
SweepSpec parse_sweep_spec(std::string_view text);
SweepSpec load_sweep_spec(const std::string& path);

// One grid point of a sweep.
struct SweepCell {
    Protocol protocol = Protocol::sequential;
    int num_nodes = 2;
    double dephasing_time_s = 0.0;
    double bsm_ideality = 1.0;
};

struct CellStats {
    SweepCell cell;
    double mean_fidelity = 0.0;
    double fidelity_stderr = 0.0;
    double mean_hashing_rate = 0.0;
    double rate_stderr = 0.0;
    double aggregate_hashing_rate = 0.0;  // Y(mean F) / mean clock
    double mean_clock_s = 0.0;
    double mean_memory_s = 0.0;
    std::uint64_t trials = 0;
};

using SweepResult = std::vector<CellStats>;

// Cells in output order: protocol name, then N, T_dp and lambda ascending,
// duplicates dropped.
std::vector<SweepCell> enumerate_cells(const SweepSpec& spec);

NetworkParams cell_params(const SweepSpec& spec, const SweepCell& cell);

struct RateEstimate {
    double mean = 0.0;            // mean of per-trial Y(F_i) / clock_i
    double standard_error = 0.0;  // of that mean
    double aggregate = 0.0;       // Y(mean F) / mean clock
};

RateEstimate hashing_rate_estimator(std::span<const FidelityResult> trials);

// Aggregates trials in index order.
CellStats summarize_cell(const SweepCell& cell, std::span<const FidelityResult> trials);

// Runs `trials` independent trials of one cell. Trial t of cell `cell_index`
// is seeded with derive_seed(master_seed, cell_index, t).
std::vector<FidelityResult> run_cell_trials(const SweepSpec& spec, const SweepCell& cell, std::uint64_t cell_index,
                                            unsigned workers = 1);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Output is identical for any worker count.
SweepResult run_sweep(const SweepSpec& spec, unsigned workers = 0, const ProgressFn& progress = {});

// Worker count: QREP_WORKERS when set to a positive integer, else the
// hardware concurrency (at least 1).
unsigned default_worker_count();

// Calls fn(i) for i in [0, count) on `workers` threads. Exceptions are
// rethrown on the calling thread (the one from the lowest index wins).
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn);

std::string format_double(double value);
std::string csv_escape(std::string_view field);
std::string sweep_to_csv(const SweepResult& result);
std::string sweep_to_json(const SweepResult& result);

// Writes via a temporary file and rename so a failed write leaves nothing
// behind. Throws std::runtime_error.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace qrepsim
