#include "qrepsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "qrepsim/error.hpp"

namespace qrepsim {

namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            carry_ += (sum_ - t) + x;
        } else {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

struct MeanStderr {
    double mean = 0.0;
    double standard_error = 0.0;
};

template <typename Fn>
MeanStderr mean_and_stderr(std::size_t n, Fn&& value_at) {
    CompensatedSum sum;
    for (std::size_t i = 0; i < n; ++i) sum.add(value_at(i));
    const double mean = sum.value() / static_cast<double>(n);
    if (n < 2) return {mean, 0.0};
    CompensatedSum squares;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = value_at(i) - mean;
        squares.add(d * d);
    }
    const double variance = std::max(0.0, squares.value() / static_cast<double>(n - 1));
    return {mean, std::sqrt(variance / static_cast<double>(n))};
}

template <typename T>
void sort_unique(std::vector<T>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

void SweepSpec::validate() const {
    if (node_values.empty()) throw InvalidParameter("node list must not be empty");
    if (dephasing_values_s.empty()) throw InvalidParameter("dephasing time list must not be empty");
    if (bsm_values.empty()) throw InvalidParameter("BSM ideality list must not be empty");
    if (protocols.empty()) throw InvalidParameter("protocol list must not be empty");
    if (trials < 1) throw InvalidParameter("trials must be >= 1");
    for (const int n : node_values) {
        if (n < 2) throw InvalidParameter("every node count must satisfy N >= 2 (got " + std::to_string(n) + ")");
    }
    for (const auto& cell : enumerate_cells(*this)) cell_params(*this, cell).validate();
}

std::vector<SweepCell> enumerate_cells(const SweepSpec& spec) {
    std::vector<std::string_view> protocol_names;
    for (const auto p : spec.protocols) protocol_names.push_back(to_string(p));
    sort_unique(protocol_names);
    auto nodes = spec.node_values;
    auto dephasing = spec.dephasing_values_s;
    auto bsm = spec.bsm_values;
    sort_unique(nodes);
    sort_unique(dephasing);
    sort_unique(bsm);

    std::vector<SweepCell> cells;
    cells.reserve(protocol_names.size() * nodes.size() * dephasing.size() * bsm.size());
    for (const auto name : protocol_names) {
        for (const int n : nodes) {
            for (const double t : dephasing) {
                for (const double l : bsm) cells.push_back({parse_protocol(name), n, t, l});
            }
        }
    }
    return cells;
}

NetworkParams cell_params(const SweepSpec& spec, const SweepCell& cell) {
    NetworkParams params;
    params.num_nodes = cell.num_nodes;
    params.total_length_km = spec.total_length_km;
    params.attenuation_length_km = spec.attenuation_length_km;
    params.fiber_speed_m_per_s = spec.fiber_speed_m_per_s;
    params.dephasing_time_s = cell.dephasing_time_s;
    params.bsm_ideality = cell.bsm_ideality;
    return params;
}

RateEstimate hashing_rate_estimator(std::span<const FidelityResult> trials) {
    if (trials.empty()) throw InvalidParameter("hashing rate estimator needs at least one trial");
    const auto rate = mean_and_stderr(trials.size(), [&](std::size_t i) {
        return hashing_rate(trials[i].fidelity, trials[i].clock_time_s);
    });
    CompensatedSum fidelity;
    CompensatedSum clock;
    for (const auto& t : trials) {
        fidelity.add(t.fidelity);
        clock.add(t.clock_time_s);
    }
    const double n = static_cast<double>(trials.size());
    const double mean_fidelity = std::clamp(fidelity.value() / n, 0.0, 1.0);
    return {rate.mean, rate.standard_error, hashing_rate(mean_fidelity, clock.value() / n)};
}

CellStats summarize_cell(const SweepCell& cell, std::span<const FidelityResult> trials) {
    if (trials.empty()) throw InvalidParameter("cannot summarize a cell with no trials");
    CellStats out;
    out.cell = cell;
    out.trials = trials.size();
    const auto fidelity = mean_and_stderr(trials.size(), [&](std::size_t i) { return trials[i].fidelity; });
    out.mean_fidelity = fidelity.mean;
    out.fidelity_stderr = fidelity.standard_error;
    const RateEstimate rate = hashing_rate_estimator(trials);
    out.mean_hashing_rate = rate.mean;
    out.rate_stderr = rate.standard_error;
    out.aggregate_hashing_rate = rate.aggregate;
    CompensatedSum clock;
    CompensatedSum memory;
    for (const auto& t : trials) {
        clock.add(t.clock_time_s);
        memory.add(t.memory_time_s);
    }
    out.mean_clock_s = clock.value() / static_cast<double>(trials.size());
    out.mean_memory_s = memory.value() / static_cast<double>(trials.size());
    return out;
}

std::vector<FidelityResult> run_cell_trials(const SweepSpec& spec, const SweepCell& cell, std::uint64_t cell_index,
                                            unsigned workers) {
    const NetworkParams params = cell_params(spec, cell);
    params.validate();
    std::vector<FidelityResult> results(spec.trials);
    parallel_for(results.size(), workers, [&](std::size_t t) {
        TrialRng rng(derive_seed(spec.master_seed, cell_index, t));
        results[t] = simulate_trial(params, cell.protocol, rng, spec.options);
    });
    return results;
}

SweepResult run_sweep(const SweepSpec& spec, unsigned workers, const ProgressFn& progress) {
    spec.validate();
    if (workers == 0) workers = default_worker_count();
    const auto cells = enumerate_cells(spec);
    SweepResult result(cells.size());
    std::mutex progress_mutex;
    std::size_t done = 0;

    auto run_one = [&](std::size_t c, unsigned trial_workers) {
        std::vector<FidelityResult> trials;
        try {
            trials = run_cell_trials(spec, cells[c], c, trial_workers);
        } catch (const std::exception& e) {
            const auto& cell = cells[c];
            throw std::runtime_error("cell " + std::to_string(c) + " (" + std::string(to_string(cell.protocol)) +
                                     ", N=" + std::to_string(cell.num_nodes) + ", T_dp=" +
                                     format_double(cell.dephasing_time_s) + " s, lambda=" +
                                     format_double(cell.bsm_ideality) + "): " + e.what());
        }
        result[c] = summarize_cell(cells[c], trials);
        if (progress) {
            std::lock_guard lock(progress_mutex);
            progress(++done, cells.size());
        }
    };

    if (cells.size() >= workers) {
        parallel_for(cells.size(), workers, [&](std::size_t c) { run_one(c, 1); });
    } else {
        for (std::size_t c = 0; c < cells.size(); ++c) run_one(c, workers);
    }
    return result;
}

unsigned default_worker_count() {
    if (const char* env = std::getenv("QREP_WORKERS")) {
        unsigned value = 0;
        const std::string_view s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec == std::errc{} && ptr == s.data() + s.size() && value > 0) return value;
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_index = count;
    std::exception_ptr error;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
                next.store(count);
            }
        }
    };
    const unsigned n = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    std::vector<std::thread> threads;
    threads.reserve(n);
    for (unsigned w = 0; w < n; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string sweep_to_csv(const SweepResult& result) {
    std::string out =
        "protocol,nodes,dephasing_time_s,bsm_ideality,mean_fidelity,fidelity_stderr,mean_hashing_rate,"
        "rate_stderr,aggregate_hashing_rate,mean_clock_s,mean_memory_s,trials\r\n";
    for (const auto& r : result) {
        out += csv_escape(to_string(r.cell.protocol));
        for (const double v : {static_cast<double>(r.cell.num_nodes), r.cell.dephasing_time_s, r.cell.bsm_ideality,
                               r.mean_fidelity, r.fidelity_stderr, r.mean_hashing_rate, r.rate_stderr,
                               r.aggregate_hashing_rate, r.mean_clock_s, r.mean_memory_s,
                               static_cast<double>(r.trials)}) {
            out += ',';
            out += format_double(v);
        }
        out += "\r\n";
    }
    return out;
}

std::string sweep_to_json(const SweepResult& result) {
    auto rows = nlohmann::json::array();
    for (const auto& r : result) {
        rows.push_back({
            {"protocol", std::string(to_string(r.cell.protocol))},
            {"nodes", r.cell.num_nodes},
            {"dephasing_time_s", r.cell.dephasing_time_s},
            {"bsm_ideality", r.cell.bsm_ideality},
            {"mean_fidelity", r.mean_fidelity},
            {"fidelity_stderr", r.fidelity_stderr},
            {"mean_hashing_rate", r.mean_hashing_rate},
            {"rate_stderr", r.rate_stderr},
            {"aggregate_hashing_rate", r.aggregate_hashing_rate},
            {"mean_clock_s", r.mean_clock_s},
            {"mean_memory_s", r.mean_memory_s},
            {"trials", r.trials},
        });
    }
    return rows.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, std::string_view contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            out.close();
            std::remove(tmp.c_str());
            throw std::runtime_error("failed writing '" + path + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::remove(tmp.c_str());
        throw std::runtime_error("cannot move output into '" + path + "': " + ec.message());
    }
}

}  // namespace qrepsim
