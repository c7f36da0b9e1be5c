#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrepsim/error.hpp"
#include "qrepsim/experiments.hpp"

using namespace qrepsim;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("qrepsim_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int parse_error_line(std::string_view text) {
    try {
        parse_sweep_spec(text);
    } catch (const SpecParseError& e) {
        return e.line();
    }
    return -1;
}

const CellStats& find(const SweepResult& result, Protocol protocol, int nodes, double t_dp) {
    for (const auto& r : result) {
        if (r.cell.protocol == protocol && r.cell.num_nodes == nodes && r.cell.dephasing_time_s == t_dp) return r;
    }
    throw std::runtime_error("cell not found");
}

}  // namespace

TEST_CASE("spec parsing") {
    const auto spec = parse_sweep_spec(
        "# grid\n"
        "nodes = 3, 5, range(7, 9)\n"
        "dephasing_times = logrange(1e-4, 1e-1, 4)   # seconds\n"
        "bsm_idealities = 0.9, 1.0\n"
        "protocols = parallel\n"
        "total_length_km = 40\n"
        "trials = 250\n"
        "master_seed = 99\n"
        "accounting = literal\n"
        "attempt_cap = 5000\n");
    CHECK(spec.node_values == std::vector<int>{3, 5, 7, 8, 9});
    CHECK(parse_sweep_spec("nodes = range(2, 4), 10\ndephasing_times = 1e-3, logrange(1, 100, 3)\n").dephasing_values_s ==
          std::vector<double>{1e-3, 1.0, 10.0, 100.0});
    REQUIRE(spec.dephasing_values_s.size() == 4);
    CHECK(spec.dephasing_values_s[0] == Approx(1e-4));
    CHECK(spec.dephasing_values_s[1] == Approx(1e-3));
    CHECK(spec.dephasing_values_s[2] == Approx(1e-2));
    CHECK(spec.dephasing_values_s[3] == Approx(1e-1));
    CHECK(spec.bsm_values == std::vector<double>{0.9, 1.0});
    CHECK(spec.protocols == std::vector<Protocol>{Protocol::parallel});
    CHECK(spec.total_length_km == 40.0);
    CHECK(spec.trials == 250);
    CHECK(spec.master_seed == 99);
    CHECK(spec.options.accounting == Accounting::literal);
    CHECK(spec.options.attempt_cap == 5000);

    const auto defaults = parse_sweep_spec("nodes = 2\ndephasing_times = 1\n");
    CHECK(defaults.protocols.size() == 2);
    CHECK(defaults.trials == 10'000);
    CHECK(defaults.bsm_values == std::vector<double>{1.0});
}

TEST_CASE("spec parse errors carry line numbers") {
    CHECK(parse_error_line("nodes = 3\n\ndephasing_times = 1e-3\nbogus = 1\n") == 4);
    CHECK(parse_error_line("nodes = 3\nnodes = 4\ndephasing_times = 1\n") == 2);
    CHECK(parse_error_line("nodes\n") == 1);
    CHECK(parse_error_line("nodes = \ndephasing_times = 1\n") == 1);
    CHECK(parse_error_line("nodes = 3, x\ndephasing_times = 1\n") == 1);
    CHECK(parse_error_line("nodes = 3\ndephasing_times = logrange(1, 2)\n") == 2);
    CHECK(parse_error_line("nodes = 3\ndephasing_times = 1\nprotocols = serial\n") == 3);
    CHECK(parse_error_line("nodes = 3\ndephasing_times = 1\ntrials = -5\n") == 3);
    CHECK(parse_error_line("nodes = range(3, 5\ndephasing_times = 1\n") == 1);
    CHECK(parse_error_line("nodes = range(5, 3)\ndephasing_times = 1\n") == 1);
    CHECK(parse_error_line("nodes = 3\ndephasing_times = logrange(0, 1, 3)\n") == 2);
    CHECK(parse_error_line("nodes = 3\n") == 0);
    CHECK(parse_error_line("nodes = 1\ndephasing_times = 1\n") == 0);

    try {
        parse_sweep_spec("nodes = 3\ndephasing_times = 1\nbsm_idealities = 0.5, oops\n");
        FAIL("expected a parse error");
    } catch (const SpecParseError& e) {
        CHECK(e.field() == "bsm_idealities");
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("cell enumeration") {
    SweepSpec spec;
    spec.node_values = {10, 5, 5};
    spec.dephasing_values_s = {1e-2, 1e-3};
    spec.protocols = {Protocol::sequential, Protocol::parallel};
    const auto cells = enumerate_cells(spec);
    REQUIRE(cells.size() == 8);
    CHECK(cells[0].protocol == Protocol::parallel);
    CHECK(cells[0].num_nodes == 5);
    CHECK(cells[0].dephasing_time_s == 1e-3);
    CHECK(cells[1].dephasing_time_s == 1e-2);
    CHECK(cells[2].num_nodes == 10);
    CHECK(cells[4].protocol == Protocol::sequential);
}

TEST_CASE("rate estimator") {
    const std::vector<FidelityResult> perfect(5, FidelityResult{1.0, 0.0, 1.0});
    auto r = hashing_rate_estimator(perfect);
    CHECK(r.mean == 1.0);
    CHECK(r.standard_error == 0.0);
    CHECK(r.aggregate == 1.0);

    const std::vector<FidelityResult> poor{{0.8, 0.0, 1.0}, {0.5, 0.0, 2.0}, {0.25, 0.0, 0.1}};
    r = hashing_rate_estimator(poor);
    CHECK(r.mean == 0.0);
    CHECK(r.standard_error == 0.0);
    CHECK(r.aggregate == 0.0);

    const std::vector<FidelityResult> two{{1.0, 0.0, 1.0}, {1.0, 0.0, 0.5}};
    r = hashing_rate_estimator(two);
    CHECK(r.mean == 1.5);
    CHECK(r.standard_error == Approx(0.5));
    CHECK(r.aggregate == Approx(1.0 / 0.75));

    CHECK_THROWS_AS(hashing_rate_estimator(std::vector<FidelityResult>{}), InvalidParameter);
}

TEST_CASE("deterministic cell") {
    SweepSpec spec;
    spec.node_values = {2};
    spec.dephasing_values_s = {1e9};
    spec.protocols = {Protocol::sequential, Protocol::parallel};
    spec.total_length_km = 1e-18;
    spec.trials = 10;
    const auto result = run_sweep(spec, 1);
    REQUIRE(result.size() == 2);
    for (const auto& r : result) {
        CHECK(r.mean_fidelity == Approx(1.0).epsilon(1e-12));
        CHECK(r.fidelity_stderr == 0.0);
        CHECK(r.rate_stderr == 0.0);
        CHECK(r.trials == 10);
    }
}

TEST_CASE("lossy BSM kills the hashing rate") {
    SweepSpec spec;
    spec.node_values = {4, 6, 10};
    spec.dephasing_values_s = {1e-1, 1e3};
    spec.bsm_values = {0.9};
    spec.trials = 200;
    for (const auto& r : run_sweep(spec, 1)) {
        CHECK(r.mean_hashing_rate == 0.0);
        CHECK(r.aggregate_hashing_rate == 0.0);
    }
}

TEST_CASE("sweep properties on a small grid") {
    SweepSpec spec;
    spec.node_values = {5, 10};
    spec.dephasing_values_s = {1e-3, 1e-2};
    spec.trials = 4000;
    spec.master_seed = 3;
    const auto result = run_sweep(spec, 2);
    REQUIRE(result.size() == 8);

    for (const auto& r : result) {
        CHECK(r.mean_fidelity >= 0.0);
        CHECK(r.mean_fidelity <= 1.0);
        CHECK(r.fidelity_stderr >= 0.0);
        CHECK(r.rate_stderr >= 0.0);
        CHECK(r.mean_hashing_rate >= 0.0);
    }
    for (const auto protocol : {Protocol::sequential, Protocol::parallel}) {
        // Fixed total length: more nodes means shorter, likelier links and a
        // smaller L/c, so with ideal swaps the memory time in seconds shrinks.
        for (const double t_dp : spec.dephasing_values_s) {
            const auto& five = find(result, protocol, 5, t_dp);
            const auto& ten = find(result, protocol, 10, t_dp);
            CHECK(ten.mean_memory_s < five.mean_memory_s);
            CHECK(ten.mean_fidelity > five.mean_fidelity);
        }
        for (const int n : spec.node_values) {
            const auto& fast = find(result, protocol, n, 1e-3);
            const auto& slow = find(result, protocol, n, 1e-2);
            CHECK(slow.mean_fidelity + 3.0 * std::hypot(fast.fidelity_stderr, slow.fidelity_stderr) >=
                  fast.mean_fidelity);
        }
    }
    for (const int n : spec.node_values) {
        for (const double t_dp : spec.dephasing_values_s) {
            const auto& par = find(result, Protocol::parallel, n, t_dp);
            const auto& seq = find(result, Protocol::sequential, n, t_dp);
            CHECK(par.mean_hashing_rate >= seq.mean_hashing_rate);
            CHECK(par.mean_clock_s < seq.mean_clock_s);
            CHECK(par.mean_fidelity >=
                  seq.mean_fidelity - 3.0 * std::hypot(par.fidelity_stderr, seq.fidelity_stderr));
        }
    }
}

TEST_CASE("worker count does not change results") {
    SweepSpec spec;
    spec.node_values = {3, 7};
    spec.dephasing_values_s = {1e-3, 1e-2, 1e-1};
    spec.trials = 500;
    spec.master_seed = 12345;
    const auto one = sweep_to_csv(run_sweep(spec, 1));
    CHECK(one == sweep_to_csv(run_sweep(spec, 3)));
    CHECK(one == sweep_to_csv(run_sweep(spec, 64)));

    // fewer cells than workers: trials within a cell fan out instead
    spec.node_values = {6};
    spec.dephasing_values_s = {1e-2};
    spec.protocols = {Protocol::parallel};
    CHECK(sweep_to_csv(run_sweep(spec, 1)) == sweep_to_csv(run_sweep(spec, 4)));

    spec.master_seed = 12346;
    const auto other = sweep_to_csv(run_sweep(spec, 1));
    spec.master_seed = 12345;
    CHECK(other != sweep_to_csv(run_sweep(spec, 1)));
}

TEST_CASE("trial errors name the cell") {
    SweepSpec spec;
    spec.node_values = {2};
    spec.dephasing_values_s = {1e-2};
    spec.total_length_km = 1e8;
    spec.trials = 3;
    spec.options.attempt_cap = 10;
    spec.protocols = {Protocol::sequential};
    CHECK_THROWS_WITH(run_sweep(spec, 2), doctest::Contains("sequential, N=2"));
}

TEST_CASE("progress callback") {
    SweepSpec spec;
    spec.node_values = {3, 4};
    spec.dephasing_values_s = {1e-2};
    spec.trials = 10;
    std::vector<std::size_t> seen;
    run_sweep(spec, 1, [&](std::size_t done, std::size_t total) {
        CHECK(total == 4);
        seen.push_back(done);
    });
    CHECK(seen == std::vector<std::size_t>{1, 2, 3, 4});
}

TEST_CASE("parallel_for") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (const int h : hits) CHECK(h == 1);
    CHECK_THROWS_WITH(parallel_for(100, 4,
                                   [](std::size_t i) {
                                       if (i % 10 == 3) throw std::runtime_error("boom " + std::to_string(i));
                                   }),
                      "boom 3");
}

TEST_CASE("number formatting and CSV quoting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e-4) == "1e-04");
    CHECK(format_double(-2.5) == "-2.5");
    CHECK(format_double(10000) == "10000");
    CHECK(std::stod(format_double(0.9096485437810087)) == 0.9096485437810087);
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("CSV and JSON output") {
    SweepSpec spec;
    spec.node_values = {3, 5};
    spec.dephasing_values_s = {1e-2};
    spec.trials = 100;
    const auto result = run_sweep(spec, 1);
    const auto csv = sweep_to_csv(result);

    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        const auto end = csv.find("\r\n", pos);
        REQUIRE(end != std::string::npos);
        lines.push_back(csv.substr(pos, end - pos));
        pos = end + 2;
    }
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] ==
          "protocol,nodes,dephasing_time_s,bsm_ideality,mean_fidelity,fidelity_stderr,mean_hashing_rate,"
          "rate_stderr,aggregate_hashing_rate,mean_clock_s,mean_memory_s,trials");
    CHECK(lines[1].rfind("parallel,3,0.01,1,", 0) == 0);
    CHECK(lines[4].rfind("sequential,5,0.01,1,", 0) == 0);
    CHECK(lines[1].substr(lines[1].size() - 4) == ",100");

    const auto json = nlohmann::json::parse(sweep_to_json(result));
    REQUIRE(json.size() == result.size());
    for (std::size_t i = 0; i < result.size(); ++i) {
        CHECK(json[i]["protocol"] == std::string(to_string(result[i].cell.protocol)));
        CHECK(json[i]["nodes"] == result[i].cell.num_nodes);
        CHECK(json[i]["mean_fidelity"].get<double>() == result[i].mean_fidelity);
        CHECK(json[i]["mean_hashing_rate"].get<double>() == result[i].mean_hashing_rate);
        CHECK(json[i]["trials"] == 100);
    }
}

TEST_CASE("atomic file writes") {
    const auto dir = scratch_dir("atomic");
    const auto target = dir / "out.csv";
    write_file_atomic(target.string(), "a,b\r\n");
    CHECK(slurp(target) == "a,b\r\n");
    write_file_atomic(target.string(), "c\r\n");
    CHECK(slurp(target) == "c\r\n");

    const auto missing = dir / "no_such_dir" / "out.csv";
    CHECK_THROWS_AS(write_file_atomic(missing.string(), "x"), std::runtime_error);
    CHECK_FALSE(fs::exists(missing));
    std::size_t leftovers = 0;
    for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir)) ++leftovers;
    CHECK(leftovers == 1);
    fs::remove_all(dir);
}

TEST_CASE("worker count override") {
    ::setenv("QREP_WORKERS", "3", 1);
    CHECK(default_worker_count() == 3);
    ::setenv("QREP_WORKERS", "zero", 1);
    CHECK(default_worker_count() >= 1);
    ::setenv("QREP_WORKERS", "0", 1);
    CHECK(default_worker_count() >= 1);
    ::unsetenv("QREP_WORKERS");
    CHECK(default_worker_count() >= 1);
}
