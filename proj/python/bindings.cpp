#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qrepsim/error.hpp"
#include "qrepsim/experiments.hpp"
#include "qrepsim/model.hpp"
#include "qrepsim/oracle.hpp"
#include "qrepsim/protocols.hpp"
#include "qrepsim/validation.hpp"

namespace py = pybind11;
using namespace qrepsim;

namespace {

ProtocolOptions make_options(const std::string& accounting, std::uint64_t attempt_cap) {
    return {parse_accounting(accounting), attempt_cap};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bell-pair distribution over linear repeater chains: closed-form model, protocols, oracle, sweeps";

    py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
    py::register_exception<NonTermination>(m, "NonTermination", PyExc_RuntimeError);
    py::register_exception<DegenerateProjection>(m, "DegenerateProjection", PyExc_ArithmeticError);
    py::register_exception<SpecParseError>(m, "SpecParseError", PyExc_ValueError);

    py::class_<NetworkParams>(m, "NetworkParams")
        .def(py::init([](int num_nodes, double total_length_km, double attenuation_length_km, double fiber_speed,
                         double dephasing_time_s, double bsm_ideality) {
                 NetworkParams p{num_nodes, total_length_km, attenuation_length_km, fiber_speed, dephasing_time_s,
                                 bsm_ideality};
                 p.validate();
                 return p;
             }),
             py::arg("num_nodes") = 2, py::arg("total_length_km") = 50.0, py::arg("attenuation_length_km") = 22.0,
             py::arg("fiber_speed") = 2.0e8, py::arg("dephasing_time_s") = 1.0e-2, py::arg("bsm_ideality") = 1.0)
        .def_readwrite("num_nodes", &NetworkParams::num_nodes)
        .def_readwrite("total_length_km", &NetworkParams::total_length_km)
        .def_readwrite("attenuation_length_km", &NetworkParams::attenuation_length_km)
        .def_readwrite("fiber_speed", &NetworkParams::fiber_speed_m_per_s)
        .def_readwrite("dephasing_time_s", &NetworkParams::dephasing_time_s)
        .def_readwrite("bsm_ideality", &NetworkParams::bsm_ideality)
        .def("validate", &NetworkParams::validate)
        .def_property_readonly("internode_length_km", &NetworkParams::internode_length_km)
        .def_property_readonly("success_probability", &NetworkParams::success_probability)
        .def_property_readonly("num_swaps", &NetworkParams::num_swaps)
        .def_property_readonly("time_unit_s", &NetworkParams::time_unit_s);

    py::class_<FidelityResult>(m, "FidelityResult")
        .def_readonly("fidelity", &FidelityResult::fidelity)
        .def_readonly("memory_time_s", &FidelityResult::memory_time_s)
        .def_readonly("clock_time_s", &FidelityResult::clock_time_s)
        .def("__repr__", [](const FidelityResult& r) {
            return "FidelityResult(fidelity=" + format_double(r.fidelity) + ", memory_time_s=" +
                   format_double(r.memory_time_s) + ", clock_time_s=" + format_double(r.clock_time_s) + ")";
        });

    m.def("channel_success_prob", &channel_success_prob, py::arg("internode_length_km"),
          py::arg("attenuation_length_km"));
    m.def("dephase_prob", &dephase_prob, py::arg("time_s"), py::arg("dephasing_time_s"));
    m.def(
        "alpha_beta",
        [](double px, double py_) {
            const auto ab = alpha_beta(px, py_);
            return py::make_tuple(ab.alpha, ab.beta);
        },
        py::arg("p_x"), py::arg("p_y"));
    m.def("closed_form_fidelity", &closed_form_fidelity, py::arg("total_memory_time_s"), py::arg("params"));
    m.def("hashing_yield", &hashing_yield, py::arg("fidelity"));
    m.def("hashing_rate", &hashing_rate, py::arg("fidelity"), py::arg("clock_time_s"));
    m.def("hashing_threshold", &hashing_threshold);
    m.def("normalized_time_to_seconds", &normalized_time_to_seconds, py::arg("units"), py::arg("params"));

    py::enum_<Protocol>(m, "Protocol")
        .value("sequential", Protocol::sequential)
        .value("parallel", Protocol::parallel);

    py::class_<LinkState>(m, "LinkState")
        .def(py::init([](const std::vector<bool>& links) {
            LinkState state(links.size());
            for (std::size_t i = 0; i < links.size(); ++i) {
                if (links[i]) state.establish(i);
            }
            return state;
        }))
        .def("__len__", &LinkState::size)
        .def("__getitem__", [](const LinkState& s, std::size_t i) {
            if (i >= s.size()) throw py::index_error();
            return s[i];
        });
    m.def("count_runs_of_true", &count_runs_of_true);

    py::class_<ProtocolOutcome>(m, "ProtocolOutcome")
        .def_readonly("memory_time", &ProtocolOutcome::memory_time)
        .def_readonly("clock_time", &ProtocolOutcome::clock_time)
        .def_readonly("attempts_total", &ProtocolOutcome::attempts_total)
        .def_readonly("rounds", &ProtocolOutcome::rounds);

    m.def(
        "run_sequential",
        [](const NetworkParams& params, std::uint64_t seed, const std::string& accounting, std::uint64_t cap) {
            TrialRng rng(seed);
            return run_sequential(params, rng, make_options(accounting, cap));
        },
        py::arg("params"), py::arg("seed"), py::arg("accounting") = "per-attempt",
        py::arg("attempt_cap") = kDefaultAttemptCap);
    m.def(
        "run_parallel",
        [](const NetworkParams& params, std::uint64_t seed, std::uint64_t cap) {
            TrialRng rng(seed);
            return run_parallel(params, rng, {Accounting::per_attempt, cap});
        },
        py::arg("params"), py::arg("seed"), py::arg("attempt_cap") = kDefaultAttemptCap);
    m.def(
        "simulate_trial",
        [](const NetworkParams& params, Protocol protocol, std::uint64_t seed, const std::string& accounting) {
            TrialRng rng(seed);
            return simulate_trial(params, protocol, rng, make_options(accounting, kDefaultAttemptCap));
        },
        py::arg("params"), py::arg("protocol"), py::arg("seed"), py::arg("accounting") = "per-attempt");

    m.def(
        "oracle_fidelity",
        [](const std::vector<double>& times, const std::vector<double>& lambdas, double t_dp) {
            return oracle::oracle_fidelity(times, lambdas, t_dp);
        },
        py::arg("times"), py::arg("lambdas"), py::arg("dephasing_time_s"));
    m.def(
        "oracle_chain_fidelity",
        [](const std::vector<double>& times, const std::vector<double>& lambdas, double t_dp) {
            const auto r = oracle::oracle_chain_fidelity(times, lambdas, t_dp);
            return py::dict(py::arg("entangled") = r.entangled, py::arg("total") = r.total,
                            py::arg("trace") = r.trace);
        },
        py::arg("times"), py::arg("lambdas"), py::arg("dephasing_time_s"));
    m.def("ghz_swap_check", &oracle::ghz_swap_check, py::arg("n"));
    m.def("expected_clock_sequential", &oracle::expected_clock_sequential, py::arg("params"));
    m.def(
        "expected_rounds_parallel",
        [](const NetworkParams& params, double tol) { return oracle::expected_rounds_parallel(params, tol); },
        py::arg("params"), py::arg("truncation_tol") = 1e-15);

    py::class_<SweepSpec>(m, "SweepSpec")
        .def(py::init<>())
        .def_readwrite("node_values", &SweepSpec::node_values)
        .def_readwrite("dephasing_values_s", &SweepSpec::dephasing_values_s)
        .def_readwrite("bsm_values", &SweepSpec::bsm_values)
        .def_readwrite("protocols", &SweepSpec::protocols)
        .def_readwrite("total_length_km", &SweepSpec::total_length_km)
        .def_readwrite("attenuation_length_km", &SweepSpec::attenuation_length_km)
        .def_readwrite("fiber_speed", &SweepSpec::fiber_speed_m_per_s)
        .def_readwrite("trials", &SweepSpec::trials)
        .def_readwrite("master_seed", &SweepSpec::master_seed)
        .def("validate", &SweepSpec::validate);
    m.def("parse_sweep_spec", [](const std::string& text) { return parse_sweep_spec(text); }, py::arg("text"));

    py::class_<CellStats>(m, "CellStats")
        .def_property_readonly("protocol", [](const CellStats& c) { return c.cell.protocol; })
        .def_property_readonly("num_nodes", [](const CellStats& c) { return c.cell.num_nodes; })
        .def_property_readonly("dephasing_time_s", [](const CellStats& c) { return c.cell.dephasing_time_s; })
        .def_property_readonly("bsm_ideality", [](const CellStats& c) { return c.cell.bsm_ideality; })
        .def_readonly("mean_fidelity", &CellStats::mean_fidelity)
        .def_readonly("fidelity_stderr", &CellStats::fidelity_stderr)
        .def_readonly("mean_hashing_rate", &CellStats::mean_hashing_rate)
        .def_readonly("rate_stderr", &CellStats::rate_stderr)
        .def_readonly("aggregate_hashing_rate", &CellStats::aggregate_hashing_rate)
        .def_readonly("mean_clock_s", &CellStats::mean_clock_s)
        .def_readonly("mean_memory_s", &CellStats::mean_memory_s)
        .def_readonly("trials", &CellStats::trials);

    m.def(
        "run_sweep",
        [](const SweepSpec& spec, unsigned workers) {
            py::gil_scoped_release release;
            return run_sweep(spec, workers);
        },
        py::arg("spec"), py::arg("workers") = 1);
    m.def("sweep_to_csv", &sweep_to_csv, py::arg("result"));
    m.def("sweep_to_json", &sweep_to_json, py::arg("result"));

    py::class_<CheckResult>(m, "CheckResult")
        .def_readonly("group", &CheckResult::group)
        .def_readonly("name", &CheckResult::name)
        .def_readonly("passed", &CheckResult::passed)
        .def_readonly("observed", &CheckResult::observed)
        .def_readonly("threshold", &CheckResult::threshold)
        .def_readonly("detail", &CheckResult::detail);
    m.def(
        "run_validation",
        [](std::optional<double> tolerance, const std::vector<std::string>& only, std::uint64_t trials) {
            ValidationOptions options;
            options.tolerance = tolerance;
            options.only = only;
            options.monte_carlo_trials = trials;
            py::gil_scoped_release release;
            return run_validation(options);
        },
        py::arg("tolerance") = py::none(), py::arg("only") = std::vector<std::string>{},
        py::arg("monte_carlo_trials") = 100'000);
}
