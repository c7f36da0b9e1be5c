#include "qrepsim/validation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "qrepsim/error.hpp"
#include "qrepsim/experiments.hpp"
#include "qrepsim/model.hpp"
#include "qrepsim/oracle.hpp"
#include "qrepsim/protocols.hpp"
#include "qrepsim/rng.hpp"

namespace qrepsim {

namespace {

constexpr double kIdentityTol = 1e-12;
constexpr double kClosedFormTol = 1e-10;
constexpr double kSigmas = 3.0;

class Validator {
public:
    explicit Validator(const ValidationOptions& options) : options_(options) {}

    double tol(double fallback) const { return options_.tolerance.value_or(fallback); }

    void record(std::string group, std::string name, double observed, double threshold, std::string detail = {}) {
        results_.push_back({std::move(group), std::move(name), observed <= threshold, observed, threshold,
                            std::move(detail)});
    }

    std::vector<CheckResult> take() { return std::move(results_); }

    const ValidationOptions& options() const { return options_; }

private:
    ValidationOptions options_;
    std::vector<CheckResult> results_;
};

NetworkParams chain_with_probability(int num_nodes, double p) {
    NetworkParams params;
    params.num_nodes = num_nodes;
    params.attenuation_length_km = 22.0;
    params.total_length_km = (num_nodes - 1) * 22.0 * -std::log(p);
    return params;
}

void check_closed_form(Validator& v) {
    TrialRng rng(derive_seed(v.options().seed, 1, 0));
    for (const std::size_t qubits : {std::size_t{4}, std::size_t{6}}) {
        double worst = 0.0;
        double worst_total = 0.0;
        for (int draw = 0; draw < 1000; ++draw) {
            const double t_dp = std::pow(10.0, -4.0 + 3.0 * rng.uniform());
            std::vector<double> times(qubits);
            for (auto& t : times) t = 3.0 * t_dp * rng.uniform();
            std::vector<double> lambdas(qubits / 2 - 1);
            for (auto& l : lambdas) l = 0.9 + 0.1 * rng.uniform();

            const auto chain = oracle::oracle_chain_fidelity(times, lambdas, t_dp);
            double total = 0.0;
            for (const double t : times) total += t;
            double lambda_product = 1.0;
            for (const double l : lambdas) lambda_product *= l;
            const double closed = lambda_product * 0.5 * (1.0 + std::exp(-total / t_dp));
            worst = std::max(worst, std::abs(chain.entangled - closed));
            worst_total = std::max(worst_total, std::abs(chain.total - (closed + (1.0 - lambda_product) / 4.0)));
        }
        const std::string label = std::to_string(qubits) + "-qubit";
        v.record("closed-form", label + " oracle vs lambda^m/2 (1+e^(-T/T_dp))", worst, v.tol(kClosedFormTol),
                 "1000 random draws");
        v.record("closed-form", label + " full overlap incl. depolarized branch", worst_total,
                 v.tol(kClosedFormTol), "expects entangled + (1 - prod lambda)/4");
    }
}

void check_permutation(Validator& v) {
    TrialRng rng(derive_seed(v.options().seed, 2, 0));
    const std::array<double, 2> lambdas{0.97, 0.93};
    double worst = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
        const double t_dp = 1e-2;
        const double total = 3.0 * t_dp * rng.uniform();
        double lo = 2.0;
        double hi = -1.0;
        for (int split = 0; split < 20; ++split) {
            std::array<double, 6> weights{};
            double sum = 0.0;
            for (auto& w : weights) sum += (w = rng.uniform());
            std::array<double, 6> times{};
            for (std::size_t i = 0; i < 6; ++i) times[i] = total * weights[i] / sum;
            const double f = oracle::oracle_fidelity(times, lambdas, t_dp);
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
        worst = std::max(worst, hi - lo);
    }
    v.record("permutation", "6-qubit fidelity constant across 20 splits of T", worst, v.tol(kIdentityTol),
             "100 random totals");
}

void check_commutation(Validator& v) {
    TrialRng rng(derive_seed(v.options().seed, 3, 0));
    double worst = 0.0;
    for (int draw = 0; draw < 200; ++draw) {
        const double t_dp = 1e-3;
        std::vector<double> times(draw % 2 == 0 ? 4 : 6);
        for (auto& t : times) t = 3.0 * t_dp * rng.uniform();
        std::vector<double> lambdas(times.size() / 2 - 1);
        for (auto& l : lambdas) l = 0.5 + 0.5 * rng.uniform();
        const auto before = oracle::oracle_chain_fidelity(times, lambdas, t_dp, oracle::DephasingOrder::before_swaps);
        const auto after = oracle::oracle_chain_fidelity(times, lambdas, t_dp, oracle::DephasingOrder::after_swaps);
        worst = std::max({worst, std::abs(before.entangled - after.entangled), std::abs(before.total - after.total)});
    }
    v.record("commutation", "BSM depolarizing commutes with end-qubit dephasing", worst, v.tol(kIdentityTol));
}

void check_channels(Validator& v) {
    TrialRng rng(derive_seed(v.options().seed, 4, 0));
    double trace_err = 0.0;
    double herm_err = 0.0;
    double neg_eig = 0.0;
    auto inspect = [&](const oracle::DensityMatrix& rho) {
        trace_err = std::max(trace_err, std::abs(rho.trace() - 1.0));
        herm_err = std::max(herm_err, rho.hermiticity_error());
        neg_eig = std::max(neg_eig, -rho.min_eigenvalue());
    };
    for (int draw = 0; draw < 50; ++draw) {
        const double t_dp = 1e-2;
        auto rho = oracle::bell_pair().kron(oracle::bell_pair()).kron(oracle::bell_pair());
        for (int q = 0; q < 6; ++q) {
            rho = oracle::apply_dephasing(rho, q, 3.0 * t_dp * rng.uniform(), t_dp);
            inspect(rho);
        }
        rho = oracle::apply_depolarizing_2q(rho, 1, 2, rng.uniform());
        inspect(rho);
        rho = oracle::bsm_project(rho, 1, 2);
        inspect(rho);
        rho = oracle::apply_depolarizing_2q(rho, 1, 2, rng.uniform());
        inspect(rho);
        rho = oracle::bsm_project(rho, 1, 2);
        inspect(rho);
    }
    v.record("channels", "trace preserved", trace_err, v.tol(kIdentityTol));
    v.record("channels", "Hermiticity preserved", herm_err, v.tol(kIdentityTol));
    v.record("channels", "positive semidefinite (-min eigenvalue)", neg_eig, 1e-10);
}

void check_composition(Validator& v) {
    TrialRng rng(derive_seed(v.options().seed, 5, 0));
    double worst4 = 0.0;
    double worst6 = 0.0;
    for (int draw = 0; draw < 1000; ++draw) {
        // Times in units of T_dp recovered from the dephasing probabilities.
        std::array<double, 6> p{};
        std::array<double, 6> t{};
        for (std::size_t i = 0; i < 6; ++i) {
            p[i] = 0.5 * rng.uniform();
            t[i] = -std::log1p(-2.0 * p[i]);
        }
        const auto ab = alpha_beta(p[0], p[1]);
        const auto cd = alpha_beta(p[2], p[3]);
        const auto ef = alpha_beta(p[4], p[5]);
        const double alpha_ad = ab.alpha * cd.alpha + ab.beta * cd.beta;
        const double beta_ad = ab.alpha * cd.beta + ab.beta * cd.alpha;
        const double alpha_af = alpha_ad * ef.alpha + beta_ad * ef.beta;
        const double t4 = t[0] + t[1] + t[2] + t[3];
        const double t6 = t4 + t[4] + t[5];
        worst4 = std::max(worst4, std::abs(alpha_ad - 0.5 * (1.0 + std::exp(-t4))));
        worst6 = std::max(worst6, std::abs(alpha_af - 0.5 * (1.0 + std::exp(-t6))));
    }
    v.record("composition", "alpha_AB alpha_CD + beta_AB beta_CD = (1+e^(-T/T_dp))/2", worst4, v.tol(kIdentityTol));
    v.record("composition", "alpha_AD alpha_EF + beta_AD beta_EF = (1+e^(-T/T_dp))/2", worst6, v.tol(kIdentityTol));
}

void check_ghz(Validator& v) {
    for (int n = 2; n <= 11; ++n) {
        v.record("ghz", "GHZ-" + std::to_string(n) + " swap overlap", std::abs(1.0 - oracle::ghz_swap_check(n)),
                 v.tol(kIdentityTol));
    }
}

void check_expectation(Validator& v) {
    struct Case {
        int nodes;
        NetworkParams params;
    };
    NetworkParams fifty_km;
    fifty_km.num_nodes = 25;
    const std::array<Case, 3> cases{{{5, chain_with_probability(5, 0.5)},
                                     {10, chain_with_probability(10, 0.9)},
                                     {25, fifty_km}}};
    const std::uint64_t trials = v.options().monte_carlo_trials;
    std::uint64_t index = 0;
    for (const auto& c : cases) {
        const double p = c.params.success_probability();
        std::vector<double> clock(trials);
        std::vector<double> rounds(trials);
        for (std::uint64_t t = 0; t < trials; ++t) {
            TrialRng seq_rng(derive_seed(v.options().seed, 100 + index, t));
            clock[t] = static_cast<double>(run_sequential(c.params, seq_rng).clock_time);
            TrialRng par_rng(derive_seed(v.options().seed, 200 + index, t));
            rounds[t] = static_cast<double>(run_parallel(c.params, par_rng).rounds);
        }
        ++index;
        auto z_score = [](const std::vector<double>& xs, double expected) {
            double mean = 0.0;
            for (const double x : xs) mean += x;
            mean /= static_cast<double>(xs.size());
            double var = 0.0;
            for (const double x : xs) var += (x - mean) * (x - mean);
            var /= static_cast<double>(xs.size() - 1);
            const double se = std::sqrt(var / static_cast<double>(xs.size()));
            return std::pair{mean, se > 0.0 ? std::abs(mean - expected) / se : std::abs(mean - expected)};
        };
        std::ostringstream label;
        label << "N=" << c.nodes << ", p=" << format_double(p);
        const double seq_expected = oracle::expected_clock_sequential(c.params);
        const auto [seq_mean, seq_z] = z_score(clock, seq_expected);
        v.record("expectation", "sequential mean T_clock (" + label.str() + ")", seq_z, kSigmas,
                 "mean " + format_double(seq_mean) + " vs " + format_double(seq_expected) + ", z-score");
        const double par_expected = oracle::expected_rounds_parallel(c.params);
        const auto [par_mean, par_z] = z_score(rounds, par_expected);
        v.record("expectation", "parallel mean rounds (" + label.str() + ")", par_z, kSigmas,
                 "mean " + format_double(par_mean) + " vs " + format_double(par_expected) + ", z-score");
    }
}

}  // namespace

const std::vector<std::string>& validation_groups() {
    static const std::vector<std::string> groups{"closed-form", "permutation", "commutation", "channels",
                                                 "composition", "ghz",         "expectation"};
    return groups;
}

std::vector<CheckResult> run_validation(const ValidationOptions& options) {
    const auto& groups = validation_groups();
    for (const auto& g : options.only) {
        if (std::find(groups.begin(), groups.end(), g) == groups.end()) {
            throw InvalidParameter("unknown validation group '" + g + "'");
        }
    }
    auto wanted = [&](const std::string& g) {
        return options.only.empty() || std::find(options.only.begin(), options.only.end(), g) != options.only.end();
    };

    Validator v(options);
    if (wanted("closed-form")) check_closed_form(v);
    if (wanted("permutation")) check_permutation(v);
    if (wanted("commutation")) check_commutation(v);
    if (wanted("channels")) check_channels(v);
    if (wanted("composition")) check_composition(v);
    if (wanted("ghz")) check_ghz(v);
    if (wanted("expectation")) check_expectation(v);
    return v.take();
}

}  // namespace qrepsim
