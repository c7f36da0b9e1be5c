#include "qrepsim/protocols.hpp"

#include <string>

#include "qrepsim/error.hpp"

namespace qrepsim {

std::string_view to_string(Protocol protocol) {
    return protocol == Protocol::sequential ? "sequential" : "parallel";
}

Protocol parse_protocol(std::string_view name) {
    if (name == "sequential") return Protocol::sequential;
    if (name == "parallel") return Protocol::parallel;
    throw InvalidParameter("unknown protocol '" + std::string(name) + "' (expected sequential or parallel)");
}

std::string_view to_string(Accounting accounting) {
    return accounting == Accounting::per_attempt ? "per-attempt" : "literal";
}

Accounting parse_accounting(std::string_view name) {
    if (name == "per-attempt") return Accounting::per_attempt;
    if (name == "literal") return Accounting::literal;
    throw InvalidParameter("unknown accounting mode '" + std::string(name) + "' (expected per-attempt or literal)");
}

int count_runs_of_true(const LinkState& links) {
    int runs = 0;
    bool previous = false;
    for (std::size_t i = 0; i < links.size(); ++i) {
        if (links[i] && !previous) ++runs;
        previous = links[i];
    }
    return runs;
}

bool all_swapped(const LinkState& links) {
    for (std::size_t i = 0; i < links.size(); ++i) {
        if (!links[i]) return false;
    }
    return true;
}

namespace {

void check_cap(std::uint64_t attempts, const ProtocolOptions& options) {
    if (attempts > options.attempt_cap) {
        throw NonTermination("protocol exceeded the attempt cap of " + std::to_string(options.attempt_cap) +
                             " generation attempts");
    }
}

RoundOutcome round_in_place(LinkState& links, double p, TrialRng& rng) {
    RoundOutcome out;
    out.memory_time = kHeldMemory * count_runs_of_true(links);
    for (std::size_t i = 0; i < links.size(); ++i) {
        if (links[i]) continue;
        ++out.attempts;
        if (random_success(rng, p)) {
            links.establish(i);
            out.memory_time += kSuccessMemory;
        }
    }
    return out;
}

}  // namespace

ProtocolOutcome run_sequential(const NetworkParams& params, TrialRng& rng, const ProtocolOptions& options) {
    params.validate();
    const double p = params.success_probability();
    ProtocolOutcome out;
    for (int link = 0; link < params.num_links(); ++link) {
        const bool holding = link > 0;
        for (;;) {
            ++out.attempts_total;
            check_cap(out.attempts_total, options);
            const bool success = random_success(rng, p);
            if (options.accounting == Accounting::per_attempt) {
                out.clock_time += kClockStep;
                if (holding) out.memory_time += kHeldMemory;
                if (success) out.memory_time += kSuccessMemory;
            } else if (success) {
                out.memory_time += kSuccessMemory;
                if (holding) out.memory_time += kHeldMemory;
                out.clock_time += kClockStep;
            }
            if (success) break;
        }
    }
    return out;
}

ProtocolOutcome run_parallel(const NetworkParams& params, TrialRng& rng, const ProtocolOptions& options) {
    params.validate();
    const double p = params.success_probability();
    LinkState links(static_cast<std::size_t>(params.num_links()));
    ProtocolOutcome out;
    while (!all_swapped(links)) {
        const RoundOutcome round = round_in_place(links, p, rng);
        out.memory_time += round.memory_time;
        out.clock_time += kClockStep;
        out.attempts_total += round.attempts;
        ++out.rounds;
        check_cap(out.attempts_total, options);
    }
    return out;
}

ProtocolOutcome run_protocol(Protocol protocol, const NetworkParams& params, TrialRng& rng,
                             const ProtocolOptions& options) {
    return protocol == Protocol::sequential ? run_sequential(params, rng, options)
                                            : run_parallel(params, rng, options);
}

RoundOutcome parallel_round(LinkState links, double p, TrialRng& rng) {
    if (p < 0.0 || p > 1.0) throw InvalidParameter("success probability must lie in [0, 1]");
    RoundOutcome out = round_in_place(links, p, rng);
    out.links = std::move(links);
    return out;
}

FidelityResult simulate_trial(const NetworkParams& params, Protocol protocol, TrialRng& rng,
                              const ProtocolOptions& options) {
    const ProtocolOutcome outcome = run_protocol(protocol, params, rng, options);
    FidelityResult result;
    result.memory_time_s = normalized_time_to_seconds(static_cast<double>(outcome.memory_time), params);
    result.clock_time_s = normalized_time_to_seconds(static_cast<double>(outcome.clock_time), params);
    result.fidelity = closed_form_fidelity(result.memory_time_s, params);
    return result;
}

}  // namespace qrepsim
