#pragma once

// Monte Carlo engines for asynchronous Bell-pair distribution. Both protocols
// only track two integers per trial, the cumulative memory time T and the
// wall-clock duration T_clock, in units of L/c; the closed-form fidelity law
// turns T into a fidelity afterwards.

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

#include "qrepsim/model.hpp"
#include "qrepsim/rng.hpp"

namespace qrepsim {

// Normalized timing constants (units of L/c).
inline constexpr std::int64_t kClockStep = 2;     // one generation attempt, there and back
inline constexpr std::int64_t kSuccessMemory = 3; // sender qubit waits 2, receiver qubit 1
inline constexpr std::int64_t kHeldMemory = 4;    // two held chain-end qubits during one attempt

inline constexpr std::uint64_t kDefaultAttemptCap = 10'000'000;

enum class Protocol { sequential, parallel };

std::string_view to_string(Protocol protocol);
// Throws InvalidParameter for unknown names.
Protocol parse_protocol(std::string_view name);

// How the sequential protocol charges clock and held-qubit memory time.
enum class Accounting {
    per_attempt,  // every attempt costs a clock step and the held-qubit penalty
    literal,      // both charged only on the successful attempt
};

std::string_view to_string(Accounting accounting);
Accounting parse_accounting(std::string_view name);

// Entanglement links of an N-node chain; entry i joins node i and node i+1.
class LinkState {
public:
    LinkState() = default;
    explicit LinkState(std::size_t num_links) : links_(num_links, false) {}
    LinkState(std::initializer_list<bool> links) : links_(links) {}

    std::size_t size() const { return links_.size(); }
    bool operator[](std::size_t i) const { return links_[i]; }
    void establish(std::size_t i) { links_[i] = true; }

    bool operator==(const LinkState&) const = default;

private:
    std::vector<bool> links_;
};

// Number of maximal contiguous blocks of established links.
int count_runs_of_true(const LinkState& links);
bool all_swapped(const LinkState& links);

struct ProtocolOutcome {
    std::int64_t memory_time = 0;  // T, units of L/c
    std::int64_t clock_time = 0;   // T_clock, units of L/c
    std::uint64_t attempts_total = 0;
    std::uint64_t rounds = 0;      // parallel only

    bool operator==(const ProtocolOutcome&) const = default;
};

struct ProtocolOptions {
    Accounting accounting = Accounting::per_attempt;
    std::uint64_t attempt_cap = kDefaultAttemptCap;
};

ProtocolOutcome run_sequential(const NetworkParams& params, TrialRng& rng, const ProtocolOptions& options = {});
ProtocolOutcome run_parallel(const NetworkParams& params, TrialRng& rng, const ProtocolOptions& options = {});
ProtocolOutcome run_protocol(Protocol protocol, const NetworkParams& params, TrialRng& rng,
                             const ProtocolOptions& options = {});

struct RoundOutcome {
    LinkState links;
    std::int64_t memory_time = 0;
    std::uint64_t attempts = 0;
};

// One parallel round: charges kHeldMemory per run of established links (as
// they stood before the round), then every missing link makes one attempt.
RoundOutcome parallel_round(LinkState links, double p, TrialRng& rng);

// Runs one protocol trial and converts its times to seconds and a fidelity.
FidelityResult simulate_trial(const NetworkParams& params, Protocol protocol, TrialRng& rng,
                              const ProtocolOptions& options = {});

}  // namespace qrepsim
