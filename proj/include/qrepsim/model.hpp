#pragma once

// Closed-form noise model for Bell-pair distribution over a linear repeater
// chain: fiber loss, memory dephasing, imperfect Bell-state measurement and
// the hashing-bound distillation metrics.

#include <cstdint>
#include <utility>

namespace qrepsim {

struct NetworkParams {
    int num_nodes = 2;                    // sender + receiver + repeaters
    double total_length_km = 50.0;
    double attenuation_length_km = 22.0;
    double fiber_speed_m_per_s = 2.0e8;
    double dephasing_time_s = 1.0e-2;
    double bsm_ideality = 1.0;

    // Throws InvalidParameter naming the first violated invariant.
    void validate() const;

    double internode_length_km() const { return total_length_km / (num_nodes - 1); }
    int num_links() const { return num_nodes - 1; }
    int num_swaps() const { return num_nodes - 2; }
    // Per-attempt entanglement-generation success probability.
    double success_probability() const;
    // Duration of one normalized time unit, L/c, in seconds.
    double time_unit_s() const;
};

struct FidelityResult {
    double fidelity = 0.0;
    double memory_time_s = 0.0;
    double clock_time_s = 0.0;
};

/// Channel efficiency e^(-L/L_att); used as the success probability of a
/// single entanglement-generation attempt over one fiber segment.
double channel_success_prob(double internode_length_km, double attenuation_length_km);

/// Probability (1 - e^(-t/T_dp))/2 that a qubit held for `time_s` has suffered
/// a Z flip.
double dephase_prob(double time_s, double dephasing_time_s);

struct AlphaBeta {
    double alpha;  // weight on phi+
    double beta;   // weight on phi-
};

/// Bell-diagonal weights of a phi+ pair whose qubits dephase independently
/// with probabilities p_x and p_y.
AlphaBeta alpha_beta(double p_x, double p_y);

/// Fidelity lambda^m / 2 * (1 + e^(-T/T_dp)) of the end-to-end pair after
/// m = N-2 swaps, given the cumulative memory time T of every qubit.
double closed_form_fidelity(double total_memory_time_s, const NetworkParams& params);

/// Raw hashing yield 1 + F log2 F + (1-F) log2((1-F)/3); negative below the
/// distillation threshold.
double hashing_yield_raw(double fidelity);

/// Hashing yield clamped at zero.
double hashing_yield(double fidelity);

/// Distilled pairs per second when one pair of the given fidelity is
/// delivered every `clock_time_s`.
double hashing_rate(double fidelity, double clock_time_s);

/// Unique root of the raw hashing yield in (1/4, 1), found by bisection.
double hashing_threshold();

double normalized_time_to_seconds(double units, const NetworkParams& params);

}  // namespace qrepsim
