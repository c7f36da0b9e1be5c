#include "qrepsim/model.hpp"

#include <cmath>
#include <string>

#include "qrepsim/error.hpp"

namespace qrepsim {

namespace {

// x log2 x with the entropy convention 0 log 0 = 0.
double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidParameter(what);
}

}  // namespace

void NetworkParams::validate() const {
    require(num_nodes >= 2, "num_nodes must satisfy N >= 2 (got " + std::to_string(num_nodes) + ")");
    require(total_length_km > 0.0 && std::isfinite(total_length_km), "total_length_km must be > 0");
    require(attenuation_length_km > 0.0, "attenuation_length_km must be > 0");
    require(fiber_speed_m_per_s > 0.0 && std::isfinite(fiber_speed_m_per_s), "fiber_speed_m_per_s must be > 0");
    require(dephasing_time_s > 0.0, "dephasing_time_s must be > 0");
    require(bsm_ideality >= 0.0 && bsm_ideality <= 1.0, "bsm_ideality must lie in [0, 1]");
}

double NetworkParams::success_probability() const {
    return channel_success_prob(internode_length_km(), attenuation_length_km);
}

double NetworkParams::time_unit_s() const { return internode_length_km() * 1.0e3 / fiber_speed_m_per_s; }

double channel_success_prob(double internode_length_km, double attenuation_length_km) {
    require(internode_length_km > 0.0, "internode length must be > 0");
    require(attenuation_length_km > 0.0, "attenuation length must be > 0");
    return std::exp(-internode_length_km / attenuation_length_km);
}

double dephase_prob(double time_s, double dephasing_time_s) {
    require(time_s >= 0.0, "memory time must be >= 0");
    require(dephasing_time_s > 0.0, "dephasing time must be > 0");
    return -0.5 * std::expm1(-time_s / dephasing_time_s);
}

AlphaBeta alpha_beta(double p_x, double p_y) {
    require(p_x >= 0.0 && p_x <= 0.5 && p_y >= 0.0 && p_y <= 0.5, "dephasing probabilities must lie in [0, 1/2]");
    const double beta = p_x + p_y - 2.0 * p_x * p_y;
    return {1.0 - beta, beta};
}

double closed_form_fidelity(double total_memory_time_s, const NetworkParams& params) {
    params.validate();
    require(total_memory_time_s >= 0.0, "total memory time must be >= 0");
    const double swaps = std::pow(params.bsm_ideality, params.num_swaps());
    return 0.5 * swaps * (1.0 + std::exp(-total_memory_time_s / params.dephasing_time_s));
}

double hashing_yield_raw(double fidelity) {
    require(fidelity >= 0.0 && fidelity <= 1.0, "fidelity must lie in [0, 1]");
    const double rest = 1.0 - fidelity;
    // (1-F) log2((1-F)/3) = xlog2x(1-F) - (1-F) log2 3
    return 1.0 + xlog2x(fidelity) + xlog2x(rest) - rest * std::log2(3.0);
}

double hashing_yield(double fidelity) {
    const double y = hashing_yield_raw(fidelity);
    return y > 0.0 ? y : 0.0;
}

double hashing_rate(double fidelity, double clock_time_s) {
    require(clock_time_s > 0.0, "clock time must be > 0");
    return hashing_yield(fidelity) / clock_time_s;
}

double hashing_threshold() {
    double lo = 0.25;
    double hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (hashing_yield_raw(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double normalized_time_to_seconds(double units, const NetworkParams& params) {
    require(units >= 0.0, "normalized time must be >= 0");
    return units * params.time_unit_s();
}

}  // namespace qrepsim
