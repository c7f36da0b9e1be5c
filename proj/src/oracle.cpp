#include "qrepsim/oracle.hpp"

#include <cmath>
#include <string>

#include "qrepsim/error.hpp"

namespace qrepsim::oracle {

namespace {

int qubits_for_dim(Eigen::Index dim) {
    int k = 0;
    while ((Eigen::Index{1} << k) < dim) ++k;
    if ((Eigen::Index{1} << k) != dim) throw InvalidParameter("state dimension must be a power of two");
    return k;
}

void check_qubit(int qubit, int num_qubits) {
    if (qubit < 0 || qubit >= num_qubits) {
        throw InvalidParameter("qubit index " + std::to_string(qubit) + " out of range for " +
                               std::to_string(num_qubits) + " qubits");
    }
}

void check_pair(int i, int j, int num_qubits) {
    check_qubit(i, num_qubits);
    check_qubit(j, num_qubits);
    if (i == j) throw InvalidParameter("two-qubit operation needs distinct qubits");
}

int bit_of(std::size_t index, int qubit, int num_qubits) {
    return static_cast<int>((index >> (num_qubits - 1 - qubit)) & 1U);
}

// Full index over `num_qubits` built from `rest` (the other qubits, in order)
// with qubit i set to bit_i and qubit j set to bit_j.
std::size_t expand(std::size_t rest, int i, int bit_i, int j, int bit_j, int num_qubits) {
    const int rest_qubits = num_qubits - 2;
    int next = 0;
    std::size_t full = 0;
    for (int q = 0; q < num_qubits; ++q) {
        int bit;
        if (q == i) {
            bit = bit_i;
        } else if (q == j) {
            bit = bit_j;
        } else {
            bit = bit_of(rest, next++, rest_qubits);
        }
        full = (full << 1) | static_cast<std::size_t>(bit);
    }
    return full;
}

Complex phi_plus_overlap(const Eigen::MatrixXcd& m) {
    return 0.5 * (m(0, 0) + m(0, 3) + m(3, 0) + m(3, 3));
}

}  // namespace

DensityMatrix::DensityMatrix(Eigen::MatrixXcd m) : m_(std::move(m)), num_qubits_(0) {
    if (m_.rows() != m_.cols()) throw InvalidParameter("density matrix must be square");
    num_qubits_ = qubits_for_dim(m_.rows());
}

DensityMatrix DensityMatrix::maximally_mixed(int num_qubits) {
    const Eigen::Index dim = Eigen::Index{1} << num_qubits;
    return DensityMatrix(Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

DensityMatrix DensityMatrix::kron(const DensityMatrix& other) const {
    const Eigen::Index a = m_.rows();
    const Eigen::Index b = other.m_.rows();
    Eigen::MatrixXcd out(a * b, a * b);
    for (Eigen::Index r = 0; r < a; ++r) {
        for (Eigen::Index c = 0; c < a; ++c) {
            out.block(r * b, c * b, b, b) = m_(r, c) * other.m_;
        }
    }
    return DensityMatrix(std::move(out));
}

Statevector::Statevector(Eigen::VectorXcd amplitudes) : v_(std::move(amplitudes)), num_qubits_(0) {
    num_qubits_ = qubits_for_dim(v_.size());
}

Statevector Statevector::kron(const Statevector& other) const {
    const Eigen::Index b = other.v_.size();
    Eigen::VectorXcd out(v_.size() * b);
    for (Eigen::Index r = 0; r < v_.size(); ++r) out.segment(r * b, b) = v_(r) * other.v_;
    return Statevector(std::move(out));
}

DensityMatrix bell_pair() {
    const Statevector phi = bell_statevector();
    return DensityMatrix(phi.amplitudes() * phi.amplitudes().adjoint());
}

Statevector bell_statevector() { return ghz_statevector(2); }

Statevector ghz_statevector(int num_qubits) {
    if (num_qubits < 1 || num_qubits > 24) throw InvalidParameter("GHZ arity out of range");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index{1} << num_qubits);
    v(0) = v(v.size() - 1) = 1.0 / std::sqrt(2.0);
    return Statevector(std::move(v));
}

double phi_plus_fidelity(const DensityMatrix& rho) {
    if (rho.num_qubits() != 2) throw InvalidParameter("phi+ fidelity needs a two-qubit state");
    return phi_plus_overlap(rho.matrix()).real();
}

DensityMatrix apply_dephasing(const DensityMatrix& rho, int qubit, double time_s, double dephasing_time_s) {
    const int k = rho.num_qubits();
    check_qubit(qubit, k);
    const double q = dephase_prob(time_s, dephasing_time_s);
    // Z rho Z flips the sign of entries whose row and column bits differ.
    Eigen::MatrixXcd out = rho.matrix();
    const double flipped = 1.0 - 2.0 * q;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        for (Eigen::Index c = 0; c < out.cols(); ++c) {
            if (bit_of(static_cast<std::size_t>(r), qubit, k) != bit_of(static_cast<std::size_t>(c), qubit, k)) {
                out(r, c) *= flipped;
            }
        }
    }
    return DensityMatrix(std::move(out));
}

DensityMatrix apply_depolarizing_2q(const DensityMatrix& rho, int qubit_i, int qubit_j, double lambda_bsm) {
    const int k = rho.num_qubits();
    check_pair(qubit_i, qubit_j, k);
    if (!(lambda_bsm >= 0.0 && lambda_bsm <= 1.0)) throw InvalidParameter("BSM ideality must lie in [0, 1]");

    const std::size_t rest_dim = std::size_t{1} << (k - 2);
    Eigen::MatrixXcd reduced = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rest_dim),
                                                      static_cast<Eigen::Index>(rest_dim));
    for (std::size_t a = 0; a < rest_dim; ++a) {
        for (std::size_t b = 0; b < rest_dim; ++b) {
            Complex sum = 0.0;
            for (int x = 0; x < 4; ++x) {
                sum += rho(expand(a, qubit_i, x >> 1, qubit_j, x & 1, k), expand(b, qubit_i, x >> 1, qubit_j, x & 1, k));
            }
            reduced(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = sum;
        }
    }

    Eigen::MatrixXcd out = lambda_bsm * rho.matrix();
    const double mix = (1.0 - lambda_bsm) / 4.0;
    for (std::size_t a = 0; a < rest_dim; ++a) {
        for (std::size_t b = 0; b < rest_dim; ++b) {
            const Complex v = mix * reduced(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            for (int x = 0; x < 4; ++x) {
                out(static_cast<Eigen::Index>(expand(a, qubit_i, x >> 1, qubit_j, x & 1, k)),
                    static_cast<Eigen::Index>(expand(b, qubit_i, x >> 1, qubit_j, x & 1, k))) += v;
            }
        }
    }
    return DensityMatrix(std::move(out));
}

DensityMatrix bsm_project(const DensityMatrix& rho, int qubit_i, int qubit_j, bool normalize) {
    const int k = rho.num_qubits();
    check_pair(qubit_i, qubit_j, k);
    const std::size_t rest_dim = std::size_t{1} << (k - 2);
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(rest_dim), static_cast<Eigen::Index>(rest_dim));
    for (std::size_t a = 0; a < rest_dim; ++a) {
        for (std::size_t b = 0; b < rest_dim; ++b) {
            Complex sum = 0.0;
            for (int x = 0; x < 2; ++x) {
                for (int y = 0; y < 2; ++y) {
                    sum += rho(expand(a, qubit_i, x, qubit_j, x, k), expand(b, qubit_i, y, qubit_j, y, k));
                }
            }
            out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = 0.5 * sum;
        }
    }
    if (normalize) {
        const double probability = out.trace().real();
        if (!(probability > 1e-300)) throw DegenerateProjection("phi+ outcome has zero probability");
        out /= probability;
    }
    return DensityMatrix(std::move(out));
}

Statevector bsm_project(const Statevector& psi, int qubit_i, int qubit_j) {
    const int k = psi.num_qubits();
    check_pair(qubit_i, qubit_j, k);
    const std::size_t rest_dim = std::size_t{1} << (k - 2);
    Eigen::VectorXcd out(static_cast<Eigen::Index>(rest_dim));
    const double amp = 1.0 / std::sqrt(2.0);
    for (std::size_t a = 0; a < rest_dim; ++a) {
        out(static_cast<Eigen::Index>(a)) =
            amp * (psi.amplitudes()(static_cast<Eigen::Index>(expand(a, qubit_i, 0, qubit_j, 0, k))) +
                   psi.amplitudes()(static_cast<Eigen::Index>(expand(a, qubit_i, 1, qubit_j, 1, k))));
    }
    return Statevector(std::move(out));
}

ChainFidelity oracle_chain_fidelity(std::span<const double> times, std::span<const double> lambdas,
                                    double dephasing_time_s, DephasingOrder order) {
    if (times.size() != 4 && times.size() != 6) {
        throw InvalidParameter("oracle chain needs 4 or 6 per-qubit times (got " + std::to_string(times.size()) + ")");
    }
    const std::size_t pairs = times.size() / 2;
    if (lambdas.size() != pairs - 1) {
        throw InvalidParameter("oracle chain of " + std::to_string(pairs) + " pairs needs " +
                               std::to_string(pairs - 1) + " BSM idealities");
    }

    DensityMatrix state = bell_pair();
    for (std::size_t p = 1; p < pairs; ++p) state = state.kron(bell_pair());

    const int last = static_cast<int>(times.size()) - 1;
    for (int q = 0; q <= last; ++q) {
        const bool end_qubit = q == 0 || q == last;
        if (order == DephasingOrder::before_swaps || !end_qubit) {
            state = apply_dephasing(state, q, times[static_cast<std::size_t>(q)], dephasing_time_s);
        }
    }

    // The ideal-swap branch and the depolarized branches evolve separately so
    // the phi+ weight of the ideal branch can be read off at the end. Their
    // sum is the exact state.
    Eigen::MatrixXcd coherent = state.matrix();
    Eigen::MatrixXcd classical = Eigen::MatrixXcd::Zero(coherent.rows(), coherent.cols());
    for (const double lambda : lambdas) {
        const DensityMatrix coh(coherent);
        const DensityMatrix cls(classical);
        const DensityMatrix scrambled = apply_depolarizing_2q(coh, 1, 2, 0.0);
        Eigen::MatrixXcd next_coherent = bsm_project(coh, 1, 2, false).matrix() * lambda;
        Eigen::MatrixXcd next_classical =
            bsm_project(DensityMatrix((1.0 - lambda) * scrambled.matrix() +
                                      apply_depolarizing_2q(cls, 1, 2, lambda).matrix()),
                        1, 2, false)
                .matrix();
        const double probability = (next_coherent.trace() + next_classical.trace()).real();
        if (!(probability > 1e-300)) throw DegenerateProjection("phi+ outcome has zero probability");
        coherent = next_coherent / probability;
        classical = next_classical / probability;
    }

    if (order == DephasingOrder::after_swaps) {
        DensityMatrix coh(coherent);
        DensityMatrix cls(classical);
        coh = apply_dephasing(apply_dephasing(coh, 0, times.front(), dephasing_time_s), 1, times.back(),
                              dephasing_time_s);
        cls = apply_dephasing(apply_dephasing(cls, 0, times.front(), dephasing_time_s), 1, times.back(),
                              dephasing_time_s);
        coherent = coh.matrix();
        classical = cls.matrix();
    }

    ChainFidelity out;
    out.entangled = phi_plus_overlap(coherent).real();
    out.total = out.entangled + phi_plus_overlap(classical).real();
    out.trace = (coherent.trace() + classical.trace()).real();
    return out;
}

double oracle_fidelity(std::span<const double> times, std::span<const double> lambdas, double dephasing_time_s) {
    return oracle_chain_fidelity(times, lambdas, dephasing_time_s).entangled;
}

double ghz_swap_check(int n) {
    if (n < 2 || n > 11) throw InvalidParameter("GHZ arity must satisfy 2 <= n <= 11 (got " + std::to_string(n) + ")");
    // Register: A_1..A_{n-1}, B | C, D. Swap B through the pair (C, D).
    const Statevector joint = ghz_statevector(n).kron(bell_statevector());
    Statevector swapped = bsm_project(joint, n - 1, n);
    const double norm = swapped.norm();
    if (!(norm > 0.0)) throw DegenerateProjection("phi+ outcome has zero probability");
    const Eigen::VectorXcd normalized = swapped.amplitudes() / norm;
    return std::norm(ghz_statevector(n).amplitudes().dot(normalized));
}

double expected_clock_sequential(const NetworkParams& params) {
    params.validate();
    const double p = params.success_probability();
    if (!(p > 0.0)) throw InvalidParameter("expected clock time needs a success probability > 0");
    return 2.0 * params.num_links() / p;
}

double expected_rounds_parallel(const NetworkParams& params, double truncation_tol) {
    params.validate();
    return expected_rounds_parallel(params.num_links(), params.success_probability(), truncation_tol);
}

double expected_rounds_parallel(int num_links, double p, double truncation_tol) {
    if (!(p > 0.0 && p <= 1.0)) throw InvalidParameter("expected rounds needs a success probability in (0, 1]");
    if (num_links < 1) throw InvalidParameter("expected rounds needs at least one link");
    const double q = 1.0 - p;
    // P(max > k) = 1 - (1 - q^k)^n
    double sum = 0.0;
    for (int k = 0;; ++k) {
        const double qk = std::pow(q, k);
        const double term = -std::expm1(num_links * std::log1p(-qk));
        sum += term;
        if (k > 0 && term < truncation_tol) break;
    }
    return sum;
}

}  // namespace qrepsim::oracle
