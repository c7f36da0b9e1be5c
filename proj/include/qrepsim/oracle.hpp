#pragma once

// Brute-force quantum-state engine used to check the closed-form fidelity
// law. Dense complex matrices, at most six qubits for density matrices and a
// dozen or so for statevectors.
//
// Qubit 0 is the most significant bit of a computational-basis index.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qrepsim/model.hpp"

namespace qrepsim::oracle {

using Complex = std::complex<double>;

class DensityMatrix {
public:
    explicit DensityMatrix(Eigen::MatrixXcd m);

    // Maximally mixed state on `num_qubits`.
    static DensityMatrix maximally_mixed(int num_qubits);

    int num_qubits() const { return num_qubits_; }
    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    const Eigen::MatrixXcd& matrix() const { return m_; }
    Complex operator()(std::size_t row, std::size_t col) const { return m_(row, col); }

    Complex trace() const { return m_.trace(); }
    double purity() const { return (m_ * m_).trace().real(); }
    double hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }
    double min_eigenvalue() const;

    DensityMatrix kron(const DensityMatrix& other) const;

private:
    Eigen::MatrixXcd m_;
    int num_qubits_;
};

class Statevector {
public:
    explicit Statevector(Eigen::VectorXcd amplitudes);

    int num_qubits() const { return num_qubits_; }
    const Eigen::VectorXcd& amplitudes() const { return v_; }
    double norm() const { return v_.norm(); }

    Statevector kron(const Statevector& other) const;

private:
    Eigen::VectorXcd v_;
    int num_qubits_;
};

// |phi+><phi+| on two qubits.
DensityMatrix bell_pair();
Statevector bell_statevector();
Statevector ghz_statevector(int num_qubits);

// Fidelity <phi+|rho|phi+> of a two-qubit state.
double phi_plus_fidelity(const DensityMatrix& rho);

// rho -> (1 - q) rho + q Z_i rho Z_i with q = (1 - e^(-t/T_dp))/2.
DensityMatrix apply_dephasing(const DensityMatrix& rho, int qubit, double time_s, double dephasing_time_s);

// rho -> lambda rho + (1 - lambda)/4 tr_{ij}(rho) (x) 1_{ij}.
DensityMatrix apply_depolarizing_2q(const DensityMatrix& rho, int qubit_i, int qubit_j, double lambda_bsm);

// Projects qubits i, j onto phi+ and traces them out. When `normalize` is set
// the result has unit trace; otherwise its trace is the outcome probability.
// Throws DegenerateProjection when a normalized outcome has zero probability.
DensityMatrix bsm_project(const DensityMatrix& rho, int qubit_i, int qubit_j, bool normalize = true);

// Statevector version: <phi+|_{ij} psi, unnormalized.
Statevector bsm_project(const Statevector& psi, int qubit_i, int qubit_j);

enum class DephasingOrder {
    before_swaps,  // every qubit dephases up front
    after_swaps,   // the two end qubits dephase after the last swap
};

struct ChainFidelity {
    // phi+ weight carried by the branch in which every swap was ideal. This
    // is the quantity the closed-form law predicts.
    double entangled = 0.0;
    // Full overlap <phi+|rho|phi+>, including the 1/4 contributed by the
    // depolarized (classically correlated) branches.
    double total = 0.0;
    // Trace of the final state before the branch weights were read; 1 up to
    // rounding.
    double trace = 0.0;
};

// Builds a chain of len(times)/2 phi+ pairs, dephases qubit k for times[k],
// and swaps pairs left to right, each swap being a depolarizing channel of
// ideality lambdas[s] followed by a phi+ projection. Times must have length
// 4 or 6 and lambdas one entry fewer than the number of pairs.
ChainFidelity oracle_chain_fidelity(std::span<const double> times, std::span<const double> lambdas,
                                    double dephasing_time_s,
                                    DephasingOrder order = DephasingOrder::before_swaps);

// Entangled-branch fidelity of oracle_chain_fidelity.
double oracle_fidelity(std::span<const double> times, std::span<const double> lambdas, double dephasing_time_s);

// Swaps the last qubit of an n-qubit GHZ state through a fresh Bell pair and
// returns the overlap of the result with an n-qubit GHZ state. 2 <= n <= 11.
double ghz_swap_check(int n);

// Mean sequential-protocol clock time 2(N-1)/p in units of L/c.
double expected_clock_sequential(const NetworkParams& params);

// Mean number of parallel rounds, the expected maximum of N-1 independent
// geometric variables: sum_{k>=0} [1 - (1 - (1-p)^k)^(N-1)].
double expected_rounds_parallel(const NetworkParams& params, double truncation_tol = 1e-15);
double expected_rounds_parallel(int num_links, double p, double truncation_tol = 1e-15);

}  // namespace qrepsim::oracle
