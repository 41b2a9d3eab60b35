#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

// Exact statevector / density-matrix simulation of small parameterized
// circuits, with a generic noise model and a parameter-shift gradient engine.
//
// Basis ordering is little-endian: qubit k corresponds to bit k of the basis
// index. Embedding gates follow the e^{+i phi P} phase convention; textbook
// rotation gates e^{-i theta P / 2} are available for variational ansatzes.

namespace nqe {

using cx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

class SimError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// States

class StateVector {
public:
  explicit StateVector(int n_qubits)
      : n_qubits_(n_qubits), amps_(CVec::Zero(std::size_t(1) << n_qubits)) {
    if (n_qubits < 1 || n_qubits > 14) throw SimError("n_qubits out of range");
    amps_[0] = 1.0;
  }
  StateVector(int n_qubits, CVec amps) : n_qubits_(n_qubits), amps_(std::move(amps)) {
    if (amps_.size() != Eigen::Index(std::size_t(1) << n_qubits))
      throw SimError("amplitude length != 2^n");
  }

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return amps_.size(); }
  const CVec& amplitudes() const { return amps_; }
  CVec& amplitudes() { return amps_; }
  cx amp(std::size_t k) const { return amps_[Eigen::Index(k)]; }

  double norm_sq() const { return amps_.squaredNorm(); }

private:
  int n_qubits_;
  CVec amps_;
};

class DensityMatrix {
public:
  explicit DensityMatrix(int n_qubits)
      : n_qubits_(n_qubits),
        mat_(CMat::Zero(std::size_t(1) << n_qubits, std::size_t(1) << n_qubits)) {
    mat_(0, 0) = 1.0;
  }
  DensityMatrix(int n_qubits, CMat m) : n_qubits_(n_qubits), mat_(std::move(m)) {
    const auto d = Eigen::Index(std::size_t(1) << n_qubits);
    if (mat_.rows() != d || mat_.cols() != d) throw SimError("density matrix dim != 2^n");
  }
  static DensityMatrix from_state(const StateVector& psi) {
    return DensityMatrix(psi.n_qubits(), psi.amplitudes() * psi.amplitudes().adjoint());
  }

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return mat_.rows(); }
  const CMat& matrix() const { return mat_; }
  CMat& matrix() { return mat_; }

  double trace_real() const { return mat_.trace().real(); }

  // (A + A^dag)/2; applied before any eigendecomposition.
  CMat symmetrized() const { return 0.5 * (mat_ + mat_.adjoint()); }

private:
  int n_qubits_;
  CMat mat_;
};

// ---------------------------------------------------------------------------
// Gates

enum class GateKind {
  H,
  CNOT,
  RY,        // e^{-i theta Y / 2}
  RZ,        // e^{-i theta Z / 2}
  RZPhase,   // e^{+i phi Z}  = diag(e^{i phi}, e^{-i phi})
  RYPhase,   // e^{+i phi Y}
  RZZPhase,  // e^{+i phi Z x Z}
  RYYPhase,  // e^{+i phi Y x Y}
  RXX,       // e^{-i theta XX / 2}
  RYY,       // e^{-i theta YY / 2}
  RZZ,       // e^{-i theta ZZ / 2}
};

struct Gate {
  GateKind kind;
  int q0 = 0;
  int q1 = -1;  // second target for two-qubit kinds
  double param = 0.0;

  bool two_qubit() const {
    switch (kind) {
      case GateKind::CNOT:
      case GateKind::RZZPhase:
      case GateKind::RYYPhase:
      case GateKind::RXX:
      case GateKind::RYY:
      case GateKind::RZZ:
        return true;
      default:
        return false;
    }
  }
  bool parameterized() const { return kind != GateKind::H && kind != GateKind::CNOT; }

  // 2x2 or 4x4 unitary (kron ordering: q1 is the high bit within the block).
  CMat matrix() const;
  Gate adjoint() const;
};

using Circuit = std::vector<Gate>;

Circuit adjoint_circuit(const Circuit& c);

// Helpers for building circuits.
inline Gate g_h(int q) { return {GateKind::H, q}; }
inline Gate g_cnot(int control, int target) { return {GateKind::CNOT, control, target}; }
inline Gate g_ry(int q, double theta) { return {GateKind::RY, q, -1, theta}; }
inline Gate g_rz(int q, double theta) { return {GateKind::RZ, q, -1, theta}; }
inline Gate g_rz_phase(int q, double phi) { return {GateKind::RZPhase, q, -1, phi}; }
inline Gate g_ry_phase(int q, double phi) { return {GateKind::RYPhase, q, -1, phi}; }
inline Gate g_rzz_phase(int a, int b, double phi) { return {GateKind::RZZPhase, a, b, phi}; }
inline Gate g_ryy_phase(int a, int b, double phi) { return {GateKind::RYYPhase, a, b, phi}; }
inline Gate g_rxx(int a, int b, double t) { return {GateKind::RXX, a, b, t}; }
inline Gate g_ryy(int a, int b, double t) { return {GateKind::RYY, a, b, t}; }
inline Gate g_rzz(int a, int b, double t) { return {GateKind::RZZ, a, b, t}; }

void apply_gate(StateVector& state, const Gate& gate);
StateVector run_circuit(const Circuit& c, int n_qubits);

// Lift a 2x2 or 4x4 operator acting on `targets` to the full 2^n space.
CMat lift_operator(const CMat& op, const std::vector<int>& targets, int n_qubits);

// ---------------------------------------------------------------------------
// Observables

struct Observable {
  // qubit -> 'X' | 'Y' | 'Z'
  std::vector<std::pair<int, char>> paulis;
  double coefficient = 1.0;

  static Observable z(int qubit) { return {{{qubit, 'Z'}}, 1.0}; }
  CMat full_matrix(int n_qubits) const;
};

double expectation(const StateVector& state, const Observable& obs);
double expectation(const DensityMatrix& dm, const Observable& obs);

// ---------------------------------------------------------------------------
// Fidelity

// |<a|b>|^2
double fidelity_exact(const StateVector& a, const StateVector& b);

// ---------------------------------------------------------------------------
// Noise

struct NoiseModel {
  double p_dep_1q = 0.0;
  double p_dep_2q = 0.0;
  double t1_us = 0.0;        // 0 disables damping
  double t2_us = 0.0;
  double gate_time_1q_us = 0.0;
  double gate_time_2q_us = 0.0;
  // Per-qubit readout confusion rows: P(read 1 | true 0) and P(read 0 | true 1).
  double readout_p01 = 0.0;
  double readout_p10 = 0.0;

  void validate() const;
  bool trivial() const {
    return p_dep_1q == 0 && p_dep_2q == 0 && t1_us == 0 && readout_p01 == 0 &&
           readout_p10 == 0;
  }

  // p_dep_1q=1e-3, p_dep_2q=1e-2, T1=100us, T2=80us, t1q=0.05us, t2q=0.3us, 2% readout.
  static NoiseModel desk_nisq();
};

// rho -> sum_i K_i rho K_i^dag; Kraus operators in the full 2^n space.
DensityMatrix apply_channel(const DensityMatrix& dm, const std::vector<CMat>& kraus);

// Small-space Kraus sets (on 1 or 2 qubits).
std::vector<CMat> kraus_depolarizing_1q(double p);  // p = prob of full depolarization
std::vector<CMat> kraus_depolarizing_2q(double p);
std::vector<CMat> kraus_amplitude_damping(double gamma);
std::vector<CMat> kraus_phase_damping(double lambda);

void apply_channel_on(DensityMatrix& dm, const std::vector<CMat>& small_kraus,
                      const std::vector<int>& targets);

// Unitary conjugation per gate followed by depolarizing noise on the gate's
// targets and T1/T2 damping derived from gate times.
DensityMatrix evolve_noisy(const Circuit& c, int n_qubits, const NoiseModel& noise);

// Probabilities of computational-basis outcomes with per-qubit readout
// confusion applied.
Eigen::VectorXd readout_probabilities(const DensityMatrix& dm, const NoiseModel& noise);

// Compute-uncompute overlap estimate: run prepare_i then adjoint(prepare_j)
// from |0...0> and estimate P(all zeros) from `shots` samples.
double fidelity_sampled(const Circuit& prepare_i, const Circuit& prepare_j, int n_qubits,
                        int shots, const std::optional<NoiseModel>& noise,
                        std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Parameter-shift gradients

struct ShiftRule {
  double shift;
  double coefficient;
  // e^{+i phi P}: f'(phi) = f(phi + pi/4) - f(phi - pi/4)
  static ShiftRule phase_convention() { return {M_PI / 4, 1.0}; }
  // e^{-i theta P / 2}: f'(theta) = [f(theta + pi/2) - f(theta - pi/2)] / 2
  static ShiftRule rotation_convention() { return {M_PI / 2, 0.5}; }
};

// Exact gradient of eval w.r.t. the requested angles. Every requested angle
// must enter the circuit through exactly one gate of the matching convention.
std::vector<double> grad_param_shift(
    const std::function<double(const std::vector<double>&)>& eval,
    const std::vector<double>& angles, const std::vector<int>& which,
    const ShiftRule& rule = ShiftRule::phase_convention());

std::vector<double> grad_all_param_shift(
    const std::function<double(const std::vector<double>&)>& eval,
    const std::vector<double>& angles,
    const ShiftRule& rule = ShiftRule::phase_convention());

}  // namespace nqe
