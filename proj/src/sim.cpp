#include "nqe/sim.hpp"

#include <cmath>

namespace nqe {

namespace {

const cx I{0.0, 1.0};

void check_targets(const Gate& g, int n_qubits) {
  if (g.q0 < 0 || g.q0 >= n_qubits) throw SimError("gate target out of range");
  if (g.two_qubit()) {
    if (g.q1 < 0 || g.q1 >= n_qubits) throw SimError("gate target out of range");
    if (g.q1 == g.q0) throw SimError("duplicate gate targets");
  }
}

CMat mat1(cx a, cx b, cx c, cx d) {
  CMat m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

CMat Gate::matrix() const {
  const double s = 1.0 / std::sqrt(2.0);
  switch (kind) {
    case GateKind::H:
      return mat1(s, s, s, -s);
    case GateKind::RY: {
      const double c = std::cos(param / 2), sn = std::sin(param / 2);
      return mat1(c, -sn, sn, c);
    }
    case GateKind::RZ:
      return mat1(std::exp(-I * (param / 2)), 0, 0, std::exp(I * (param / 2)));
    case GateKind::RZPhase:
      return mat1(std::exp(I * param), 0, 0, std::exp(-I * param));
    case GateKind::RYPhase: {
      // e^{i phi Y} = cos(phi) I + i sin(phi) Y = [[c, s],[-s, c]]
      const double c = std::cos(param), sn = std::sin(param);
      return mat1(c, sn, -sn, c);
    }
    case GateKind::CNOT: {
      // q0 = control, q1 = target; basis index bit0 = q0, bit1 = q1 within block
      CMat m = CMat::Zero(4, 4);
      m(0, 0) = 1;
      m(2, 2) = 1;
      m(1, 3) = 1;
      m(3, 1) = 1;
      return m;
    }
    case GateKind::RZZPhase: {
      CMat m = CMat::Zero(4, 4);
      const cx ep = std::exp(I * param), em = std::exp(-I * param);
      m(0, 0) = ep;   // z0=z1=+1
      m(1, 1) = em;
      m(2, 2) = em;
      m(3, 3) = ep;
      return m;
    }
    case GateKind::RYYPhase: {
      // e^{i phi Y x Y} = cos(phi) I + i sin(phi) (Y x Y)
      CMat yy = CMat::Zero(4, 4);
      yy(0, 3) = -1;
      yy(1, 2) = 1;
      yy(2, 1) = 1;
      yy(3, 0) = -1;
      return std::cos(param) * CMat::Identity(4, 4) + I * std::sin(param) * yy;
    }
    case GateKind::RXX: {
      CMat xx = CMat::Zero(4, 4);
      xx(0, 3) = xx(1, 2) = xx(2, 1) = xx(3, 0) = 1;
      return std::cos(param / 2) * CMat::Identity(4, 4) - I * std::sin(param / 2) * xx;
    }
    case GateKind::RYY: {
      CMat yy = CMat::Zero(4, 4);
      yy(0, 3) = -1;
      yy(1, 2) = 1;
      yy(2, 1) = 1;
      yy(3, 0) = -1;
      return std::cos(param / 2) * CMat::Identity(4, 4) - I * std::sin(param / 2) * yy;
    }
    case GateKind::RZZ: {
      CMat m = CMat::Zero(4, 4);
      const cx ep = std::exp(I * (param / 2)), em = std::exp(-I * (param / 2));
      m(0, 0) = em;
      m(1, 1) = ep;
      m(2, 2) = ep;
      m(3, 3) = em;
      return m;
    }
  }
  throw SimError("unknown gate kind");
}

Gate Gate::adjoint() const {
  Gate g = *this;
  if (g.parameterized()) g.param = -g.param;
  return g;  // H and CNOT are self-inverse
}

Circuit adjoint_circuit(const Circuit& c) {
  Circuit out;
  out.reserve(c.size());
  for (auto it = c.rbegin(); it != c.rend(); ++it) out.push_back(it->adjoint());
  return out;
}

void apply_gate(StateVector& state, const Gate& gate) {
  check_targets(gate, state.n_qubits());
  CVec& a = state.amplitudes();
  const std::size_t dim = std::size_t(a.size());

  if (!gate.two_qubit()) {
    const CMat u = gate.matrix();
    const std::size_t bit = std::size_t(1) << gate.q0;
    for (std::size_t k = 0; k < dim; ++k) {
      if (k & bit) continue;
      const cx a0 = a[Eigen::Index(k)];
      const cx a1 = a[Eigen::Index(k | bit)];
      a[Eigen::Index(k)] = u(0, 0) * a0 + u(0, 1) * a1;
      a[Eigen::Index(k | bit)] = u(1, 0) * a0 + u(1, 1) * a1;
    }
    return;
  }

  const CMat u = gate.matrix();
  const std::size_t b0 = std::size_t(1) << gate.q0;
  const std::size_t b1 = std::size_t(1) << gate.q1;
  for (std::size_t k = 0; k < dim; ++k) {
    if ((k & b0) || (k & b1)) continue;
    const std::size_t i00 = k, i01 = k | b0, i10 = k | b1, i11 = k | b0 | b1;
    const cx a00 = a[Eigen::Index(i00)], a01 = a[Eigen::Index(i01)];
    const cx a10 = a[Eigen::Index(i10)], a11 = a[Eigen::Index(i11)];
    // block index: bit0 = q0, bit1 = q1
    a[Eigen::Index(i00)] = u(0, 0) * a00 + u(0, 1) * a01 + u(0, 2) * a10 + u(0, 3) * a11;
    a[Eigen::Index(i01)] = u(1, 0) * a00 + u(1, 1) * a01 + u(1, 2) * a10 + u(1, 3) * a11;
    a[Eigen::Index(i10)] = u(2, 0) * a00 + u(2, 1) * a01 + u(2, 2) * a10 + u(2, 3) * a11;
    a[Eigen::Index(i11)] = u(3, 0) * a00 + u(3, 1) * a01 + u(3, 2) * a10 + u(3, 3) * a11;
  }
}

StateVector run_circuit(const Circuit& c, int n_qubits) {
  StateVector psi(n_qubits);
  for (const Gate& g : c) apply_gate(psi, g);
  return psi;
}

CMat lift_operator(const CMat& op, const std::vector<int>& targets, int n_qubits) {
  const std::size_t dim = std::size_t(1) << n_qubits;
  const std::size_t block = std::size_t(1) << targets.size();
  if (op.rows() != Eigen::Index(block)) throw SimError("lift_operator: shape mismatch");
  CMat full = CMat::Zero(dim, dim);
  // Iterate over basis states of the non-target qubits.
  std::size_t target_mask = 0;
  for (int t : targets) {
    if (t < 0 || t >= n_qubits) throw SimError("lift_operator: target out of range");
    target_mask |= std::size_t(1) << t;
  }
  auto compose = [&](std::size_t rest, std::size_t sub) {
    std::size_t idx = rest;
    for (std::size_t b = 0; b < targets.size(); ++b)
      if (sub & (std::size_t(1) << b)) idx |= std::size_t(1) << targets[b];
    return idx;
  };
  for (std::size_t rest = 0; rest < dim; ++rest) {
    if (rest & target_mask) continue;
    for (std::size_t r = 0; r < block; ++r)
      for (std::size_t cidx = 0; cidx < block; ++cidx) {
        const cx v = op(Eigen::Index(r), Eigen::Index(cidx));
        if (v != cx(0.0)) full(compose(rest, r), compose(rest, cidx)) = v;
      }
  }
  return full;
}

CMat Observable::full_matrix(int n_qubits) const {
  CMat full = coefficient * CMat::Identity(std::size_t(1) << n_qubits,
                                           std::size_t(1) << n_qubits);
  for (const auto& [q, p] : paulis) {
    CMat m(2, 2);
    switch (p) {
      case 'X': m << 0, 1, 1, 0; break;
      case 'Y': m << cx(0), -I, I, cx(0); break;
      case 'Z': m << 1, 0, 0, -1; break;
      default: throw SimError("observable: unknown Pauli");
    }
    full = lift_operator(m, {q}, n_qubits) * full;
  }
  return full;
}

double expectation(const StateVector& state, const Observable& obs) {
  // Apply the Pauli string to a copy and take the inner product.
  const int n = state.n_qubits();
  CVec v = state.amplitudes();
  for (const auto& [q, p] : obs.paulis) {
    if (q < 0 || q >= n) throw SimError("observable qubit out of range");
    const std::size_t bit = std::size_t(1) << q;
    const std::size_t dim = std::size_t(v.size());
    for (std::size_t k = 0; k < dim; ++k) {
      if (k & bit) continue;
      const Eigen::Index k0(k), k1(k | bit);
      const cx a0 = v[k0], a1 = v[k1];
      switch (p) {
        case 'X': v[k0] = a1; v[k1] = a0; break;
        case 'Y': v[k0] = -I * a1; v[k1] = I * a0; break;
        case 'Z': v[k1] = -a1; break;
        default: throw SimError("observable: unknown Pauli");
      }
    }
  }
  return obs.coefficient * state.amplitudes().dot(v).real();
}

double expectation(const DensityMatrix& dm, const Observable& obs) {
  const CMat o = obs.full_matrix(dm.n_qubits());
  return (dm.matrix() * o).trace().real();
}

double fidelity_exact(const StateVector& a, const StateVector& b) {
  if (a.n_qubits() != b.n_qubits()) throw SimError("fidelity: dimension mismatch");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

// ---------------------------------------------------------------------------
// Noise

void NoiseModel::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(p_dep_1q) || !prob(p_dep_2q) || !prob(readout_p01) || !prob(readout_p10))
    throw SimError("noise: probability out of [0,1]");
  if (t1_us < 0 || t2_us < 0 || gate_time_1q_us < 0 || gate_time_2q_us < 0)
    throw SimError("noise: negative time");
  if (t1_us > 0 && t2_us > 2 * t1_us + 1e-12) throw SimError("noise: T2 > 2*T1");
}

NoiseModel NoiseModel::desk_nisq() {
  NoiseModel m;
  m.p_dep_1q = 1e-3;
  m.p_dep_2q = 1e-2;
  m.t1_us = 100.0;
  m.t2_us = 80.0;
  m.gate_time_1q_us = 0.05;
  m.gate_time_2q_us = 0.3;
  m.readout_p01 = 0.02;
  m.readout_p10 = 0.02;
  return m;
}

DensityMatrix apply_channel(const DensityMatrix& dm, const std::vector<CMat>& kraus) {
  CMat closure = CMat::Zero(dm.dim(), dm.dim());
  for (const CMat& k : kraus) closure += k.adjoint() * k;
  if ((closure - CMat::Identity(dm.dim(), dm.dim())).cwiseAbs().maxCoeff() > 1e-10)
    throw SimError("apply_channel: Kraus set is not trace preserving");
  CMat out = CMat::Zero(dm.dim(), dm.dim());
  for (const CMat& k : kraus) out += k * dm.matrix() * k.adjoint();
  return DensityMatrix(dm.n_qubits(), std::move(out));
}

std::vector<CMat> kraus_depolarizing_1q(double p) {
  // p = probability of replacement with I/2: rho -> (1-p) rho + p I/2.
  CMat id = CMat::Identity(2, 2);
  CMat x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << cx(0), -I, I, cx(0);
  z << 1, 0, 0, -1;
  const double k0 = std::sqrt(1.0 - 3.0 * p / 4.0), kp = std::sqrt(p / 4.0);
  return {k0 * id, kp * x, kp * y, kp * z};
}

std::vector<CMat> kraus_depolarizing_2q(double p) {
  CMat paulis[4];
  paulis[0] = CMat::Identity(2, 2);
  paulis[1] = CMat(2, 2);
  paulis[1] << 0, 1, 1, 0;
  paulis[2] = CMat(2, 2);
  paulis[2] << cx(0), -I, I, cx(0);
  paulis[3] = CMat(2, 2);
  paulis[3] << 1, 0, 0, -1;
  std::vector<CMat> out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      CMat k = CMat::Zero(4, 4);
      // bit0 = first target, bit1 = second target
      for (int r0 = 0; r0 < 2; ++r0)
        for (int c0 = 0; c0 < 2; ++c0)
          for (int r1 = 0; r1 < 2; ++r1)
            for (int c1 = 0; c1 < 2; ++c1)
              k(r0 + 2 * r1, c0 + 2 * c1) = paulis[a](r0, c0) * paulis[b](r1, c1);
      const double w = (a == 0 && b == 0) ? std::sqrt(1.0 - 15.0 * p / 16.0)
                                          : std::sqrt(p / 16.0);
      out.push_back(w * k);
    }
  return out;
}

std::vector<CMat> kraus_amplitude_damping(double gamma) {
  CMat k0 = CMat::Zero(2, 2), k1 = CMat::Zero(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - gamma);
  k1(0, 1) = std::sqrt(gamma);
  return {k0, k1};
}

std::vector<CMat> kraus_phase_damping(double lambda) {
  CMat k0 = CMat::Zero(2, 2), k1 = CMat::Zero(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - lambda);
  k1(1, 1) = std::sqrt(lambda);
  return {k0, k1};
}

void apply_channel_on(DensityMatrix& dm, const std::vector<CMat>& small_kraus,
                      const std::vector<int>& targets) {
  std::vector<CMat> lifted;
  lifted.reserve(small_kraus.size());
  for (const CMat& k : small_kraus) lifted.push_back(lift_operator(k, targets, dm.n_qubits()));
  dm = apply_channel(dm, lifted);
}

namespace {

void apply_gate_dm(DensityMatrix& dm, const Gate& g) {
  check_targets(g, dm.n_qubits());
  std::vector<int> targets = g.two_qubit() ? std::vector<int>{g.q0, g.q1}
                                           : std::vector<int>{g.q0};
  const CMat u = lift_operator(g.matrix(), targets, dm.n_qubits());
  dm.matrix() = u * dm.matrix() * u.adjoint();
}

void apply_damping(DensityMatrix& dm, const NoiseModel& noise, int qubit, double t_us) {
  if (noise.t1_us <= 0 || t_us <= 0) return;
  const double g1 = 1.0 - std::exp(-t_us / noise.t1_us);
  apply_channel_on(dm, kraus_amplitude_damping(g1), {qubit});
  if (noise.t2_us > 0) {
    // Pure dephasing rate: 1/Tphi = 1/T2 - 1/(2 T1).
    const double inv_tphi = 1.0 / noise.t2_us - 0.5 / noise.t1_us;
    if (inv_tphi > 0) {
      const double lphi = 1.0 - std::exp(-2.0 * t_us * inv_tphi);
      apply_channel_on(dm, kraus_phase_damping(lphi), {qubit});
    }
  }
}

}  // namespace

DensityMatrix evolve_noisy(const Circuit& c, int n_qubits, const NoiseModel& noise) {
  noise.validate();
  DensityMatrix dm(n_qubits);
  for (const Gate& g : c) {
    apply_gate_dm(dm, g);
    if (g.two_qubit()) {
      if (noise.p_dep_2q > 0)
        apply_channel_on(dm, kraus_depolarizing_2q(noise.p_dep_2q), {g.q0, g.q1});
      apply_damping(dm, noise, g.q0, noise.gate_time_2q_us);
      apply_damping(dm, noise, g.q1, noise.gate_time_2q_us);
    } else {
      if (noise.p_dep_1q > 0)
        apply_channel_on(dm, kraus_depolarizing_1q(noise.p_dep_1q), {g.q0});
      apply_damping(dm, noise, g.q0, noise.gate_time_1q_us);
    }
  }
  return dm;
}

Eigen::VectorXd readout_probabilities(const DensityMatrix& dm, const NoiseModel& noise) {
  Eigen::VectorXd p = dm.matrix().diagonal().real();
  p = p.cwiseMax(0.0);
  const double total = p.sum();
  if (total > 0) p /= total;
  if (noise.readout_p01 == 0 && noise.readout_p10 == 0) return p;
  const int n = dm.n_qubits();
  for (int q = 0; q < n; ++q) {
    const std::size_t bit = std::size_t(1) << q;
    Eigen::VectorXd next = p;
    for (std::size_t k = 0; k < std::size_t(p.size()); ++k) {
      if (k & bit) continue;
      const double p0 = p[Eigen::Index(k)], p1 = p[Eigen::Index(k | bit)];
      next[Eigen::Index(k)] = (1 - noise.readout_p01) * p0 + noise.readout_p10 * p1;
      next[Eigen::Index(k | bit)] = noise.readout_p01 * p0 + (1 - noise.readout_p10) * p1;
    }
    p = next;
  }
  return p;
}

double fidelity_sampled(const Circuit& prepare_i, const Circuit& prepare_j, int n_qubits,
                        int shots, const std::optional<NoiseModel>& noise,
                        std::mt19937_64& rng) {
  if (shots < 1) throw SimError("fidelity_sampled: shots must be >= 1");
  Circuit combined = prepare_i;
  const Circuit adj = adjoint_circuit(prepare_j);
  combined.insert(combined.end(), adj.begin(), adj.end());

  double p_zero;
  if (noise && !noise->trivial()) {
    const DensityMatrix dm = evolve_noisy(combined, n_qubits, *noise);
    p_zero = readout_probabilities(dm, *noise)[0];
  } else {
    const StateVector psi = run_circuit(combined, n_qubits);
    p_zero = std::norm(psi.amp(0));
  }
  p_zero = std::min(1.0, std::max(0.0, p_zero));
  std::binomial_distribution<int> dist(shots, p_zero);
  return double(dist(rng)) / double(shots);
}

// ---------------------------------------------------------------------------
// Gradients

std::vector<double> grad_param_shift(
    const std::function<double(const std::vector<double>&)>& eval,
    const std::vector<double>& angles, const std::vector<int>& which,
    const ShiftRule& rule) {
  std::vector<double> grad(which.size(), 0.0);
  std::vector<double> shifted = angles;
  for (std::size_t i = 0; i < which.size(); ++i) {
    const int k = which[i];
    if (k < 0 || std::size_t(k) >= angles.size())
      throw SimError("grad_param_shift: index out of range");
    shifted[k] = angles[k] + rule.shift;
    const double plus = eval(shifted);
    shifted[k] = angles[k] - rule.shift;
    const double minus = eval(shifted);
    shifted[k] = angles[k];
    grad[i] = rule.coefficient * (plus - minus);
  }
  return grad;
}

std::vector<double> grad_all_param_shift(
    const std::function<double(const std::vector<double>&)>& eval,
    const std::vector<double>& angles, const ShiftRule& rule) {
  std::vector<int> which(angles.size());
  for (std::size_t i = 0; i < which.size(); ++i) which[i] = int(i);
  return grad_param_shift(eval, angles, which, rule);
}

}  // namespace nqe
