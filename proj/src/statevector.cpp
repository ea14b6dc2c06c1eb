#include "rcslab/statevector.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "rcslab/errors.hpp"

namespace rcslab {
namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;

Mat2 adjoint(const Mat2& m) {
  return {std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])};
}

Mat2 mat_h() {
  return {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2};
}

Mat2 mat_sqrt_x() {
  return {cplx(0.5, 0.5), cplx(0.5, -0.5), cplx(0.5, -0.5), cplx(0.5, 0.5)};
}

Mat2 mat_sqrt_y() {
  return {cplx(0.5, 0.5), cplx(-0.5, -0.5), cplx(0.5, 0.5), cplx(0.5, 0.5)};
}

// sqrt of W = (X+Y)/sqrt(2), phased like sqrt(X): exp(i pi/4) exp(-i pi/4 W).
Mat2 mat_sqrt_w() {
  return {cplx(0.5, 0.5), cplx(0.0, -kInvSqrt2), cplx(kInvSqrt2, 0.0),
          cplx(0.5, 0.5)};
}

Mat4 fsim_matrix(double theta, double phi) {
  const cplx c = std::cos(theta);
  const cplx mis = cplx(0.0, -std::sin(theta));
  Mat4 m{};
  m[0] = 1.0;
  m[5] = c;
  m[6] = mis;
  m[9] = mis;
  m[10] = c;
  m[15] = std::polar(1.0, -phi);
  return m;
}

}  // namespace

int max_qubits() {
  static const int cap = [] {
    if (const char* env = std::getenv("RCSLAB_MAX_QUBITS")) {
      const int v = std::atoi(env);
      if (v >= 1 && v <= 30) return v;
    }
    return 24;
  }();
  return cap;
}

Statevector::Statevector(int n_qubits) : n_(n_qubits) {
  if (n_qubits < 1) {
    throw std::invalid_argument("statevector needs at least one qubit");
  }
  if (n_qubits > max_qubits()) {
    throw resource_limit_error("statevector width " + std::to_string(n_qubits) +
                               " exceeds the cap of " +
                               std::to_string(max_qubits()) + " qubits");
  }
  amps_.assign(1ULL << n_qubits, cplx{});
  amps_[0] = 1.0;
}

Statevector Statevector::from_amplitudes(int n_qubits, std::vector<cplx> amps) {
  Statevector psi(n_qubits);
  if (amps.size() != psi.dim()) {
    throw std::invalid_argument("amplitude count does not match qubit count");
  }
  psi.amps_ = std::move(amps);
  return psi;
}

void apply_gate(Statevector& psi, const Gate& g, bool dagger) {
  auto amps = psi.amplitudes();
  switch (g.kind) {
    case GateKind::H:
      kern::apply_1q(amps, g.q1, mat_h());
      break;
    case GateKind::SqrtX:
      kern::apply_1q(amps, g.q1, dagger ? adjoint(mat_sqrt_x()) : mat_sqrt_x());
      break;
    case GateKind::SqrtY:
      kern::apply_1q(amps, g.q1, dagger ? adjoint(mat_sqrt_y()) : mat_sqrt_y());
      break;
    case GateKind::SqrtW:
      kern::apply_1q(amps, g.q1, dagger ? adjoint(mat_sqrt_w()) : mat_sqrt_w());
      break;
    case GateKind::FSim:
      kern::apply_2q(amps, g.q1, g.q2,
                     dagger ? fsim_matrix(-g.a, -g.b) : fsim_matrix(g.a, g.b));
      break;
    case GateKind::CZ:
      kern::apply_cz(amps, g.q1, g.q2);
      break;
    case GateKind::CNot:
      kern::apply_cnot(amps, g.q1, g.q2);
      break;
    case GateKind::ZZ:
      kern::apply_zz(amps, g.q1, g.q2, dagger ? -g.a : g.a);
      break;
    case GateKind::DiagPhase:
      kern::apply_diag_phase(amps, dagger ? -g.a : g.a, g.mask);
      break;
    case GateKind::PauliX:
      kern::apply_pauli_x(amps, g.q1);
      break;
    case GateKind::PauliY:
      kern::apply_pauli_y(amps, g.q1);
      break;
    case GateKind::PauliZ:
      kern::apply_pauli_z(amps, g.q1);
      break;
  }
}

cplx inner_product(const Statevector& a, const Statevector& b) {
  if (a.num_qubits() != b.num_qubits()) {
    throw std::invalid_argument("inner product of mismatched widths");
  }
  return kern::inner_product(a.amplitudes(), b.amplitudes());
}

std::vector<double> probabilities(const Statevector& psi) {
  auto amps = psi.amplitudes();
  std::vector<double> p(amps.size());
  for (std::size_t i = 0; i < amps.size(); ++i) p[i] = std::norm(amps[i]);
  return p;
}

double collision_probability(const Statevector& psi) {
  return kern::collision_probability(psi.amplitudes());
}

Statevector tensor_product(const Statevector& a, const Statevector& b) {
  const int n = a.num_qubits() + b.num_qubits();
  if (n > max_qubits()) {
    throw resource_limit_error("tensor product width " + std::to_string(n) +
                               " exceeds the cap");
  }
  std::vector<cplx> joint(1ULL << n);
  const auto av = a.amplitudes();
  const auto bv = b.amplitudes();
  const std::uint64_t da = av.size();
  for (std::uint64_t ib = 0; ib < bv.size(); ++ib) {
    const cplx vb = bv[ib];
    const std::uint64_t offset = ib * da;
    for (std::uint64_t ia = 0; ia < da; ++ia) joint[offset | ia] = vb * av[ia];
  }
  return Statevector::from_amplitudes(n, std::move(joint));
}

std::string format_bits(std::uint64_t word, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int q = 0; q < n; ++q) {
    if ((word >> q) & 1ULL) s[static_cast<std::size_t>(q)] = '1';
  }
  return s;
}

std::uint64_t parse_bits(std::string_view bits) {
  if (bits.empty() || bits.size() > 64) {
    throw std::invalid_argument("bitstring must have 1..64 characters");
  }
  std::uint64_t word = 0;
  for (std::size_t q = 0; q < bits.size(); ++q) {
    if (bits[q] == '1') {
      word |= 1ULL << q;
    } else if (bits[q] != '0') {
      throw std::invalid_argument("bitstring may contain only 0 and 1");
    }
  }
  return word;
}

}  // namespace rcslab
