#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rcslab/circuit.hpp"
#include "rcslab/kernels.hpp"

namespace rcslab {

/// Default qubit cap for full statevector storage (256 MB of amplitudes).
/// Overridable through the RCSLAB_MAX_QUBITS environment variable.
int max_qubits();

/// Basis-state convention: bit q of the amplitude index is the value of
/// qubit q, so qubit 0 is the least significant index bit. Rendered
/// bitstrings put qubit 0 leftmost.
class Statevector {
 public:
  /// |0...0> on n qubits. Throws resource_limit_error above the cap.
  explicit Statevector(int n_qubits);

  static Statevector from_amplitudes(int n_qubits, std::vector<cplx> amps);

  int num_qubits() const noexcept { return n_; }
  std::uint64_t dim() const noexcept { return amps_.size(); }
  std::span<const cplx> amplitudes() const { return amps_; }
  std::span<cplx> amplitudes() { return amps_; }

  double norm() const { return std::sqrt(kern::norm_sq(amps_)); }
  double probability_of(std::uint64_t basis_index) const {
    return std::norm(amps_[basis_index]);
  }

 private:
  int n_ = 0;
  std::vector<cplx> amps_;
};

/// Applies a gate (or its adjoint) in place.
void apply_gate(Statevector& psi, const Gate& g, bool dagger = false);

/// <a|b>; widths must match.
cplx inner_product(const Statevector& a, const Statevector& b);

/// Born probabilities of every basis state.
std::vector<double> probabilities(const Statevector& psi);

/// sum_x p(x)^2: ~2/2^n once the circuit anticoncentrates.
double collision_probability(const Statevector& psi);

/// Joint state with copy a on qubits [0,na) and copy b on qubits [na,na+nb).
Statevector tensor_product(const Statevector& a, const Statevector& b);

/// Bitstring rendering of a basis index, qubit 0 leftmost.
std::string format_bits(std::uint64_t word, int n);
std::uint64_t parse_bits(std::string_view bits);

}  // namespace rcslab
