// Straight-line serial reference kernels. Kept deliberately simple: these are
// the semantics the OpenMP kernels are checked against in tests and timed
// against in the benchmark.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rcslab/kernels.hpp"

namespace rcslab::ref {

void apply_1q(std::span<cplx> amps, int q, const Mat2& m) {
  const std::uint64_t dim = amps.size();
  const std::uint64_t bit = 1ULL << q;
  for (std::uint64_t i0 = 0; i0 < dim; ++i0) {
    if (i0 & bit) continue;
    const std::uint64_t i1 = i0 | bit;
    const cplx t0 = amps[i0];
    const cplx t1 = amps[i1];
    amps[i0] = m[0] * t0 + m[1] * t1;
    amps[i1] = m[2] * t0 + m[3] * t1;
  }
}

void apply_2q(std::span<cplx> amps, int q1, int q2, const Mat4& m) {
  const std::uint64_t dim = amps.size();
  const std::uint64_t b1 = 1ULL << q1;
  const std::uint64_t b2 = 1ULL << q2;
  for (std::uint64_t base = 0; base < dim; ++base) {
    if (base & (b1 | b2)) continue;
    const std::uint64_t idx[4] = {base, base | b1, base | b2, base | b1 | b2};
    cplx in[4];
    for (int k = 0; k < 4; ++k) in[k] = amps[idx[k]];
    for (int out = 0; out < 4; ++out) {
      cplx acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += m[out * 4 + k] * in[k];
      amps[idx[out]] = acc;
    }
  }
}

void apply_cnot(std::span<cplx> amps, int control, int target) {
  const std::uint64_t dim = amps.size();
  const std::uint64_t bc = 1ULL << control;
  const std::uint64_t bt = 1ULL << target;
  for (std::uint64_t i = 0; i < dim; ++i) {
    if ((i & bc) && !(i & bt)) std::swap(amps[i], amps[i | bt]);
  }
}

void apply_cz(std::span<cplx> amps, int q1, int q2) {
  const std::uint64_t dim = amps.size();
  const std::uint64_t both = (1ULL << q1) | (1ULL << q2);
  for (std::uint64_t i = 0; i < dim; ++i) {
    if ((i & both) == both) amps[i] = -amps[i];
  }
}

void apply_zz(std::span<cplx> amps, int q1, int q2, double angle) {
  const std::uint64_t dim = amps.size();
  const cplx equal = std::polar(1.0, -0.5 * angle);
  const cplx differ = std::polar(1.0, 0.5 * angle);
  for (std::uint64_t i = 0; i < dim; ++i) {
    const bool same = (((i >> q1) ^ (i >> q2)) & 1ULL) == 0;
    amps[i] *= same ? equal : differ;
  }
}

void apply_diag_phase(std::span<cplx> amps, double theta, std::uint64_t mask) {
  const std::uint64_t dim = amps.size();
  for (std::uint64_t i = 0; i < dim; ++i) {
    amps[i] *= std::polar(1.0, theta * std::popcount(i & mask));
  }
}

void apply_pauli_x(std::span<cplx> amps, int q) {
  const std::uint64_t dim = amps.size();
  const std::uint64_t bit = 1ULL << q;
  for (std::uint64_t i = 0; i < dim; ++i) {
    if (!(i & bit)) std::swap(amps[i], amps[i | bit]);
  }
}

void apply_pauli_y(std::span<cplx> amps, int q) {
  const std::uint64_t dim = amps.size();
  const std::uint64_t bit = 1ULL << q;
  const cplx mi{0.0, -1.0};
  const cplx pi{0.0, 1.0};
  for (std::uint64_t i0 = 0; i0 < dim; ++i0) {
    if (i0 & bit) continue;
    const std::uint64_t i1 = i0 | bit;
    const cplx t0 = amps[i0];
    amps[i0] = mi * amps[i1];
    amps[i1] = pi * t0;
  }
}

void apply_pauli_z(std::span<cplx> amps, int q) {
  const std::uint64_t dim = amps.size();
  const std::uint64_t bit = 1ULL << q;
  for (std::uint64_t i = 0; i < dim; ++i) {
    if (i & bit) amps[i] = -amps[i];
  }
}

double norm_sq(std::span<const cplx> amps) {
  double total = 0.0;
  for (const cplx& a : amps) total += std::norm(a);
  return total;
}

cplx inner_product(std::span<const cplx> bra, std::span<const cplx> ket) {
  cplx total = 0.0;
  for (std::size_t i = 0; i < bra.size(); ++i) {
    total += std::conj(bra[i]) * ket[i];
  }
  return total;
}

double collision_probability(std::span<const cplx> amps) {
  double total = 0.0;
  for (const cplx& a : amps) {
    const double p = std::norm(a);
    total += p * p;
  }
  return total;
}

double weighted_probability(std::span<const cplx> amps,
                            std::span<const double> weights) {
  double total = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    total += std::norm(amps[i]) * weights[i];
  }
  return total;
}

}  // namespace rcslab::ref
