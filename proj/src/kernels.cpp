#include "rcslab/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

namespace rcslab::kern {
namespace {

// Below this many loop iterations the fork/join overhead dominates; inside
// an already-parallel region (per-trajectory workers) the loops run serially.
constexpr std::int64_t kParallelCutoff = 1 << 14;

bool go_parallel(std::int64_t work) {
  return work >= kParallelCutoff && !omp_in_parallel();
}

}  // namespace

void apply_1q(std::span<cplx> amps, int q, const Mat2& m) {
  const std::int64_t half = static_cast<std::int64_t>(amps.size() >> 1);
  if (!go_parallel(half)) return ref::apply_1q(amps, q, m);
  const std::uint64_t bit = 1ULL << q;
  const std::uint64_t lo = bit - 1;
  const std::uint64_t hi = ~lo;
  cplx* a = amps.data();
  const cplx m00 = m[0], m01 = m[1], m10 = m[2], m11 = m[3];
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < half; ++i) {
    const std::uint64_t u = static_cast<std::uint64_t>(i);
    const std::uint64_t i0 = ((u & hi) << 1) | (u & lo);
    const std::uint64_t i1 = i0 | bit;
    const cplx t0 = a[i0];
    const cplx t1 = a[i1];
    a[i0] = m00 * t0 + m01 * t1;
    a[i1] = m10 * t0 + m11 * t1;
  }
}

void apply_2q(std::span<cplx> amps, int q1, int q2, const Mat4& m) {
  const std::int64_t quarter = static_cast<std::int64_t>(amps.size() >> 2);
  if (!go_parallel(quarter)) return ref::apply_2q(amps, q1, q2, m);
  const std::uint64_t b1 = 1ULL << q1;
  const std::uint64_t b2 = 1ULL << q2;
  const int qmin = std::min(q1, q2);
  const int qmax = std::max(q1, q2);
  const std::uint64_t lo = (1ULL << qmin) - 1;
  const std::uint64_t mid = ((1ULL << (qmax - 1)) - 1) ^ lo;
  const std::uint64_t hi = ~(lo | mid);
  cplx* a = amps.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < quarter; ++i) {
    const std::uint64_t u = static_cast<std::uint64_t>(i);
    const std::uint64_t base = ((u & hi) << 2) | ((u & mid) << 1) | (u & lo);
    const std::uint64_t i1 = base | b1;
    const std::uint64_t i2 = base | b2;
    const std::uint64_t i3 = base | b1 | b2;
    const cplx t0 = a[base];
    const cplx t1 = a[i1];
    const cplx t2 = a[i2];
    const cplx t3 = a[i3];
    a[base] = m[0] * t0 + m[1] * t1 + m[2] * t2 + m[3] * t3;
    a[i1] = m[4] * t0 + m[5] * t1 + m[6] * t2 + m[7] * t3;
    a[i2] = m[8] * t0 + m[9] * t1 + m[10] * t2 + m[11] * t3;
    a[i3] = m[12] * t0 + m[13] * t1 + m[14] * t2 + m[15] * t3;
  }
}

void apply_cnot(std::span<cplx> amps, int control, int target) {
  const std::int64_t quarter = static_cast<std::int64_t>(amps.size() >> 2);
  if (!go_parallel(quarter)) return ref::apply_cnot(amps, control, target);
  const std::uint64_t bc = 1ULL << control;
  const std::uint64_t bt = 1ULL << target;
  const int qmin = std::min(control, target);
  const int qmax = std::max(control, target);
  const std::uint64_t lo = (1ULL << qmin) - 1;
  const std::uint64_t mid = ((1ULL << (qmax - 1)) - 1) ^ lo;
  const std::uint64_t hi = ~(lo | mid);
  cplx* a = amps.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < quarter; ++i) {
    const std::uint64_t u = static_cast<std::uint64_t>(i);
    const std::uint64_t base = ((u & hi) << 2) | ((u & mid) << 1) | (u & lo);
    const std::uint64_t i10 = base | bc;
    const std::uint64_t i11 = base | bc | bt;
    std::swap(a[i10], a[i11]);
  }
}

void apply_cz(std::span<cplx> amps, int q1, int q2) {
  const std::int64_t quarter = static_cast<std::int64_t>(amps.size() >> 2);
  if (!go_parallel(quarter)) return ref::apply_cz(amps, q1, q2);
  const std::uint64_t b1 = 1ULL << q1;
  const std::uint64_t b2 = 1ULL << q2;
  const int qmin = std::min(q1, q2);
  const int qmax = std::max(q1, q2);
  const std::uint64_t lo = (1ULL << qmin) - 1;
  const std::uint64_t mid = ((1ULL << (qmax - 1)) - 1) ^ lo;
  const std::uint64_t hi = ~(lo | mid);
  cplx* a = amps.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < quarter; ++i) {
    const std::uint64_t u = static_cast<std::uint64_t>(i);
    const std::uint64_t i11 = (((u & hi) << 2) | ((u & mid) << 1) | (u & lo)) | b1 | b2;
    a[i11] = -a[i11];
  }
}

void apply_zz(std::span<cplx> amps, int q1, int q2, double angle) {
  const std::int64_t dim = static_cast<std::int64_t>(amps.size());
  if (!go_parallel(dim)) return ref::apply_zz(amps, q1, q2, angle);
  const cplx equal = std::polar(1.0, -0.5 * angle);
  const cplx differ = std::polar(1.0, 0.5 * angle);
  cplx* a = amps.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < dim; ++i) {
    const std::uint64_t u = static_cast<std::uint64_t>(i);
    const bool same = (((u >> q1) ^ (u >> q2)) & 1ULL) == 0;
    a[i] *= same ? equal : differ;
  }
}

void apply_diag_phase(std::span<cplx> amps, double theta, std::uint64_t mask) {
  const std::int64_t dim = static_cast<std::int64_t>(amps.size());
  if (!go_parallel(dim)) return ref::apply_diag_phase(amps, theta, mask);
  const int weight = std::popcount(mask);
  std::vector<cplx> phase(static_cast<std::size_t>(weight) + 1);
  for (int k = 0; k <= weight; ++k) phase[k] = std::polar(1.0, theta * k);
  cplx* a = amps.data();
  const cplx* ph = phase.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < dim; ++i) {
    a[i] *= ph[std::popcount(static_cast<std::uint64_t>(i) & mask)];
  }
}

void apply_pauli_x(std::span<cplx> amps, int q) {
  const std::int64_t half = static_cast<std::int64_t>(amps.size() >> 1);
  if (!go_parallel(half)) return ref::apply_pauli_x(amps, q);
  const std::uint64_t bit = 1ULL << q;
  const std::uint64_t lo = bit - 1;
  const std::uint64_t hi = ~lo;
  cplx* a = amps.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < half; ++i) {
    const std::uint64_t u = static_cast<std::uint64_t>(i);
    const std::uint64_t i0 = ((u & hi) << 1) | (u & lo);
    std::swap(a[i0], a[i0 | bit]);
  }
}

void apply_pauli_y(std::span<cplx> amps, int q) {
  const std::int64_t half = static_cast<std::int64_t>(amps.size() >> 1);
  if (!go_parallel(half)) return ref::apply_pauli_y(amps, q);
  const std::uint64_t bit = 1ULL << q;
  const std::uint64_t lo = bit - 1;
  const std::uint64_t hi = ~lo;
  cplx* a = amps.data();
  const cplx mi{0.0, -1.0};
  const cplx pi{0.0, 1.0};
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < half; ++i) {
    const std::uint64_t u = static_cast<std::uint64_t>(i);
    const std::uint64_t i0 = ((u & hi) << 1) | (u & lo);
    const std::uint64_t i1 = i0 | bit;
    const cplx t0 = a[i0];
    a[i0] = mi * a[i1];
    a[i1] = pi * t0;
  }
}

void apply_pauli_z(std::span<cplx> amps, int q) {
  const std::int64_t half = static_cast<std::int64_t>(amps.size() >> 1);
  if (!go_parallel(half)) return ref::apply_pauli_z(amps, q);
  const std::uint64_t bit = 1ULL << q;
  const std::uint64_t lo = bit - 1;
  const std::uint64_t hi = ~lo;
  cplx* a = amps.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < half; ++i) {
    const std::uint64_t u = static_cast<std::uint64_t>(i);
    const std::uint64_t i1 = (((u & hi) << 1) | (u & lo)) | bit;
    a[i1] = -a[i1];
  }
}

double norm_sq(std::span<const cplx> amps) {
  const std::int64_t dim = static_cast<std::int64_t>(amps.size());
  if (!go_parallel(dim)) return ref::norm_sq(amps);
  const cplx* a = amps.data();
  double total = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : total)
  for (std::int64_t i = 0; i < dim; ++i) total += std::norm(a[i]);
  return total;
}

cplx inner_product(std::span<const cplx> bra, std::span<const cplx> ket) {
  const std::int64_t dim = static_cast<std::int64_t>(bra.size());
  if (!go_parallel(dim)) return ref::inner_product(bra, ket);
  const cplx* b = bra.data();
  const cplx* k = ket.data();
  double re = 0.0, im = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : re, im)
  for (std::int64_t i = 0; i < dim; ++i) {
    const cplx v = std::conj(b[i]) * k[i];
    re += v.real();
    im += v.imag();
  }
  return {re, im};
}

double collision_probability(std::span<const cplx> amps) {
  const std::int64_t dim = static_cast<std::int64_t>(amps.size());
  if (!go_parallel(dim)) return ref::collision_probability(amps);
  const cplx* a = amps.data();
  double total = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : total)
  for (std::int64_t i = 0; i < dim; ++i) {
    const double p = std::norm(a[i]);
    total += p * p;
  }
  return total;
}

double weighted_probability(std::span<const cplx> amps,
                            std::span<const double> weights) {
  const std::int64_t dim = static_cast<std::int64_t>(amps.size());
  if (!go_parallel(dim)) return ref::weighted_probability(amps, weights);
  const cplx* a = amps.data();
  const double* w = weights.data();
  double total = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : total)
  for (std::int64_t i = 0; i < dim; ++i) total += std::norm(a[i]) * w[i];
  return total;
}

}  // namespace rcslab::kern
