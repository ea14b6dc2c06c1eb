#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>

namespace rcslab {

using cplx = std::complex<double>;

/// Row-major 2x2 single-qubit matrix: m[out*2 + in].
using Mat2 = std::array<cplx, 4>;

/// Row-major 4x4 two-qubit matrix in the local basis |b2 b1> where b1 is the
/// bit at q1 and b2 the bit at q2: m[out*4 + in] with local index (b2<<1)|b1.
using Mat4 = std::array<cplx, 16>;

// OpenMP-parallel kernels. Amplitude loops split across threads above a size
// threshold and fall back to the serial body inside nested parallel regions,
// so per-trajectory parallel callers are safe.
namespace kern {

void apply_1q(std::span<cplx> amps, int q, const Mat2& m);
void apply_2q(std::span<cplx> amps, int q1, int q2, const Mat4& m);
void apply_cnot(std::span<cplx> amps, int control, int target);
void apply_cz(std::span<cplx> amps, int q1, int q2);
void apply_zz(std::span<cplx> amps, int q1, int q2, double angle);
void apply_diag_phase(std::span<cplx> amps, double theta, std::uint64_t mask);
void apply_pauli_x(std::span<cplx> amps, int q);
void apply_pauli_y(std::span<cplx> amps, int q);
void apply_pauli_z(std::span<cplx> amps, int q);

double norm_sq(std::span<const cplx> amps);
cplx inner_product(std::span<const cplx> bra, std::span<const cplx> ket);
/// sum_x |amps(x)|^4, i.e. the collision probability of the Born distribution.
double collision_probability(std::span<const cplx> amps);
/// sum_x |amps(x)|^2 * weights(x).
double weighted_probability(std::span<const cplx> amps,
                            std::span<const double> weights);

}  // namespace kern

// Serial reference implementations with identical semantics, kept as the
// ground truth the parallel kernels are tested and benchmarked against.
namespace ref {

void apply_1q(std::span<cplx> amps, int q, const Mat2& m);
void apply_2q(std::span<cplx> amps, int q1, int q2, const Mat4& m);
void apply_cnot(std::span<cplx> amps, int control, int target);
void apply_cz(std::span<cplx> amps, int q1, int q2);
void apply_zz(std::span<cplx> amps, int q1, int q2, double angle);
void apply_diag_phase(std::span<cplx> amps, double theta, std::uint64_t mask);
void apply_pauli_x(std::span<cplx> amps, int q);
void apply_pauli_y(std::span<cplx> amps, int q);
void apply_pauli_z(std::span<cplx> amps, int q);

double norm_sq(std::span<const cplx> amps);
cplx inner_product(std::span<const cplx> bra, std::span<const cplx> ket);
double collision_probability(std::span<const cplx> amps);
double weighted_probability(std::span<const cplx> amps,
                            std::span<const double> weights);

}  // namespace ref

}  // namespace rcslab
