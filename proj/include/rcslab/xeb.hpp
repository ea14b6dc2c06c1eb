#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rcslab/circuit.hpp"
#include "rcslab/estimate.hpp"
#include "rcslab/rng.hpp"
#include "rcslab/simulator.hpp"

namespace rcslab {

/// Linear cross-entropy score chi = 2^n * mean_x p_C(x) - 1 over the given
/// samples, with exact ideal probabilities. 1 for ideal samples of
/// anticoncentrated circuits, 0 for uniform samples.
struct XebResult {
  double chi = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
  std::string circuit_id;
};

XebResult estimate_xeb(const SampleSet& samples, const Circuit& c);

/// chi of a known state against precomputed ideal probabilities:
/// 2^n * sum_x |psi(x)|^2 p_ideal(x) - 1. This is the per-trajectory
/// estimator the decay sweeps average (no sampling noise).
double xeb_of_state(const Statevector& psi, std::span<const double> ideal_probs);

enum class Quantity : std::uint8_t { Xeb, Fidelity, Echo };
std::string_view to_string(Quantity q);

struct DecayPoint {
  int depth = 0;  // circuit layer count, i.e. noise rounds per qubit
  double mean = 0.0;
  double std_error = 0.0;
};

struct DecayCurve {
  Quantity quantity = Quantity::Xeb;
  int n = 0;
  double eps = 0.0;
  int n_circuits = 0;
  int n_traj = 0;
  std::uint64_t seed = 0;
  std::vector<DecayPoint> points;  // depths strictly increasing
};

/// Random-circuit ensemble description for sweeps and the CLI. Grid shape
/// defaults to the most-square rows x cols factorization of the sweep width.
struct EnsembleSpec {
  EnsembleTag tag = EnsembleTag::GridRcs;
  int rows = 0, cols = 0;                  // grid; 0 = derive from n
  double fsim_theta = 1.5707963267948966;  // pi/2
  double fsim_phi = 0.5235987755982988;    // pi/6
  bool no_repeat = false;                  // grid single-qubit no-repeat rule
  int degree = 3;                          // random regular graph

  Circuit build(int n, int depth_steps, std::uint64_t seed) const;

  /// Most-square rows x cols split of n.
  static std::pair<int, int> grid_shape(int n);
};

struct SweepResult {
  DecayCurve xeb;
  DecayCurve fidelity;
};

/// For each depth step, averages the exact per-trajectory XEB and fidelity
/// over n_circuits freshly drawn circuits x n_traj noisy trajectories.
/// Curve depths record the generated circuits' layer counts.
SweepResult xeb_decay_sweep(const EnsembleSpec& ensemble, int n, double eps,
                            std::span<const int> depth_steps, int n_circuits,
                            int n_traj, Rng& rng);

/// -slope of the least-squares line through (depth, ln mean). Requires at
/// least 3 points with positive means; otherwise degenerate_fit_error.
double fit_decay_rate(const DecayCurve& curve);

enum class NoisePhase : std::uint8_t { Weak, Strong, Boundary };
std::string_view to_string(NoisePhase p);

struct PhasePoint {
  int n = 0;
  double eps = 0.0;
  double fitted_rate = 0.0;
  double predicted_weak_rate = 0.0;  // eps * n per layer
  NoisePhase phase = NoisePhase::Boundary;
};

/// Weak if the fitted rate >= 0.8 * eps*n, strong if <= 0.5 * eps*n,
/// boundary otherwise.
PhasePoint classify_phase_point(int n, double eps, double fitted_xeb_rate);

/// XEB spoofer: severs every entangling gate crossing the bipartition
/// (diagonal phase masks factorize exactly and are split instead), simulates
/// the two blocks independently, and samples each block. Cost is exponential
/// only in the larger block.
SampleSet spoof_samples(const Circuit& c, const std::vector<int>& block_a,
                        int k, Rng& rng);

/// The spoofer's underlying n-qubit product state, for fidelity checks
/// against the ideal state. Cost is exponential in the full width.
Statevector spoof_product_state(const Circuit& c,
                                const std::vector<int>& block_a);

/// Fits ln F linearly in the size proxy (weighted by the estimates' standard
/// errors when all are positive) and evaluates at the target proxy with
/// propagated uncertainty.
Estimate extrapolate_fidelity(
    std::span<const std::pair<double, Estimate>> points, double target);

/// CSV with columns n,eps,depth,quantity,mean,stderr,n_circuits,n_traj,seed.
void write_sweep_csv(std::ostream& out, std::span<const DecayCurve> curves);

}  // namespace rcslab
