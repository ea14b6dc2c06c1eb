#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rcslab/circuit.hpp"
#include "rcslab/estimate.hpp"
#include "rcslab/rng.hpp"
#include "rcslab/statevector.hpp"

namespace rcslab {

/// Local depolarizing noise: after every layer, every qubit independently
/// suffers a uniformly random Pauli with probability epsilon. Measurement
/// bit flips are modeled separately and are off by default.
struct NoiseModel {
  double epsilon = 0.0;
  bool include_measurement_flip = false;
  double flip_probability = 0.0;

  void validate() const;
};

/// Measured bitstrings plus the metadata needed to reproduce them.
struct SampleSet {
  std::string circuit_id;
  int n_qubits = 0;
  std::vector<std::uint64_t> outcomes;  // bit q of each word = qubit q
  std::uint64_t seed = 0;
  double eps = 0.0;
  int n_traj = 0;
};

/// File format: `# circuit=<id> n=<n> seed=<s> eps=<eps> traj=<k>` header
/// lines (extra `#` lines are ignored on read), then one bitstring per line,
/// big-endian with qubit 0 leftmost.
void save_samples(std::ostream& out, const SampleSet& s);
SampleSet load_samples(std::istream& in);

/// U_C|0...0>, layer by layer. Throws resource_limit_error above the cap.
Statevector simulate(const Circuit& c);

/// |<x|C|0>|^2 for a bitstring of exactly n bits.
double probability(const Circuit& c, std::string_view bits);

/// k i.i.d. Born draws via inverse CDF over the probability vector.
SampleSet sample(const Statevector& psi, int k, Rng& rng);

/// One pure-state unraveling of the depolarizing channel: after each layer,
/// each qubit gets a uniform Pauli with probability epsilon. Averaging
/// trajectory projectors over many draws reproduces the channel state.
Statevector noisy_trajectory(const Circuit& c, const NoiseModel& noise,
                             Rng& rng);

/// Mean over trajectories of |<C|psi_traj>|^2, i.e. <C|rho_C|C>.
Estimate estimate_fidelity(const Circuit& c, const NoiseModel& noise,
                           int n_traj, Rng& rng);

/// Runs C then C-dagger with noise active in both halves and returns the
/// probability of returning to |0...0>.
Estimate loschmidt_echo(const Circuit& c, const NoiseModel& noise, int n_traj,
                        Rng& rng);

/// Flips each measured bit independently with the configured probability
/// when measurement flips are enabled; otherwise returns the word unchanged.
std::uint64_t apply_measurement_flips(std::uint64_t word, int n,
                                      const NoiseModel& noise, Rng& rng);

}  // namespace rcslab
