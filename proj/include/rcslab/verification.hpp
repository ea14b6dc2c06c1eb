#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rcslab/circuit.hpp"
#include "rcslab/estimate.hpp"
#include "rcslab/rng.hpp"
#include "rcslab/simulator.hpp"

namespace rcslab {

/// Pairwise Bell-basis measurement outcomes of two noisy copies of |C>.
/// Each outcome stores the raw measured bits of both copies; the Bell label
/// of pair q is (bit q of copy B) << 1 | (bit q of copy A), mapped
/// 0->I 1->Z 2->X 3->Y. Pair q is Y exactly when both bits are set.
struct BellSampleSet {
  int n_pairs = 0;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> outcomes;  // (A, B)
  std::string circuit_id;
  std::uint64_t seed = 0;
  double eps = 0.0;
  int n_preparations = 0;
  int samples_per_preparation = 1;
};

char bell_label(int index);  // "IZXY"
std::string bell_labels(std::uint64_t a, std::uint64_t b, int n);

/// Prepares two independent noisy trajectories of |C>, rotates every pair
/// (q, q+n) into the Bell basis via CNOT(q, q+n) then H(q), and samples k
/// outcomes. samples_per_preparation > 1 amortizes state preparation by
/// drawing several outcomes per prepared pair; the purity estimator then
/// clusters its error bars by preparation.
BellSampleSet bell_sample(const Circuit& c, const NoiseModel& noise, int k,
                          Rng& rng, int samples_per_preparation = 1);

/// Mean of (-1)^{#Y labels}: the SWAP expectation tr[rho^2], since the
/// singlet is the unique Bell state with SWAP eigenvalue -1.
Estimate estimate_purity(const BellSampleSet& b);

/// sqrt(P) with first-order error propagation. Throws
/// indeterminate_result_error when P is consistent with <= 0 at 2 sigma.
Estimate fidelity_from_bell(const BellSampleSet& b);

/// Bell sample file: SampleSet-style header plus `pairs=<n>`, then one line
/// of n Bell labels per outcome.
void save_bell_samples(std::ostream& out, const BellSampleSet& b);

enum class PauliLetter : std::uint8_t { I, X, Y, Z };

/// A locally rotated Pauli word: letter per qubit, a Z-rotation angle per
/// qubit (X and Y components are rotated in the XY plane by that angle),
/// and a global sign. Every element stabilizes the rotated graph state.
struct SymmetryOperator {
  std::vector<PauliLetter> word;
  std::vector<double> rotation;
  int sign = 1;
};

/// The n stabilizer generators of the rotated graph state: for vertex v,
/// X_v prod_{w in N(v)} Z_w conjugated by the local Z-rotations.
std::vector<SymmetryOperator> graph_symmetries(const GraphSpec& g);

/// Product of the generators indexed by the subset's set bits, with exact
/// sign tracking.
SymmetryOperator stabilizer_element(const GraphSpec& g, std::uint64_t subset);

/// Exact <psi|S|psi> (real part; the imaginary part vanishes for states in
/// the stabilized space).
double symmetry_expectation(const Statevector& psi, const SymmetryOperator& s);

/// Callback preparing one (possibly noisy) copy of the pre-measurement state.
using StatePreparer = std::function<Statevector(Rng&)>;

/// Fidelity estimator from symmetry averaging: draws n_stabilizers uniform
/// elements of the 2^n stabilizer group and measures each on fresh noisy
/// trajectories of the graph-state preparation circuit in the rotated local
/// bases. The group average equals <G|rho|G> exactly.
Estimate estimate_fidelity_graph(const GraphSpec& g, const NoiseModel& noise,
                                 int n_stabilizers, int shots_per_stabilizer,
                                 Rng& rng);

/// Same estimator against an arbitrary preparation, e.g. a globally
/// depolarized state synthesized in tests or an adversary's samples.
Estimate estimate_fidelity_graph_sampled(const GraphSpec& g,
                                         const StatePreparer& prepare,
                                         int n_stabilizers,
                                         int shots_per_stabilizer, Rng& rng);

/// Construction parameters for the planted-bias IQP scheme.
struct PlantSpec {
  double planted_theta = 0.39269908169872414;  // pi/8
  int decoy_count = 0;                         // 0 means 2n decoys
  double decoy_theta_max = 6.283185307179586;  // 2 pi
};

/// Secret material and the verification policy derived at build time.
struct SecretKey {
  int n = 0;
  std::uint64_t secret = 0;  // nonzero
  double planted_theta = 0.0;
  double beta_honest = 0.0;  // Pr[x.s even] of the ideal output distribution
  double threshold = 0.0;    // accept iff empirical bias >= threshold
  std::int64_t min_samples = 0;
};

void save_key(std::ostream& out, const SecretKey& key);
SecretKey load_key(std::istream& in);

struct PlantedCircuit {
  Circuit circuit;
  SecretKey key;
};

/// Builds an IQP circuit whose output distribution is biased toward even
/// parity against the secret: one phase gate of angle planted_theta per
/// secret bit (each mask carries that bit plus random off-secret bits),
/// interleaved with random decoy phase gates supported off the secret.
/// beta_honest is measured from the exact output distribution at build time;
/// the default threshold is midway between it and 1/2, and min_samples makes
/// both Chernoff error bounds <= 1%.
PlantedCircuit plant_secret_iqp(int n, std::uint64_t secret,
                                const PlantSpec& spec, Rng& rng);

/// Fraction of samples with x . secret even.
double parity_bias(const SampleSet& samples, std::uint64_t secret);

struct Verdict {
  bool accepted = false;
  double statistic = 0.0;
  double threshold = 0.0;
  double p_value = 1.0;  // under the uniform-sampler null
};

/// Accepts iff the empirical bias reaches the key's threshold; reports the
/// exact binomial p-value under the uniform null. Requires at least
/// key.min_samples samples.
Verdict verify_planted(const SampleSet& samples, const SecretKey& key);

/// Upper tail Pr[Bin(k, 1/2) >= m], exact up to double underflow.
double binomial_tail_half(std::int64_t k, std::int64_t m);

}  // namespace rcslab
