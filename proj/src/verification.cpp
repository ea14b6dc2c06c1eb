#include "rcslab/verification.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "rcslab/errors.hpp"

namespace rcslab {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInvSqrt2 = 0.7071067811865475244;

std::uint64_t width_mask(int n) { return n == 64 ? ~0ULL : (1ULL << n) - 1; }

/// Draws one outcome index from the Born distribution of psi.
std::uint64_t draw_outcome(const Statevector& psi, Rng& rng) {
  const auto amps = psi.amplitudes();
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    acc += std::norm(amps[i]);
    if (u < acc) return i;
  }
  return amps.size() - 1;
}

}  // namespace

char bell_label(int index) {
  static constexpr char labels[4] = {'I', 'Z', 'X', 'Y'};
  return labels[index & 3];
}

std::string bell_labels(std::uint64_t a, std::uint64_t b, int n) {
  std::string s(static_cast<std::size_t>(n), 'I');
  for (int q = 0; q < n; ++q) {
    const int idx = static_cast<int>(((b >> q) & 1ULL) << 1 | ((a >> q) & 1ULL));
    s[static_cast<std::size_t>(q)] = bell_label(idx);
  }
  return s;
}

BellSampleSet bell_sample(const Circuit& c, const NoiseModel& noise, int k,
                          Rng& rng, int samples_per_preparation) {
  c.validate();
  noise.validate();
  if (k < 1) throw std::invalid_argument("sample count must be positive");
  if (samples_per_preparation < 1) {
    throw std::invalid_argument("samples_per_preparation must be positive");
  }
  const int n = c.n_qubits;
  if (2 * n > max_qubits()) {
    throw resource_limit_error(
        "two copies need " + std::to_string(2 * n) +
        " qubits, above the cap of " + std::to_string(max_qubits()));
  }

  const int spp = samples_per_preparation;
  const int n_prep = (k + spp - 1) / spp;
  const std::uint64_t base = rng.next_u64();
  const std::uint64_t nmask = width_mask(n);
  const Mat2 hadamard{kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2};

  BellSampleSet out;
  out.n_pairs = n;
  out.circuit_id = c.id();
  out.seed = rng.seed();
  out.eps = noise.epsilon;
  out.n_preparations = n_prep;
  out.samples_per_preparation = spp;
  out.outcomes.assign(static_cast<std::size_t>(k), {});

#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < n_prep; ++p) {
    Rng prep_rng(mix_seed(base, static_cast<std::uint64_t>(p)));
    Rng rng_a = prep_rng.stream(0);
    Rng rng_b = prep_rng.stream(1);
    Rng rng_s = prep_rng.stream(2);
    const Statevector copy_a = noisy_trajectory(c, noise, rng_a);
    const Statevector copy_b = noisy_trajectory(c, noise, rng_b);
    Statevector joint = tensor_product(copy_a, copy_b);
    for (int q = 0; q < n; ++q) {
      kern::apply_cnot(joint.amplitudes(), q, q + n);
      kern::apply_1q(joint.amplitudes(), q, hadamard);
    }
    const int first = p * spp;
    const int count = std::min(spp, k - first);
    for (int j = 0; j < count; ++j) {
      std::uint64_t idx = draw_outcome(joint, rng_s);
      idx = apply_measurement_flips(idx, 2 * n, noise, rng_s);
      out.outcomes[static_cast<std::size_t>(first + j)] = {idx & nmask,
                                                           idx >> n};
    }
  }
  return out;
}

Estimate estimate_purity(const BellSampleSet& b) {
  const std::size_t k = b.outcomes.size();
  if (k < 2) throw std::invalid_argument("purity needs at least 2 outcomes");
  const auto parity_sign = [](const std::pair<std::uint64_t, std::uint64_t>& o) {
    // Y labels are exactly the pairs with both bits set.
    return (std::popcount(o.first & o.second) & 1) ? -1.0 : 1.0;
  };
  if (b.samples_per_preparation <= 1) {
    std::vector<double> values;
    values.reserve(k);
    for (const auto& o : b.outcomes) values.push_back(parity_sign(o));
    return mean_estimate(values);
  }
  // Outcomes within one preparation share the prepared pair; cluster the
  // error bar by preparation.
  const std::size_t spp = static_cast<std::size_t>(b.samples_per_preparation);
  std::vector<double> cluster_means;
  for (std::size_t first = 0; first < k; first += spp) {
    const std::size_t count = std::min(spp, k - first);
    double acc = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
      acc += parity_sign(b.outcomes[first + j]);
    }
    cluster_means.push_back(acc / static_cast<double>(count));
  }
  Estimate e = mean_estimate(cluster_means);
  e.n_samples = static_cast<std::int64_t>(k);
  return e;
}

Estimate fidelity_from_bell(const BellSampleSet& b) {
  const Estimate p = estimate_purity(b);
  if (!(p.value - 2.0 * p.std_error > 0.0)) {
    throw indeterminate_result_error(
        "purity estimate is consistent with <= 0; cannot take a square root");
  }
  const double root = std::sqrt(p.value);
  return {root, p.std_error / (2.0 * root), p.n_samples};
}

void save_bell_samples(std::ostream& out, const BellSampleSet& b) {
  out << "# circuit=" << b.circuit_id << " n=" << b.n_pairs
      << " seed=" << b.seed << " eps=" << b.eps << " traj=" << b.n_preparations
      << " pairs=" << b.n_pairs << "\n";
  for (const auto& [a, bb] : b.outcomes) {
    out << bell_labels(a, bb, b.n_pairs) << "\n";
  }
}

namespace {

// Single-qubit Pauli products P_a * P_b: resulting letter and the exponent k
// of the i^k prefactor, with letters ordered I, X, Y, Z.
constexpr std::uint8_t kPauliProduct[4][4] = {
    {0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
constexpr std::uint8_t kPauliPhase[4][4] = {
    {0, 0, 0, 0}, {0, 0, 1, 3}, {0, 3, 0, 1}, {0, 1, 3, 0}};

}  // namespace

SymmetryOperator stabilizer_element(const GraphSpec& g, std::uint64_t subset) {
  g.validate();
  const int n = g.n_vertices;
  std::vector<std::uint8_t> word(static_cast<std::size_t>(n), 0);
  int phase = 0;

  std::vector<std::vector<int>> neighbors(static_cast<std::size_t>(n));
  for (auto [u, v] : g.edges) {
    neighbors[static_cast<std::size_t>(u)].push_back(v);
    neighbors[static_cast<std::size_t>(v)].push_back(u);
  }

  const auto multiply_letter = [&](int q, std::uint8_t letter) {
    const std::uint8_t cur = word[static_cast<std::size_t>(q)];
    phase = (phase + kPauliPhase[cur][letter]) & 3;
    word[static_cast<std::size_t>(q)] = kPauliProduct[cur][letter];
  };

  for (int v = 0; v < n; ++v) {
    if (!((subset >> v) & 1ULL)) continue;
    multiply_letter(v, 1);  // X on the vertex
    for (int w : neighbors[static_cast<std::size_t>(v)]) {
      multiply_letter(w, 3);  // Z on each neighbor
    }
  }
  if (phase & 1) {
    throw std::logic_error("stabilizer product produced an imaginary phase");
  }

  SymmetryOperator op;
  op.sign = phase == 0 ? 1 : -1;
  op.word.resize(static_cast<std::size_t>(n));
  op.rotation = g.angles;
  for (int q = 0; q < n; ++q) {
    op.word[static_cast<std::size_t>(q)] =
        static_cast<PauliLetter>(word[static_cast<std::size_t>(q)]);
  }
  return op;
}

std::vector<SymmetryOperator> graph_symmetries(const GraphSpec& g) {
  std::vector<SymmetryOperator> generators;
  generators.reserve(static_cast<std::size_t>(g.n_vertices));
  for (int v = 0; v < g.n_vertices; ++v) {
    generators.push_back(stabilizer_element(g, 1ULL << v));
  }
  return generators;
}

double symmetry_expectation(const Statevector& psi, const SymmetryOperator& s) {
  Statevector rotated = psi;
  auto amps = rotated.amplitudes();
  for (std::size_t q = 0; q < s.word.size(); ++q) {
    const int qi = static_cast<int>(q);
    switch (s.word[q]) {
      case PauliLetter::I:
        break;
      case PauliLetter::Z:
        kern::apply_pauli_z(amps, qi);
        break;
      case PauliLetter::X:
      case PauliLetter::Y: {
        const double a =
            s.rotation[q] + (s.word[q] == PauliLetter::Y ? kPi / 2.0 : 0.0);
        const Mat2 m{0.0, std::polar(1.0, -a), std::polar(1.0, a), 0.0};
        kern::apply_1q(amps, qi, m);
        break;
      }
    }
  }
  return static_cast<double>(s.sign) * inner_product(psi, rotated).real();
}

namespace {

/// Rotates the state so the symmetry becomes a product of Z's on `support`.
std::uint64_t rotate_to_measurement_basis(Statevector& psi,
                                          const SymmetryOperator& s) {
  constexpr double kHalfPi = kPi / 2.0;
  const Mat2 hadamard{kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2};
  std::uint64_t support = 0;
  for (std::size_t q = 0; q < s.word.size(); ++q) {
    if (s.word[q] == PauliLetter::I) continue;
    support |= 1ULL << q;
    if (s.word[q] == PauliLetter::Z) continue;
    const double a =
        s.rotation[q] + (s.word[q] == PauliLetter::Y ? kHalfPi : 0.0);
    kern::apply_diag_phase(psi.amplitudes(), -a, 1ULL << q);
    kern::apply_1q(psi.amplitudes(), static_cast<int>(q), hadamard);
  }
  return support;
}

}  // namespace

Estimate estimate_fidelity_graph_sampled(const GraphSpec& g,
                                         const StatePreparer& prepare,
                                         int n_stabilizers,
                                         int shots_per_stabilizer, Rng& rng) {
  g.validate();
  if (n_stabilizers < 1 || shots_per_stabilizer < 1) {
    throw std::invalid_argument("need at least one stabilizer and one shot");
  }
  const std::uint64_t group_mask = width_mask(g.n_vertices);
  const std::uint64_t base = rng.next_u64();
  std::vector<double> stab_means(static_cast<std::size_t>(n_stabilizers));

#pragma omp parallel for schedule(dynamic)
  for (int si = 0; si < n_stabilizers; ++si) {
    Rng stab_rng(mix_seed(base, static_cast<std::uint64_t>(si)));
    const std::uint64_t subset = stab_rng.next_u64() & group_mask;
    const SymmetryOperator op = stabilizer_element(g, subset);
    double acc = 0.0;
    for (int shot = 0; shot < shots_per_stabilizer; ++shot) {
      Statevector psi = prepare(stab_rng);
      const std::uint64_t support = rotate_to_measurement_basis(psi, op);
      const std::uint64_t outcome = draw_outcome(psi, stab_rng);
      const double parity =
          (std::popcount(outcome & support) & 1) ? -1.0 : 1.0;
      acc += static_cast<double>(op.sign) * parity;
    }
    stab_means[static_cast<std::size_t>(si)] =
        acc / static_cast<double>(shots_per_stabilizer);
  }
  Estimate e = mean_estimate(stab_means);
  e.n_samples = static_cast<std::int64_t>(n_stabilizers) * shots_per_stabilizer;
  return e;
}

Estimate estimate_fidelity_graph(const GraphSpec& g, const NoiseModel& noise,
                                 int n_stabilizers, int shots_per_stabilizer,
                                 Rng& rng) {
  noise.validate();
  const Circuit prep = build_graph_state_prep(g);
  if (prep.n_qubits > max_qubits()) {
    throw resource_limit_error("graph too wide for the statevector cap");
  }
  const StatePreparer prepare = [&prep, &noise](Rng& r) {
    return noisy_trajectory(prep, noise, r);
  };
  return estimate_fidelity_graph_sampled(g, prepare, n_stabilizers,
                                         shots_per_stabilizer, rng);
}

PlantedCircuit plant_secret_iqp(int n, std::uint64_t secret,
                                const PlantSpec& spec, Rng& rng) {
  if (n < 2) throw std::invalid_argument("planted circuits need n >= 2");
  if (n > max_qubits()) {
    throw resource_limit_error(
        "plant-time bias measurement needs n within the statevector cap");
  }
  const std::uint64_t wmask = width_mask(n);
  if (secret == 0) throw std::invalid_argument("secret must be nonzero");
  if (secret & ~wmask) throw std::invalid_argument("secret wider than n bits");

  const std::uint64_t complement = wmask & ~secret;
  const auto random_subset = [&rng](std::uint64_t allowed) {
    std::uint64_t sub = 0;
    std::uint64_t remaining = allowed;
    while (remaining) {
      const std::uint64_t bit = remaining & (~remaining + 1);
      if (rng.uniform() < 0.5) sub |= bit;
      remaining ^= bit;
    }
    if (sub == 0 && allowed != 0) {
      // Force at least one camouflage bit.
      std::uint64_t bits[64];
      int count = 0;
      for (std::uint64_t rem = allowed; rem;) {
        const std::uint64_t bit = rem & (~rem + 1);
        bits[count++] = bit;
        rem ^= bit;
      }
      sub = bits[rng.below(static_cast<std::uint64_t>(count))];
    }
    return sub;
  };

  std::vector<PhaseGate> gates;
  for (int b = 0; b < n; ++b) {
    if (!((secret >> b) & 1ULL)) continue;
    gates.push_back({spec.planted_theta, (1ULL << b) | random_subset(complement)});
  }
  const int decoys = spec.decoy_count > 0 ? spec.decoy_count : 2 * n;
  if (complement != 0) {
    for (int d = 0; d < decoys; ++d) {
      gates.push_back(
          {rng.uniform(0.0, spec.decoy_theta_max), random_subset(complement)});
    }
  }
  for (std::size_t i = gates.size(); i > 1; --i) {
    std::swap(gates[i - 1], gates[rng.below(i)]);
  }

  PlantedCircuit planted;
  planted.circuit = build_iqp(n, gates, {}, rng.seed());
  const std::vector<double> probs = probabilities(simulate(planted.circuit));
  double beta = 0.0;
  for (std::uint64_t x = 0; x < probs.size(); ++x) {
    if ((std::popcount(x & secret) & 1) == 0) beta += probs[x];
  }
  if (!(beta > 0.5 + 1e-9)) {
    throw std::invalid_argument(
        "plant strength produced no measurable bias (theta too close to pi/2)");
  }

  SecretKey& key = planted.key;
  key.n = n;
  key.secret = secret;
  key.planted_theta = spec.planted_theta;
  key.beta_honest = beta;
  key.threshold = 0.5 * (beta + 0.5);
  const double margin = 0.5 * (beta - 0.5);
  key.min_samples = std::max<std::int64_t>(
      32, static_cast<std::int64_t>(
              std::ceil(std::log(100.0) / (2.0 * margin * margin))));
  return planted;
}

double parity_bias(const SampleSet& samples, std::uint64_t secret) {
  if (samples.outcomes.empty()) {
    throw std::invalid_argument("cannot compute a bias from zero samples");
  }
  std::size_t even = 0;
  for (std::uint64_t x : samples.outcomes) {
    if ((std::popcount(x & secret) & 1) == 0) ++even;
  }
  return static_cast<double>(even) / static_cast<double>(samples.outcomes.size());
}

double binomial_tail_half(std::int64_t k, std::int64_t m) {
  if (m <= 0) return 1.0;
  if (m > k) return 0.0;
  const double log_half_k = -static_cast<double>(k) * std::log(2.0);
  const double lg_k1 = std::lgamma(static_cast<double>(k) + 1.0);
  double p = 0.0;
  for (std::int64_t i = m; i <= k; ++i) {
    const double log_c = lg_k1 - std::lgamma(static_cast<double>(i) + 1.0) -
                         std::lgamma(static_cast<double>(k - i) + 1.0);
    p += std::exp(log_c + log_half_k);
  }
  return std::min(p, 1.0);
}

Verdict verify_planted(const SampleSet& samples, const SecretKey& key) {
  if (samples.n_qubits != key.n) {
    throw std::invalid_argument("sample width does not match key width");
  }
  const auto k = static_cast<std::int64_t>(samples.outcomes.size());
  if (k < key.min_samples) {
    throw std::invalid_argument("need at least " +
                                std::to_string(key.min_samples) + " samples");
  }
  std::int64_t even = 0;
  for (std::uint64_t x : samples.outcomes) {
    if ((std::popcount(x & key.secret) & 1) == 0) ++even;
  }
  Verdict v;
  v.statistic = static_cast<double>(even) / static_cast<double>(k);
  v.threshold = key.threshold;
  v.accepted = v.statistic >= v.threshold;
  v.p_value = binomial_tail_half(k, even);
  return v;
}

void save_key(std::ostream& out, const SecretKey& key) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["n"] = key.n;
  doc["secret"] = format_bits(key.secret, key.n);
  doc["planted_theta"] = key.planted_theta;
  doc["beta_honest"] = key.beta_honest;
  doc["threshold"] = key.threshold;
  doc["min_samples"] = key.min_samples;
  out << doc.dump() << "\n";
}

SecretKey load_key(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error(e.what(), e.byte);
  }
  SecretKey key;
  try {
    if (doc.at("version").get<int>() != 1) {
      throw parse_error("unsupported key version");
    }
    key.n = doc.at("n").get<int>();
    key.secret = parse_bits(doc.at("secret").get<std::string>());
    key.planted_theta = doc.at("planted_theta").get<double>();
    key.beta_honest = doc.at("beta_honest").get<double>();
    key.threshold = doc.at("threshold").get<double>();
    key.min_samples = doc.at("min_samples").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("bad key file: ") + e.what());
  }
  if (key.n < 2 || key.secret == 0) throw parse_error("invalid key material");
  return key;
}

}  // namespace rcslab
