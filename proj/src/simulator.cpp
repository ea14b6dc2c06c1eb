#include "rcslab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rcslab/errors.hpp"

namespace rcslab {
namespace {

void check_simulable(const Circuit& c) {
  c.validate();
  if (c.n_qubits > max_qubits()) {
    throw resource_limit_error("circuit width " + std::to_string(c.n_qubits) +
                               " exceeds the statevector cap of " +
                               std::to_string(max_qubits()) + " qubits");
  }
}

void insert_layer_noise(Statevector& psi, double epsilon, Rng& rng) {
  const int n = psi.num_qubits();
  for (int q = 0; q < n; ++q) {
    if (rng.uniform() >= epsilon) continue;
    switch (rng.below(3)) {
      case 0: kern::apply_pauli_x(psi.amplitudes(), q); break;
      case 1: kern::apply_pauli_y(psi.amplitudes(), q); break;
      default: kern::apply_pauli_z(psi.amplitudes(), q); break;
    }
  }
}

}  // namespace

void NoiseModel::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("noise strength must be in [0, 1]");
  }
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) {
    throw std::invalid_argument("flip probability must be in [0, 1]");
  }
}

void save_samples(std::ostream& out, const SampleSet& s) {
  out << "# circuit=" << s.circuit_id << " n=" << s.n_qubits
      << " seed=" << s.seed << " eps=" << s.eps << " traj=" << s.n_traj
      << "\n";
  for (std::uint64_t word : s.outcomes) {
    out << format_bits(word, s.n_qubits) << "\n";
  }
}

SampleSet load_samples(std::istream& in) {
  SampleSet s;
  bool have_header = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream fields(line.substr(1));
      std::string field;
      while (fields >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        try {
          if (key == "circuit") {
            s.circuit_id = value;
            have_header = true;
          } else if (key == "n") {
            s.n_qubits = std::stoi(value);
          } else if (key == "seed") {
            s.seed = std::stoull(value);
          } else if (key == "eps") {
            s.eps = std::stod(value);
          } else if (key == "traj") {
            s.n_traj = std::stoi(value);
          }
        } catch (const std::exception&) {
          throw parse_error("bad sample header field: " + field);
        }
      }
      continue;
    }
    if (!have_header || s.n_qubits < 1) {
      throw parse_error("sample file is missing its header line");
    }
    if (static_cast<int>(line.size()) != s.n_qubits) {
      throw parse_error("sample line width does not match header n");
    }
    try {
      s.outcomes.push_back(parse_bits(line));
    } catch (const std::invalid_argument& e) {
      throw parse_error(e.what());
    }
  }
  if (!have_header) throw parse_error("sample file is missing its header line");
  return s;
}

Statevector simulate(const Circuit& c) {
  check_simulable(c);
  Statevector psi(c.n_qubits);
  for (const Layer& layer : c.layers) {
    for (const Gate& g : layer) apply_gate(psi, g);
  }
  return psi;
}

double probability(const Circuit& c, std::string_view bits) {
  if (static_cast<int>(bits.size()) != c.n_qubits) {
    throw std::invalid_argument("bitstring width does not match circuit");
  }
  const std::uint64_t index = parse_bits(bits);
  return simulate(c).probability_of(index);
}

SampleSet sample(const Statevector& psi, int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("sample count must be positive");
  const auto amps = psi.amplitudes();
  std::vector<double> cdf(amps.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    acc += std::norm(amps[i]);
    cdf[i] = acc;
  }
  SampleSet s;
  s.n_qubits = psi.num_qubits();
  s.seed = rng.seed();
  s.outcomes.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::uint64_t idx =
        it == cdf.end() ? cdf.size() - 1
                        : static_cast<std::uint64_t>(it - cdf.begin());
    s.outcomes.push_back(idx);
  }
  return s;
}

Statevector noisy_trajectory(const Circuit& c, const NoiseModel& noise,
                             Rng& rng) {
  check_simulable(c);
  noise.validate();
  Statevector psi(c.n_qubits);
  for (const Layer& layer : c.layers) {
    for (const Gate& g : layer) apply_gate(psi, g);
    insert_layer_noise(psi, noise.epsilon, rng);
  }
  return psi;
}

Estimate estimate_fidelity(const Circuit& c, const NoiseModel& noise,
                           int n_traj, Rng& rng) {
  if (n_traj < 2) throw std::invalid_argument("need at least 2 trajectories");
  const Statevector ideal = simulate(c);
  const std::uint64_t base = rng.next_u64();
  std::vector<double> overlaps(static_cast<std::size_t>(n_traj));
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < n_traj; ++t) {
    Rng traj_rng(mix_seed(base, static_cast<std::uint64_t>(t)));
    const Statevector psi = noisy_trajectory(c, noise, traj_rng);
    overlaps[static_cast<std::size_t>(t)] =
        std::norm(inner_product(ideal, psi));
  }
  return mean_estimate(overlaps);
}

Estimate loschmidt_echo(const Circuit& c, const NoiseModel& noise, int n_traj,
                        Rng& rng) {
  if (n_traj < 1) throw std::invalid_argument("need at least 1 trajectory");
  check_simulable(c);
  noise.validate();
  const std::uint64_t base = rng.next_u64();
  std::vector<double> returns(static_cast<std::size_t>(n_traj));
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < n_traj; ++t) {
    Rng traj_rng(mix_seed(base, static_cast<std::uint64_t>(t)));
    Statevector psi(c.n_qubits);
    for (const Layer& layer : c.layers) {
      for (const Gate& g : layer) apply_gate(psi, g);
      insert_layer_noise(psi, noise.epsilon, traj_rng);
    }
    for (auto it = c.layers.rbegin(); it != c.layers.rend(); ++it) {
      for (const Gate& g : *it) apply_gate(psi, g, /*dagger=*/true);
      insert_layer_noise(psi, noise.epsilon, traj_rng);
    }
    returns[static_cast<std::size_t>(t)] = psi.probability_of(0);
  }
  return mean_estimate(returns);
}

std::uint64_t apply_measurement_flips(std::uint64_t word, int n,
                                      const NoiseModel& noise, Rng& rng) {
  if (!noise.include_measurement_flip || noise.flip_probability <= 0.0) {
    return word;
  }
  for (int q = 0; q < n; ++q) {
    if (rng.uniform() < noise.flip_probability) word ^= 1ULL << q;
  }
  return word;
}

}  // namespace rcslab
