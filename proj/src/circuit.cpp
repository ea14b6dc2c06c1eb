#include "rcslab/circuit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "rcslab/errors.hpp"
#include "rcslab/rng.hpp"

namespace rcslab {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kPi = std::numbers::pi;

void check_qubit(int q, int n, const char* where) {
  if (q < 0 || q >= n) {
    throw std::invalid_argument(std::string(where) + ": qubit index " +
                                std::to_string(q) + " outside [0, " +
                                std::to_string(n) + ")");
  }
}

}  // namespace

std::string_view to_string(EnsembleTag tag) {
  switch (tag) {
    case EnsembleTag::GridRcs: return "grid-rcs";
    case EnsembleTag::RrGraphRcs: return "rr-graph-rcs";
    case EnsembleTag::Iqp: return "iqp";
    case EnsembleTag::RotatedGraphState: return "rotated-graph-state";
    case EnsembleTag::Custom: return "custom";
  }
  return "custom";
}

EnsembleTag ensemble_from_string(std::string_view s) {
  if (s == "grid-rcs") return EnsembleTag::GridRcs;
  if (s == "rr-graph-rcs") return EnsembleTag::RrGraphRcs;
  if (s == "iqp") return EnsembleTag::Iqp;
  if (s == "rotated-graph-state") return EnsembleTag::RotatedGraphState;
  if (s == "custom") return EnsembleTag::Custom;
  throw std::invalid_argument("unknown ensemble tag: " + std::string(s));
}

std::size_t Circuit::gate_count() const {
  std::size_t total = 0;
  for (const Layer& layer : layers) total += layer.size();
  return total;
}

std::string Circuit::id() const {
  const std::uint64_t h = fnv1a(serialize(*this));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void Circuit::validate() const {
  if (n_qubits < 1 || n_qubits > 64) {
    throw std::invalid_argument("circuit width must be in [1, 64]");
  }
  const std::uint64_t width_mask =
      n_qubits == 64 ? ~0ULL : (1ULL << n_qubits) - 1;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    std::uint64_t used = 0;
    for (const Gate& g : layers[li]) {
      const char* where = "circuit layer";
      if (g.kind == GateKind::DiagPhase) {
        if (g.mask & ~width_mask) {
          throw std::invalid_argument("DiagPhase mask wider than circuit");
        }
      } else {
        check_qubit(g.q1, n_qubits, where);
        if (g.is_two_qubit()) {
          check_qubit(g.q2, n_qubits, where);
          if (g.q1 == g.q2) {
            throw std::invalid_argument("two-qubit gate endpoints must differ");
          }
        }
      }
      const std::uint64_t s = g.support();
      if (used & s) {
        throw std::invalid_argument("layer " + std::to_string(li) +
                                    " reuses a qubit");
      }
      used |= s;
    }
  }
}

void GraphSpec::validate() const {
  if (n_vertices < 1 || n_vertices > 64) {
    throw std::invalid_argument("graph must have 1..64 vertices");
  }
  if (static_cast<int>(angles.size()) != n_vertices) {
    throw std::invalid_argument("angle list length must equal vertex count");
  }
  std::set<std::pair<int, int>> seen;
  for (auto [u, v] : edges) {
    check_qubit(u, n_vertices, "graph edge");
    check_qubit(v, n_vertices, "graph edge");
    if (u == v) throw std::invalid_argument("graph has a self-loop");
    if (!seen.insert({std::min(u, v), std::max(u, v)}).second) {
      throw std::invalid_argument("graph has a duplicate edge");
    }
  }
}

std::vector<Layer> pack_into_layers(std::span<const Gate> gates) {
  std::vector<Layer> layers;
  std::vector<std::uint64_t> used;
  for (const Gate& g : gates) {
    const std::uint64_t s = g.support();
    std::size_t slot = layers.size();
    // First layer, scanning backward, that the gate cannot commute past.
    while (slot > 0 && (used[slot - 1] & s) == 0) --slot;
    if (slot == layers.size()) {
      layers.emplace_back();
      used.push_back(0);
    }
    layers[slot].push_back(g);
    used[slot] |= s;
  }
  return layers;
}

Circuit build_grid_rcs(int rows, int cols, int depth, double fsim_theta,
                       double fsim_phi, std::uint64_t seed, bool no_repeat) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("grid dimensions must be positive");
  }
  if (depth < 0) throw std::invalid_argument("depth must be non-negative");
  const int n = rows * cols;
  if (n > 64) throw std::invalid_argument("grid too large (over 64 qubits)");

  const auto index = [cols](int r, int c) { return r * cols + c; };
  Rng rng(seed);
  Circuit circuit{n, {}, EnsembleTag::GridRcs, seed};
  std::vector<int> previous(static_cast<std::size_t>(n), -1);

  for (int step = 0; step < depth; ++step) {
    Layer singles;
    singles.reserve(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) {
      int pick = static_cast<int>(rng.below(3));
      if (no_repeat && pick == previous[static_cast<std::size_t>(q)]) {
        pick = (pick + 1 + static_cast<int>(rng.below(2))) % 3;
      }
      previous[static_cast<std::size_t>(q)] = pick;
      static constexpr GateKind kinds[3] = {GateKind::SqrtX, GateKind::SqrtY,
                                            GateKind::SqrtW};
      singles.push_back({kinds[pick], q});
    }
    circuit.layers.push_back(std::move(singles));

    // Coupler pattern cycles through staggered horizontal and vertical
    // pairings; patterns with no couplers stay as empty layers so every
    // step contributes exactly two noise rounds.
    Layer couplers;
    const int pattern = step % 4;
    if (pattern == 0 || pattern == 1) {
      for (int r = 0; r < rows; ++r) {
        for (int c = pattern; c + 1 < cols; c += 2) {
          couplers.push_back(
              Gate::fsim(index(r, c), index(r, c + 1), fsim_theta, fsim_phi));
        }
      }
    } else {
      for (int r = pattern - 2; r + 1 < rows; r += 2) {
        for (int c = 0; c < cols; ++c) {
          couplers.push_back(
              Gate::fsim(index(r, c), index(r + 1, c), fsim_theta, fsim_phi));
        }
      }
    }
    circuit.layers.push_back(std::move(couplers));
  }
  circuit.validate();
  return circuit;
}

namespace {

/// Simple degree-regular graph via the pairing model with rejection.
std::vector<std::pair<int, int>> random_regular_graph(int n, int degree,
                                                      Rng& rng) {
  std::vector<int> stubs;
  stubs.reserve(static_cast<std::size_t>(n) * degree);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    stubs.clear();
    for (int v = 0; v < n; ++v) {
      for (int d = 0; d < degree; ++d) stubs.push_back(v);
    }
    for (std::size_t i = stubs.size(); i > 1; --i) {
      std::swap(stubs[i - 1], stubs[rng.below(i)]);
    }
    std::set<std::pair<int, int>> edges;
    bool ok = true;
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
      const int u = std::min(stubs[i], stubs[i + 1]);
      const int v = std::max(stubs[i], stubs[i + 1]);
      if (u == v || !edges.insert({u, v}).second) {
        ok = false;
        break;
      }
    }
    if (ok) return {edges.begin(), edges.end()};
  }
  throw std::runtime_error("random regular graph generation did not converge");
}

/// Appends a layer of i.i.d. Haar single-qubit rotations as the five-layer
/// elementary composite Rz . H . Rz . H . Rz (ZYZ Euler angles, with the
/// S-conjugation folded into the outer diagonal layers).
void append_haar_rotation_layers(Circuit& circuit, Rng& rng) {
  const int n = circuit.n_qubits;
  Layer first, mid, last, wall_a, wall_b;
  for (int q = 0; q < n; ++q) {
    const double alpha = rng.uniform(0.0, 2.0 * kPi);
    const double beta = std::acos(2.0 * rng.uniform() - 1.0);
    const double gamma = rng.uniform(0.0, 2.0 * kPi);
    first.push_back(Gate::diag_phase(gamma - kPi / 2.0, 1ULL << q));
    mid.push_back(Gate::diag_phase(beta, 1ULL << q));
    last.push_back(Gate::diag_phase(alpha + kPi / 2.0, 1ULL << q));
    wall_a.push_back(Gate::h(q));
    wall_b.push_back(Gate::h(q));
  }
  circuit.layers.push_back(std::move(first));
  circuit.layers.push_back(std::move(wall_a));
  circuit.layers.push_back(std::move(mid));
  circuit.layers.push_back(std::move(wall_b));
  circuit.layers.push_back(std::move(last));
}

}  // namespace

Circuit build_rr_graph_rcs(int n, int degree, int depth, std::uint64_t seed) {
  if (n < 1 || n > 64 || degree < 0 || degree >= n ||
      (static_cast<long long>(n) * degree) % 2 != 0) {
    throw std::invalid_argument("infeasible (n, degree) for a regular graph");
  }
  if (depth < 0) throw std::invalid_argument("depth must be non-negative");

  Rng rng(seed);
  Circuit circuit{n, {}, EnsembleTag::RrGraphRcs, seed};
  for (int step = 0; step < depth; ++step) {
    append_haar_rotation_layers(circuit, rng);
    const auto edges = random_regular_graph(n, degree, rng);
    std::vector<Gate> gates;
    gates.reserve(edges.size());
    for (auto [u, v] : edges) gates.push_back(Gate::zz(u, v, kPi / 2.0));
    for (Layer& layer : pack_into_layers(gates)) {
      circuit.layers.push_back(std::move(layer));
    }
  }
  circuit.validate();
  return circuit;
}

Circuit build_iqp(int n, std::span<const PhaseGate> phase_gates,
                  std::span<const Layer> cnot_layers, std::uint64_t seed) {
  if (n < 1 || n > 64) throw std::invalid_argument("width must be in [1, 64]");
  const std::uint64_t width_mask = n == 64 ? ~0ULL : (1ULL << n) - 1;

  Circuit circuit{n, {}, EnsembleTag::Iqp, seed};
  Layer wall;
  for (int q = 0; q < n; ++q) wall.push_back(Gate::h(q));
  circuit.layers.push_back(wall);

  std::vector<Gate> gates;
  gates.reserve(phase_gates.size());
  for (const PhaseGate& pg : phase_gates) {
    if (pg.mask & ~width_mask) {
      throw std::invalid_argument("phase gate mask wider than n bits");
    }
    gates.push_back(Gate::diag_phase(pg.theta, pg.mask));
  }
  for (Layer& layer : pack_into_layers(gates)) {
    circuit.layers.push_back(std::move(layer));
  }
  for (const Layer& layer : cnot_layers) {
    for (const Gate& g : layer) {
      if (g.kind != GateKind::CNot) {
        throw std::invalid_argument("cnot_layers may contain only CNOT gates");
      }
    }
    circuit.layers.push_back(layer);
  }
  circuit.layers.push_back(wall);
  circuit.validate();
  return circuit;
}

Circuit build_graph_state_prep(const GraphSpec& g) {
  g.validate();
  const int n = g.n_vertices;
  Circuit circuit{n, {}, EnsembleTag::RotatedGraphState, 0};
  Layer wall;
  for (int q = 0; q < n; ++q) wall.push_back(Gate::h(q));
  circuit.layers.push_back(std::move(wall));

  std::vector<Gate> czs;
  czs.reserve(g.edges.size());
  for (auto [u, v] : g.edges) czs.push_back(Gate::cz(u, v));
  for (Layer& layer : pack_into_layers(czs)) {
    circuit.layers.push_back(std::move(layer));
  }

  Layer rotations;
  for (int v = 0; v < n; ++v) {
    rotations.push_back(
        Gate::diag_phase(g.angles[static_cast<std::size_t>(v)], 1ULL << v));
  }
  circuit.layers.push_back(std::move(rotations));
  circuit.validate();
  return circuit;
}

Circuit build_rotated_graph_state(const GraphSpec& g) {
  Circuit circuit = build_graph_state_prep(g);
  Layer wall;
  for (int q = 0; q < g.n_vertices; ++q) wall.push_back(Gate::h(q));
  circuit.layers.push_back(std::move(wall));
  return circuit;
}

std::string mask_to_string(std::uint64_t mask, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int q = 0; q < n; ++q) {
    if ((mask >> q) & 1ULL) s[static_cast<std::size_t>(q)] = '1';
  }
  return s;
}

std::uint64_t mask_from_string(std::string_view bits) {
  if (bits.empty() || bits.size() > 64) {
    throw std::invalid_argument("bitmask string must have 1..64 characters");
  }
  std::uint64_t mask = 0;
  for (std::size_t q = 0; q < bits.size(); ++q) {
    if (bits[q] == '1') {
      mask |= 1ULL << q;
    } else if (bits[q] != '0') {
      throw std::invalid_argument("bitmask string may contain only 0 and 1");
    }
  }
  return mask;
}

namespace {

ordered_json gate_to_json(const Gate& g, int n) {
  switch (g.kind) {
    case GateKind::H: return ordered_json::array({"H", g.q1});
    case GateKind::SqrtX: return ordered_json::array({"SX", g.q1});
    case GateKind::SqrtY: return ordered_json::array({"SY", g.q1});
    case GateKind::SqrtW: return ordered_json::array({"SW", g.q1});
    case GateKind::FSim:
      return ordered_json::array({"FSIM", g.q1, g.q2, g.a, g.b});
    case GateKind::CZ: return ordered_json::array({"CZ", g.q1, g.q2});
    case GateKind::CNot: return ordered_json::array({"CNOT", g.q1, g.q2});
    case GateKind::ZZ: return ordered_json::array({"ZZ", g.q1, g.q2, g.a});
    case GateKind::DiagPhase:
      return ordered_json::array({"DPHASE", g.a, mask_to_string(g.mask, n)});
    default:
      throw std::invalid_argument(
          "Pauli noise insertions are not serializable gates");
  }
}

int expect_int(const json& v, const char* what) {
  if (!v.is_number_integer()) {
    throw parse_error(std::string("expected integer for ") + what);
  }
  return v.get<int>();
}

double expect_number(const json& v, const char* what) {
  if (!v.is_number()) {
    throw parse_error(std::string("expected number for ") + what);
  }
  return v.get<double>();
}

Gate gate_from_json(const json& j, int n) {
  if (!j.is_array() || j.empty() || !j[0].is_string()) {
    throw parse_error("gate must be an array starting with a tag");
  }
  const std::string tag = j[0].get<std::string>();
  const auto arity = [&](std::size_t want) {
    if (j.size() != want) {
      throw parse_error("gate " + tag + " expects " + std::to_string(want - 1) +
                        " arguments");
    }
  };
  if (tag == "H" || tag == "SX" || tag == "SY" || tag == "SW") {
    arity(2);
    const int q = expect_int(j[1], "qubit");
    if (tag == "H") return Gate::h(q);
    if (tag == "SX") return Gate::sx(q);
    if (tag == "SY") return Gate::sy(q);
    return Gate::sw(q);
  }
  if (tag == "FSIM") {
    arity(5);
    return Gate::fsim(expect_int(j[1], "qubit"), expect_int(j[2], "qubit"),
                      expect_number(j[3], "theta"), expect_number(j[4], "phi"));
  }
  if (tag == "CZ") {
    arity(3);
    return Gate::cz(expect_int(j[1], "qubit"), expect_int(j[2], "qubit"));
  }
  if (tag == "CNOT") {
    arity(3);
    return Gate::cnot(expect_int(j[1], "control"), expect_int(j[2], "target"));
  }
  if (tag == "ZZ") {
    arity(4);
    return Gate::zz(expect_int(j[1], "qubit"), expect_int(j[2], "qubit"),
                    expect_number(j[3], "angle"));
  }
  if (tag == "DPHASE") {
    arity(3);
    if (!j[2].is_string()) throw parse_error("DPHASE mask must be a string");
    const std::string bits = j[2].get<std::string>();
    if (static_cast<int>(bits.size()) != n) {
      throw parse_error("DPHASE mask width must equal n");
    }
    return Gate::diag_phase(expect_number(j[1], "theta"),
                            mask_from_string(bits));
  }
  throw parse_error("unknown gate tag: " + tag);
}

}  // namespace

std::string serialize(const Circuit& c) {
  ordered_json doc;
  doc["version"] = 1;
  doc["n"] = c.n_qubits;
  doc["ensemble"] = to_string(c.ensemble);
  doc["seed"] = c.seed;
  ordered_json layers = ordered_json::array();
  for (const Layer& layer : c.layers) {
    ordered_json jl = ordered_json::array();
    for (const Gate& g : layer) jl.push_back(gate_to_json(g, c.n_qubits));
    layers.push_back(std::move(jl));
  }
  doc["layers"] = std::move(layers);
  return doc.dump();
}

Circuit parse_circuit(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw parse_error(e.what(), e.byte);
  }
  if (!doc.is_object()) throw parse_error("circuit document must be an object");
  static const std::set<std::string> allowed = {"version", "n", "ensemble",
                                                "seed", "layers"};
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (!allowed.contains(key)) {
      throw parse_error("unknown field in circuit document: " + key);
    }
  }
  for (const std::string& key : allowed) {
    if (!doc.contains(key)) {
      throw parse_error("circuit document is missing field: " + key);
    }
  }
  if (expect_int(doc["version"], "version") != 1) {
    throw parse_error("unsupported circuit schema version");
  }

  Circuit c;
  c.n_qubits = expect_int(doc["n"], "n");
  if (!doc["ensemble"].is_string()) throw parse_error("ensemble must be a string");
  try {
    c.ensemble = ensemble_from_string(doc["ensemble"].get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw parse_error(e.what());
  }
  if (!doc["seed"].is_number_integer()) throw parse_error("seed must be an integer");
  c.seed = doc["seed"].get<std::uint64_t>();
  if (!doc["layers"].is_array()) throw parse_error("layers must be an array");
  for (const json& jl : doc["layers"]) {
    if (!jl.is_array()) throw parse_error("each layer must be an array");
    Layer layer;
    for (const json& jg : jl) layer.push_back(gate_from_json(jg, c.n_qubits));
    c.layers.push_back(std::move(layer));
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw parse_error(e.what());
  }
  return c;
}

}  // namespace rcslab
