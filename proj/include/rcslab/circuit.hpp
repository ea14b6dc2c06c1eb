#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rcslab {

enum class GateKind : std::uint8_t {
  H,
  SqrtX,
  SqrtY,
  SqrtW,  // sqrt of (X+Y)/sqrt(2)
  FSim,   // params: a = theta, b = phi
  CZ,
  CNot,  // q1 = control, q2 = target
  ZZ,    // exp(-i a/2 Z.Z), params: a = angle
  DiagPhase,  // |x> -> exp(i a * popcount(x & mask)) |x>
  PauliX,
  PauliY,
  PauliZ,
};

/// One elementary gate. q2 is unused for single-qubit kinds; mask is used
/// only by DiagPhase, whose qubit support is the set bits of the mask.
struct Gate {
  GateKind kind = GateKind::H;
  int q1 = -1;
  int q2 = -1;
  double a = 0.0;
  double b = 0.0;
  std::uint64_t mask = 0;

  static Gate h(int q) { return {GateKind::H, q}; }
  static Gate sx(int q) { return {GateKind::SqrtX, q}; }
  static Gate sy(int q) { return {GateKind::SqrtY, q}; }
  static Gate sw(int q) { return {GateKind::SqrtW, q}; }
  static Gate fsim(int q1, int q2, double theta, double phi) {
    return {GateKind::FSim, q1, q2, theta, phi};
  }
  static Gate cz(int q1, int q2) { return {GateKind::CZ, q1, q2}; }
  static Gate cnot(int control, int target) {
    return {GateKind::CNot, control, target};
  }
  static Gate zz(int q1, int q2, double angle) {
    return {GateKind::ZZ, q1, q2, angle};
  }
  static Gate diag_phase(double theta, std::uint64_t mask) {
    Gate g{GateKind::DiagPhase};
    g.a = theta;
    g.mask = mask;
    return g;
  }
  static Gate pauli_x(int q) { return {GateKind::PauliX, q}; }
  static Gate pauli_y(int q) { return {GateKind::PauliY, q}; }
  static Gate pauli_z(int q) { return {GateKind::PauliZ, q}; }

  bool is_two_qubit() const {
    return kind == GateKind::FSim || kind == GateKind::CZ ||
           kind == GateKind::CNot || kind == GateKind::ZZ;
  }

  /// Bitmask of the qubits the gate acts on.
  std::uint64_t support() const {
    if (kind == GateKind::DiagPhase) return mask;
    std::uint64_t s = 1ULL << q1;
    if (is_two_qubit()) s |= 1ULL << q2;
    return s;
  }

  bool operator==(const Gate&) const = default;
};

using Layer = std::vector<Gate>;

enum class EnsembleTag : std::uint8_t {
  GridRcs,
  RrGraphRcs,
  Iqp,
  RotatedGraphState,
  Custom,
};

std::string_view to_string(EnsembleTag tag);
EnsembleTag ensemble_from_string(std::string_view s);

/// A layered gate list. Layers are applied left to right; gates within a
/// layer act on disjoint qubits. depth() is the layer count, which is also
/// the number of noise rounds a noisy simulation inserts.
struct Circuit {
  int n_qubits = 0;
  std::vector<Layer> layers;
  EnsembleTag ensemble = EnsembleTag::Custom;
  std::uint64_t seed = 0;

  int depth() const { return static_cast<int>(layers.size()); }
  std::size_t gate_count() const;

  /// Stable content hash (hex), used as the circuit identifier in sample
  /// files and results.
  std::string id() const;

  /// Throws std::invalid_argument on any structural invariant violation:
  /// qubit out of range, qubit reuse within a layer, identical two-qubit
  /// gate endpoints, DiagPhase mask wider than n.
  void validate() const;

  bool operator==(const Circuit&) const = default;
};

/// Undirected graph with one Z-rotation angle per vertex, defining a
/// locally rotated graph state.
struct GraphSpec {
  int n_vertices = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> angles;

  /// Throws std::invalid_argument on invalid vertices, self-loops,
  /// duplicate edges, or an angle list of the wrong length.
  void validate() const;
};

// -- Ensemble builders -------------------------------------------------------

/// 2D-grid random circuit: per depth step, one layer of single-qubit gates
/// drawn i.i.d. from {sqrtX, sqrtY, sqrtW} followed by one layer of FSim
/// gates on a cyclic 4-pattern of grid couplers. Layers with no active
/// couplers (e.g. on 1xN grids) are kept empty so every step contributes
/// exactly two noise rounds. With no_repeat set, the single-qubit gate on a
/// qubit never repeats between consecutive steps.
Circuit build_grid_rcs(int rows, int cols, int depth, double fsim_theta,
                       double fsim_phi, std::uint64_t seed,
                       bool no_repeat = false);

/// Random-regular-graph circuit: per depth step, a layer of i.i.d. Haar
/// single-qubit rotations (stored as a 5-layer Z-H-Z-H-Z composite of
/// elementary gates) followed by the edges of a fresh random degree-regular
/// graph packed greedily into disjoint ZZ(pi/2) layers.
Circuit build_rr_graph_rcs(int n, int degree, int depth, std::uint64_t seed);

struct PhaseGate {
  double theta = 0.0;
  std::uint64_t mask = 0;
};

/// IQP circuit: Hadamard wall, the given diagonal phase gates (packed
/// greedily into disjoint layers) and optional CNOT layers, then a trailing
/// Hadamard wall standing in for the X-basis measurement.
Circuit build_iqp(int n, std::span<const PhaseGate> phase_gates,
                  std::span<const Layer> cnot_layers = {},
                  std::uint64_t seed = 0);

/// Rotated graph state circuit: H wall, CZ per edge, Z-rotation by the
/// per-vertex angle, trailing H wall (X-basis measurement convention).
Circuit build_rotated_graph_state(const GraphSpec& g);

/// Same as build_rotated_graph_state but without the trailing H wall: the
/// state this circuit prepares is the one the graph symmetries stabilize.
Circuit build_graph_state_prep(const GraphSpec& g);

// -- Serialization ------------------------------------------------------------

/// One JSON document per circuit:
///   {"version":1,"n":...,"ensemble":"...","seed":...,"layers":[[gate,...],...]}
/// with gate one of ["H",q] ["SX",q] ["SY",q] ["SW",q] ["FSIM",q1,q2,theta,phi]
/// ["CZ",q1,q2] ["CNOT",c,t] ["ZZ",q1,q2,angle] ["DPHASE",theta,"bits"].
/// Bitmask strings are big-endian with qubit 0 leftmost.
std::string serialize(const Circuit& c);

/// Inverse of serialize. Rejects unknown fields and any circuit that fails
/// validate(); throws parse_error with the offending byte position.
Circuit parse_circuit(std::string_view text);

/// Renders a mask as the schema's bitmask string (qubit 0 leftmost).
std::string mask_to_string(std::uint64_t mask, int n);
std::uint64_t mask_from_string(std::string_view bits);

/// Packs gates into layers greedily, preserving order, so gates within each
/// layer act on disjoint qubits.
std::vector<Layer> pack_into_layers(std::span<const Gate> gates);

}  // namespace rcslab
