#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcslab/net.hpp"
#include "rcslab/rng.hpp"
#include "rcslab/simulator.hpp"
#include "rcslab/verification.hpp"

namespace rcslab {

inline constexpr int kProtocolVersion = 1;

enum class MessageKind : std::uint8_t { Hello, Challenge, Response, Verdict, Error };
std::string_view to_string(MessageKind k);

/// One wire message: a single-line JSON document
/// {"v":1,"kind":"...","session":"...","payload":{...}}.
struct Message {
  int version = kProtocolVersion;
  MessageKind kind = MessageKind::Hello;
  std::string session;
  nlohmann::ordered_json payload;
};

std::string encode_message(const Message& m);
Message decode_message(std::string_view line);  // throws protocol_error

/// Error codes double as CLI exit codes (0 accept, 1 reject reserved).
enum class ProtocolCode : int {
  Timeout = 2,
  Malformed = 3,
  VersionMismatch = 4,
  Transport = 5,
  RemoteError = 6,
};

class protocol_error : public std::runtime_error {
 public:
  protocol_error(ProtocolCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ProtocolCode code() const noexcept { return code_; }

 private:
  ProtocolCode code_;
};

enum class ProverStrategy : std::uint8_t {
  HonestSimulator,
  SpooferBipartition,
  UniformRandom,
};
std::string_view to_string(ProverStrategy s);
ProverStrategy prover_strategy_from_string(std::string_view s);

struct ProverConfig {
  ProverStrategy strategy = ProverStrategy::HonestSimulator;
  NoiseModel noise;
  int traj_budget = 1;   // honest: preparations the samples are spread over
  int max_sessions = 1;  // 0 = serve until the process is stopped
  double timeout_seconds = 30.0;
};

struct ChallengeSpec {
  int n = 10;
  int n_circuits = 5;
  int samples_per_circuit = 10000;
  PlantSpec plant;
  double accept_fraction = 2.0 / 3.0;  // accept iff >= this fraction of circuits pass
  std::optional<double> threshold_override;
  double timeout_seconds = 30.0;
};

struct SessionReport {
  Verdict aggregate;  // statistic = fraction of circuits accepted
  std::vector<Verdict> per_circuit;
};

/// Captures the raw bytes of a session, direction-tagged per line with
/// ">> " (sent) and "<< " (received), for confidentiality checks.
struct Transcript {
  std::string text;
  void sent(std::string_view line);
  void received(std::string_view line);
};

/// Connects to a prover, sends freshly planted challenge circuits, verifies
/// the returned samples per circuit, aggregates, transmits the verdict, and
/// returns the report. Secret keys never leave this function. The aggregate
/// p-value is the Poisson-binomial tail probability, under the uniform null,
/// of at least the observed number of per-circuit accepts.
SessionReport run_verifier(const ChallengeSpec& spec,
                           const std::string& endpoint, Rng& rng,
                           Transcript* transcript = nullptr);

/// Serves challenge sessions with the configured strategy until
/// max_sessions have completed. Binds the endpoint itself.
void serve_prover(const ProverConfig& config, const std::string& endpoint,
                  Rng& rng, Transcript* transcript = nullptr);

/// Same, on an already-bound listener (lets tests bind port 0 first).
void serve_prover(const ProverConfig& config, net::TcpListener& listener,
                  Rng& rng, Transcript* transcript = nullptr);

}  // namespace rcslab
