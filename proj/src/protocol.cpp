#include "rcslab/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "rcslab/errors.hpp"
#include "rcslab/xeb.hpp"

namespace rcslab {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct Channel {
  net::TcpStream stream;
  Transcript* transcript = nullptr;

  void send(const Message& m) {
    const std::string line = encode_message(m);
    if (transcript) transcript->sent(line);
    stream.write_line(line);
  }

  /// Next message; nullopt on orderly close.
  std::optional<Message> try_receive() {
    const auto line = stream.read_line();
    if (!line) return std::nullopt;
    if (transcript) transcript->received(*line);
    return decode_message(*line);
  }

  Message receive() {
    auto m = try_receive();
    if (!m) {
      throw protocol_error(ProtocolCode::Transport,
                           "peer closed the connection mid-session");
    }
    return *m;
  }
};

void expect_kind(const Message& m, MessageKind want) {
  if (m.kind != want) {
    throw protocol_error(ProtocolCode::Malformed,
                         std::string("expected ") + std::string(to_string(want)) +
                             " message, got " + std::string(to_string(m.kind)));
  }
}

/// Pr[at least `observed` accepts under the uniform null] for independent
/// per-circuit null accept probabilities (Poisson-binomial upper tail).
double aggregate_p_value(const std::vector<double>& null_accept_probs,
                         int observed) {
  std::vector<double> dist{1.0};  // dist[j] = Pr[j accepts so far]
  for (double alpha : null_accept_probs) {
    std::vector<double> next(dist.size() + 1, 0.0);
    for (std::size_t j = 0; j < dist.size(); ++j) {
      next[j] += dist[j] * (1.0 - alpha);
      next[j + 1] += dist[j] * alpha;
    }
    dist = std::move(next);
  }
  double p = 0.0;
  for (std::size_t j = static_cast<std::size_t>(std::max(observed, 0));
       j < dist.size(); ++j) {
    p += dist[j];
  }
  return std::min(p, 1.0);
}

}  // namespace

void Transcript::sent(std::string_view line) {
  text.append(">> ");
  text.append(line);
  text.push_back('\n');
}

void Transcript::received(std::string_view line) {
  text.append("<< ");
  text.append(line);
  text.push_back('\n');
}

std::string_view to_string(MessageKind k) {
  switch (k) {
    case MessageKind::Hello: return "hello";
    case MessageKind::Challenge: return "challenge";
    case MessageKind::Response: return "response";
    case MessageKind::Verdict: return "verdict";
    case MessageKind::Error: return "error";
  }
  return "error";
}

std::string_view to_string(ProverStrategy s) {
  switch (s) {
    case ProverStrategy::HonestSimulator: return "honest-simulator";
    case ProverStrategy::SpooferBipartition: return "spoofer-bipartition";
    case ProverStrategy::UniformRandom: return "uniform-random";
  }
  return "honest-simulator";
}

ProverStrategy prover_strategy_from_string(std::string_view s) {
  if (s == "honest-simulator" || s == "honest") {
    return ProverStrategy::HonestSimulator;
  }
  if (s == "spoofer-bipartition" || s == "spoof") {
    return ProverStrategy::SpooferBipartition;
  }
  if (s == "uniform-random" || s == "uniform") {
    return ProverStrategy::UniformRandom;
  }
  throw std::invalid_argument("unknown prover strategy: " + std::string(s));
}

std::string encode_message(const Message& m) {
  ordered_json doc;
  doc["v"] = m.version;
  doc["kind"] = to_string(m.kind);
  doc["session"] = m.session;
  doc["payload"] = m.payload;
  return doc.dump();
}

Message decode_message(std::string_view line) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(line);
  } catch (const ordered_json::parse_error& e) {
    throw protocol_error(ProtocolCode::Malformed,
                         std::string("unparseable message: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("v") || !doc.contains("kind") ||
      !doc.contains("session") || !doc.contains("payload")) {
    throw protocol_error(ProtocolCode::Malformed,
                         "message is missing required fields");
  }
  Message m;
  if (!doc["v"].is_number_integer()) {
    throw protocol_error(ProtocolCode::Malformed, "version must be an integer");
  }
  m.version = doc["v"].get<int>();
  if (m.version != kProtocolVersion) {
    throw protocol_error(ProtocolCode::VersionMismatch,
                         "unsupported protocol version " +
                             std::to_string(m.version));
  }
  const std::string kind = doc["kind"].get<std::string>();
  if (kind == "hello") {
    m.kind = MessageKind::Hello;
  } else if (kind == "challenge") {
    m.kind = MessageKind::Challenge;
  } else if (kind == "response") {
    m.kind = MessageKind::Response;
  } else if (kind == "verdict") {
    m.kind = MessageKind::Verdict;
  } else if (kind == "error") {
    m.kind = MessageKind::Error;
  } else {
    throw protocol_error(ProtocolCode::Malformed, "unknown message kind: " + kind);
  }
  if (!doc["session"].is_string()) {
    throw protocol_error(ProtocolCode::Malformed, "session must be a string");
  }
  m.session = doc["session"].get<std::string>();
  m.payload = doc["payload"];
  return m;
}

SessionReport run_verifier(const ChallengeSpec& spec,
                           const std::string& endpoint, Rng& rng,
                           Transcript* transcript) {
  if (spec.n < 2 || spec.n_circuits < 1 || spec.samples_per_circuit < 1) {
    throw std::invalid_argument("challenge spec needs n >= 2 and positive counts");
  }
  const auto [host, port] = net::parse_endpoint(endpoint);
  Channel channel{net::connect(host, port, spec.timeout_seconds), transcript};

  const std::string session = hex64(rng.next_u64());
  channel.send({kProtocolVersion, MessageKind::Hello, session,
                ordered_json{{"role", "verifier"}}});
  expect_kind(channel.receive(), MessageKind::Hello);

  const std::uint64_t mask =
      spec.n == 64 ? ~0ULL : (1ULL << spec.n) - 1;
  const std::uint64_t base = rng.next_u64();

  SessionReport report;
  std::vector<double> null_accept_probs;
  int accepted_count = 0;
  for (int i = 0; i < spec.n_circuits; ++i) {
    Rng circuit_rng(mix_seed(base, static_cast<std::uint64_t>(i)));
    std::uint64_t secret = 0;
    while (secret == 0) secret = circuit_rng.next_u64() & mask;
    PlantedCircuit planted =
        plant_secret_iqp(spec.n, secret, spec.plant, circuit_rng);
    if (spec.threshold_override) {
      planted.key.threshold = *spec.threshold_override;
    }
    const int k = static_cast<int>(std::max<std::int64_t>(
        spec.samples_per_circuit, planted.key.min_samples));

    ordered_json payload;
    payload["index"] = i;
    payload["count"] = spec.n_circuits;
    payload["samples"] = k;
    payload["circuit"] = ordered_json::parse(serialize(planted.circuit));
    channel.send({kProtocolVersion, MessageKind::Challenge, session,
                  std::move(payload)});

    const Message resp = channel.receive();
    if (resp.kind == MessageKind::Error) {
      throw protocol_error(ProtocolCode::RemoteError,
                           "prover reported: " + resp.payload.dump());
    }
    expect_kind(resp, MessageKind::Response);
    if (!resp.payload.contains("index") || !resp.payload.contains("samples") ||
        !resp.payload["samples"].is_array() ||
        resp.payload["index"].get<int>() != i) {
      channel.send({kProtocolVersion, MessageKind::Error, session,
                    ordered_json{{"code", "malformed-response"}}});
      throw protocol_error(ProtocolCode::Malformed,
                           "response payload is malformed");
    }

    SampleSet samples;
    samples.circuit_id = planted.circuit.id();
    samples.n_qubits = spec.n;
    for (const auto& js : resp.payload["samples"]) {
      if (!js.is_string() ||
          static_cast<int>(js.get<std::string>().size()) != spec.n) {
        channel.send({kProtocolVersion, MessageKind::Error, session,
                      ordered_json{{"code", "bad-sample-width"}}});
        throw protocol_error(ProtocolCode::Malformed,
                             "prover sent samples of the wrong bit width");
      }
      try {
        samples.outcomes.push_back(parse_bits(js.get<std::string>()));
      } catch (const std::invalid_argument&) {
        channel.send({kProtocolVersion, MessageKind::Error, session,
                      ordered_json{{"code", "bad-sample-characters"}}});
        throw protocol_error(ProtocolCode::Malformed,
                             "prover sent non-binary sample strings");
      }
    }
    if (static_cast<int>(samples.outcomes.size()) < k) {
      channel.send({kProtocolVersion, MessageKind::Error, session,
                    ordered_json{{"code", "too-few-samples"}}});
      throw protocol_error(ProtocolCode::Malformed,
                           "prover sent fewer samples than requested");
    }

    const Verdict v = verify_planted(samples, planted.key);
    report.per_circuit.push_back(v);
    if (v.accepted) ++accepted_count;
    const auto k_actual = static_cast<std::int64_t>(samples.outcomes.size());
    null_accept_probs.push_back(binomial_tail_half(
        k_actual, static_cast<std::int64_t>(
                      std::ceil(planted.key.threshold *
                                static_cast<double>(k_actual)))));
  }

  Verdict aggregate;
  aggregate.statistic =
      static_cast<double>(accepted_count) / static_cast<double>(spec.n_circuits);
  aggregate.threshold = spec.accept_fraction;
  aggregate.accepted = aggregate.statistic >= aggregate.threshold;
  aggregate.p_value = aggregate_p_value(null_accept_probs, accepted_count);
  report.aggregate = aggregate;

  channel.send({kProtocolVersion, MessageKind::Verdict, session,
                ordered_json{{"accepted", aggregate.accepted},
                             {"statistic", aggregate.statistic},
                             {"threshold", aggregate.threshold},
                             {"p_value", aggregate.p_value},
                             {"accepted_circuits", accepted_count},
                             {"total", spec.n_circuits}}});
  return report;
}

namespace {

std::vector<std::string> make_samples(const ProverConfig& config,
                                      const Circuit& circuit, int k, Rng& rng) {
  const int n = circuit.n_qubits;
  std::vector<std::string> lines;
  lines.reserve(static_cast<std::size_t>(k));
  const auto emit = [&](std::uint64_t word) {
    lines.push_back(format_bits(word, n));
  };

  switch (config.strategy) {
    case ProverStrategy::UniformRandom: {
      const std::uint64_t mask = n == 64 ? ~0ULL : (1ULL << n) - 1;
      for (int i = 0; i < k; ++i) emit(rng.next_u64() & mask);
      break;
    }
    case ProverStrategy::SpooferBipartition: {
      std::vector<int> block_a;
      for (int q = 0; q < (n + 1) / 2; ++q) block_a.push_back(q);
      const SampleSet s = spoof_samples(circuit, block_a, k, rng);
      for (std::uint64_t w : s.outcomes) {
        emit(apply_measurement_flips(w, n, config.noise, rng));
      }
      break;
    }
    case ProverStrategy::HonestSimulator: {
      if (config.noise.epsilon <= 0.0) {
        const Statevector psi = simulate(circuit);
        const SampleSet s = sample(psi, k, rng);
        for (std::uint64_t w : s.outcomes) {
          emit(apply_measurement_flips(w, n, config.noise, rng));
        }
        break;
      }
      // Spread the requested samples over a budgeted number of fresh
      // trajectory preparations.
      const int budget = std::max(1, std::min(config.traj_budget, k));
      int produced = 0;
      for (int t = 0; t < budget; ++t) {
        const int share = (k - produced) / (budget - t);
        if (share == 0) continue;
        Rng traj_rng = rng.stream(static_cast<std::uint64_t>(t));
        const Statevector psi =
            noisy_trajectory(circuit, config.noise, traj_rng);
        const SampleSet s = sample(psi, share, traj_rng);
        for (std::uint64_t w : s.outcomes) {
          emit(apply_measurement_flips(w, n, config.noise, traj_rng));
        }
        produced += share;
      }
      break;
    }
  }
  return lines;
}

/// Handles one accepted session; returns when the peer closes or the
/// verdict arrives.
void handle_session(Channel& channel, const ProverConfig& config, Rng rng) {
  const auto hello = channel.try_receive();
  if (!hello) return;
  expect_kind(*hello, MessageKind::Hello);
  const std::string session = hello->session;
  channel.send({kProtocolVersion, MessageKind::Hello, session,
                ordered_json{{"role", "prover"},
                             {"strategy", to_string(config.strategy)}}});

  std::uint64_t challenge_index = 0;
  while (true) {
    const auto msg = channel.try_receive();
    if (!msg) return;
    if (msg->kind == MessageKind::Verdict || msg->kind == MessageKind::Error) {
      return;
    }
    if (msg->kind != MessageKind::Challenge) {
      channel.send({kProtocolVersion, MessageKind::Error, session,
                    ordered_json{{"code", "unexpected-message"}}});
      return;
    }
    try {
      if (!msg->payload.contains("circuit") || !msg->payload.contains("samples")) {
        throw parse_error("challenge payload is missing fields");
      }
      const Circuit circuit =
          parse_circuit(msg->payload["circuit"].dump());
      const int k = msg->payload["samples"].get<int>();
      if (k < 1) throw parse_error("challenge sample count must be positive");
      Rng challenge_rng = rng.stream(challenge_index++);
      ordered_json payload;
      payload["index"] = msg->payload.value("index", 0);
      payload["samples"] = make_samples(config, circuit, k, challenge_rng);
      channel.send({kProtocolVersion, MessageKind::Response, session,
                    std::move(payload)});
    } catch (const resource_limit_error& e) {
      channel.send({kProtocolVersion, MessageKind::Error, session,
                    ordered_json{{"code", "resource-limit"},
                                 {"detail", e.what()}}});
    } catch (const parse_error& e) {
      channel.send({kProtocolVersion, MessageKind::Error, session,
                    ordered_json{{"code", "bad-circuit"},
                                 {"detail", e.what()}}});
    }
  }
}

}  // namespace

void serve_prover(const ProverConfig& config, net::TcpListener& listener,
                  Rng& rng, Transcript* transcript) {
  config.noise.validate();
  int sessions = 0;
  while (config.max_sessions == 0 || sessions < config.max_sessions) {
    Channel channel{listener.accept(), transcript};
    channel.stream.set_receive_timeout(config.timeout_seconds);
    ++sessions;
    try {
      handle_session(channel, config,
                     rng.stream(static_cast<std::uint64_t>(sessions)));
    } catch (const protocol_error&) {
      // Session aborted; keep serving the remaining sessions.
    }
  }
}

void serve_prover(const ProverConfig& config, const std::string& endpoint,
                  Rng& rng, Transcript* transcript) {
  const auto [host, port] = net::parse_endpoint(endpoint);
  net::TcpListener listener = net::TcpListener::bind(host, port);
  serve_prover(config, listener, rng, transcript);
}

}  // namespace rcslab
