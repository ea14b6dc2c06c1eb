#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "oracle.hpp"
#include "rcslab/errors.hpp"
#include "rcslab/simulator.hpp"

using namespace rcslab;

TEST_CASE("trivial statevector results") {
  SUBCASE("empty circuit on two qubits") {
    Circuit c{2, {}, EnsembleTag::Custom, 0};
    const Statevector psi = simulate(c);
    CHECK(psi.amplitudes()[0] == cplx{1.0, 0.0});
    for (std::size_t i = 1; i < 4; ++i) CHECK(psi.amplitudes()[i] == cplx{});
  }

  SUBCASE("single hadamard") {
    Circuit c{1, {{Gate::h(0)}}, EnsembleTag::Custom, 0};
    const Statevector psi = simulate(c);
    CHECK(psi.amplitudes()[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(psi.amplitudes()[1].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
  }

  SUBCASE("width above the cap is refused") {
    Circuit c{max_qubits() + 1, {}, EnsembleTag::Custom, 0};
    CHECK_THROWS_AS(simulate(c), resource_limit_error);
  }
}

TEST_CASE("simulation matches the dense matrix-product oracle") {
  Rng rng(424242);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(6));
    const Circuit c = oracle::random_test_circuit(n, 5, rng);
    const Statevector psi = simulate(c);
    const auto expected = oracle::dense_simulate(c);
    CAPTURE(trial);
    for (std::size_t i = 0; i < expected.size(); ++i) {
      REQUIRE(std::abs(psi.amplitudes()[i] - expected[i]) < 1e-9);
    }
  }
}

TEST_CASE("iqp circuit amplitudes match the oracle at n=4") {
  const PhaseGate gates[] = {{0.7853981633974483, mask_from_string("1011")},
                             {0.6283185307179586, mask_from_string("1100")},
                             {1.0471975511965976, mask_from_string("1111")}};
  const Circuit c = build_iqp(4, gates);
  const Statevector psi = simulate(c);
  const auto expected = oracle::dense_simulate(c);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(std::abs(psi.amplitudes()[i] - expected[i]) < 1e-9);
  }
}

TEST_CASE("probability") {
  SUBCASE("identity circuit concentrates on the all-zeros string") {
    Circuit c{3, {}, EnsembleTag::Custom, 0};
    CHECK(probability(c, "000") == doctest::Approx(1.0));
    CHECK(probability(c, "010") == doctest::Approx(0.0));
  }

  SUBCASE("single-qubit iqp gives cos^2(theta/2)") {
    for (double theta : {0.3, 1.1, 2.5}) {
      const PhaseGate gates[] = {{theta, 1ULL}};
      const Circuit c = build_iqp(1, gates);
      const double expected = std::cos(theta / 2.0) * std::cos(theta / 2.0);
      CHECK(probability(c, "0") == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  SUBCASE("hadamard walls cancel on one qubit") {
    const Circuit c = build_iqp(1, {});
    CHECK(probability(c, "0") == doctest::Approx(1.0));
  }

  SUBCASE("wrong width is rejected") {
    Circuit c{2, {}, EnsembleTag::Custom, 0};
    CHECK_THROWS_AS(probability(c, "0"), std::invalid_argument);
  }

  SUBCASE("probabilities sum to one on random circuits") {
    Rng rng(99);
    for (int n : {4, 8, 12}) {
      const Circuit c = build_grid_rcs(2, n / 2, 4, 1.5707963267948966,
                                       0.5235987755982988, rng.next_u64());
      const auto probs = probabilities(simulate(c));
      double total = 0.0;
      for (double p : probs) total += p;
      CHECK(std::abs(total - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("sampling") {
  SUBCASE("deterministic state gives constant samples") {
    Circuit c{2, {{Gate::pauli_x(1)}}, EnsembleTag::Custom, 0};
    const Statevector psi = simulate(c);
    Rng rng(1);
    const SampleSet s = sample(psi, 5, rng);
    REQUIRE(s.outcomes.size() == 5);
    for (std::uint64_t o : s.outcomes) CHECK(o == 0b10);
    CHECK(format_bits(s.outcomes[0], 2) == "01");
  }

  SUBCASE("uniform single qubit matches binomial statistics") {
    Circuit c{1, {{Gate::h(0)}}, EnsembleTag::Custom, 0};
    const Statevector psi = simulate(c);
    Rng rng(77);
    const int k = 100000;
    const SampleSet s = sample(psi, k, rng);
    int zeros = 0;
    for (std::uint64_t o : s.outcomes) zeros += o == 0 ? 1 : 0;
    const double freq = static_cast<double>(zeros) / k;
    CHECK(std::abs(freq - 0.5) < 0.005);  // 3 sigma ~ 0.0047
  }

  SUBCASE("fixed seed reproduces the sample set") {
    Circuit c{1, {{Gate::h(0)}}, EnsembleTag::Custom, 0};
    const Statevector psi = simulate(c);
    Rng a(5), b(5);
    CHECK(sample(psi, 100, a).outcomes == sample(psi, 100, b).outcomes);
  }
}

TEST_CASE("sample file round trip") {
  SampleSet s;
  s.circuit_id = "deadbeef01234567";
  s.n_qubits = 3;
  s.outcomes = {0b000, 0b101, 0b011};
  s.seed = 42;
  s.eps = 0.01;
  s.n_traj = 7;
  std::stringstream buf;
  save_samples(buf, s);
  const std::string text = buf.str();
  CHECK(text.find("# circuit=deadbeef01234567 n=3 seed=42 eps=0.01 traj=7") == 0);
  CHECK(text.find("101\n") != std::string::npos);  // 0b101 -> qubit 0 leftmost
  const SampleSet back = load_samples(buf);
  CHECK(back.circuit_id == s.circuit_id);
  CHECK(back.n_qubits == s.n_qubits);
  CHECK(back.outcomes == s.outcomes);
  CHECK(back.eps == doctest::Approx(s.eps));

  std::stringstream bad("no header\n");
  CHECK_THROWS_AS(load_samples(bad), parse_error);
}

TEST_CASE("noisy trajectories") {
  SUBCASE("zero noise reproduces the ideal state") {
    Rng crng(12);
    const Circuit c = oracle::random_test_circuit(4, 4, crng);
    Rng rng(3);
    const Statevector noisy = noisy_trajectory(c, NoiseModel{}, rng);
    const Statevector ideal = simulate(c);
    CHECK(std::abs(std::norm(inner_product(ideal, noisy)) - 1.0) < 1e-10);
  }

  SUBCASE("eps=1 on an identity layer flips to a uniformly random pauli") {
    // One empty layer, one qubit: the state becomes P|0> for P in {X,Y,Z};
    // averaging projectors gives <Z> = -1/3 exactly.
    Circuit c{1, {Layer{}}, EnsembleTag::Custom, 0};
    const NoiseModel noise{1.0};
    Rng rng(8);
    const int k = 30000;
    double z_acc = 0.0;
    for (int t = 0; t < k; ++t) {
      Rng traj = rng.stream(static_cast<std::uint64_t>(t));
      const Statevector psi = noisy_trajectory(c, noise, traj);
      const double p0 = psi.probability_of(0);
      z_acc += 2.0 * p0 - 1.0;
    }
    // Var of <Z> per trajectory is (1 + 1 + 1)/3 - 1/9 ~ 0.89; 3 sigma below.
    CHECK(std::abs(z_acc / k - (-1.0 / 3.0)) < 3.0 * std::sqrt(0.89 / k));
  }

  SUBCASE("trajectory-averaged density matrix matches the exact channel") {
    Rng crng(2024);
    const Circuit c = oracle::random_test_circuit(2, 2, crng);
    const double eps = 0.15;
    const auto rho_exact = oracle::evolve_density_depolarizing(c, eps);
    const int k = 10000;
    std::vector<cplx> rho_mc(16, 0.0);
    std::vector<double> var_acc(32, 0.0);
    Rng rng(55);
    for (int t = 0; t < k; ++t) {
      Rng traj = rng.stream(static_cast<std::uint64_t>(t));
      const Statevector psi = noisy_trajectory(c, NoiseModel{eps}, traj);
      const auto amps = psi.amplitudes();
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          const cplx term = amps[i] * std::conj(amps[j]);
          rho_mc[i * 4 + j] += term;
          var_acc[2 * (i * 4 + j)] += term.real() * term.real();
          var_acc[2 * (i * 4 + j) + 1] += term.imag() * term.imag();
        }
      }
    }
    for (int e = 0; e < 16; ++e) {
      const cplx mean = rho_mc[e] / static_cast<double>(k);
      const double var_re =
          var_acc[2 * e] / k - mean.real() * mean.real();
      const double var_im =
          var_acc[2 * e + 1] / k - mean.imag() * mean.imag();
      const double sigma_re = std::sqrt(std::max(var_re, 1e-12) / k);
      const double sigma_im = std::sqrt(std::max(var_im, 1e-12) / k);
      CAPTURE(e);
      CHECK(std::abs(mean.real() - rho_exact[e].real()) < 4.0 * sigma_re);
      CHECK(std::abs(mean.imag() - rho_exact[e].imag()) < 4.0 * sigma_im);
    }
  }
}

TEST_CASE("fidelity estimation") {
  SUBCASE("zero noise gives exactly one") {
    Rng crng(5);
    const Circuit c = oracle::random_test_circuit(4, 4, crng);
    Rng rng(6);
    const Estimate f = estimate_fidelity(c, NoiseModel{}, 8, rng);
    CHECK(f.value == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(f.std_error == doctest::Approx(0.0).epsilon(1e-10));
  }

  SUBCASE("weak noise follows exp(-eps n layers)") {
    // 10 qubits, builder depth 5 -> 10 layers; eps n d = 0.01*10*10 = 1.
    const Circuit c = build_grid_rcs(2, 5, 5, 1.5707963267948966,
                                     0.5235987755982988, 31);
    Rng rng(32);
    const Estimate f = estimate_fidelity(c, NoiseModel{0.01}, 2000, rng);
    const double expected = std::exp(-0.01 * 10 * 10);
    CHECK(std::abs(f.value - expected) / expected < 0.15);
  }

  SUBCASE("strong noise approaches the trivial 2^-n floor") {
    const Circuit c = build_grid_rcs(2, 4, 6, 1.5707963267948966,
                                     0.5235987755982988, 77);
    Rng rng(78);
    const Estimate f = estimate_fidelity(c, NoiseModel{0.5}, 4000, rng);
    CHECK(std::abs(f.value - 1.0 / 256.0) < 4.0 * f.std_error + 1e-4);
  }

  SUBCASE("trajectory count precondition") {
    Circuit c{1, {}, EnsembleTag::Custom, 0};
    Rng rng(1);
    CHECK_THROWS_AS(estimate_fidelity(c, NoiseModel{}, 1, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("fidelity is non-increasing in depth at fixed noise") {
  Rng rng(909);
  double previous = 2.0;
  for (int depth : {2, 4, 6, 8}) {
    const Circuit c = build_grid_rcs(2, 4, depth, 1.5707963267948966,
                                     0.5235987755982988, 17);
    Rng r = rng.stream(static_cast<std::uint64_t>(depth));
    const Estimate f = estimate_fidelity(c, NoiseModel{0.02}, 600, r);
    CHECK(f.value <= previous + 3.0 * f.std_error);
    previous = f.value;
  }
}

TEST_CASE("loschmidt echo") {
  SUBCASE("no noise returns with certainty") {
    Rng crng(14);
    const Circuit c = oracle::random_test_circuit(4, 5, crng);
    Rng rng(15);
    const Estimate e = loschmidt_echo(c, NoiseModel{}, 4, rng);
    CHECK(e.value == doctest::Approx(1.0).epsilon(1e-10));
  }

  SUBCASE("empty circuit has no noise locations") {
    Circuit c{3, {}, EnsembleTag::Custom, 0};
    Rng rng(16);
    const Estimate e = loschmidt_echo(c, NoiseModel{0.9}, 4, rng);
    CHECK(e.value == doctest::Approx(1.0));
  }

  SUBCASE("echo decays like exp(-2 eps n layers)") {
    // Builder depth 5 -> 10 layers forward, 10 backward.
    const Circuit c = build_grid_rcs(2, 5, 5, 1.5707963267948966,
                                     0.5235987755982988, 21);
    Rng rng(22);
    const Estimate e = loschmidt_echo(c, NoiseModel{0.01}, 2000, rng);
    const double expected = std::exp(-2.0 * 0.01 * 10 * 10);
    CHECK(std::abs(e.value - expected) / expected < 0.20);
  }
}

TEST_CASE("measurement flips") {
  NoiseModel noise;
  noise.include_measurement_flip = true;
  noise.flip_probability = 1.0;
  Rng rng(3);
  CHECK(apply_measurement_flips(0b0000, 4, noise, rng) == 0b1111);
  noise.flip_probability = 0.0;
  CHECK(apply_measurement_flips(0b0101, 4, noise, rng) == 0b0101);
  noise.include_measurement_flip = false;
  noise.flip_probability = 1.0;
  CHECK(apply_measurement_flips(0b0101, 4, noise, rng) == 0b0101);
}
