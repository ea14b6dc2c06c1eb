#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracle.hpp"
#include "rcslab/errors.hpp"
#include "rcslab/xeb.hpp"

using namespace rcslab;

namespace {

constexpr double kTheta = 1.5707963267948966;
constexpr double kPhi = 0.5235987755982988;

SampleSet uniform_samples(int n, int k, Rng& rng) {
  SampleSet s;
  s.n_qubits = n;
  const std::uint64_t mask = (1ULL << n) - 1;
  for (int i = 0; i < k; ++i) s.outcomes.push_back(rng.next_u64() & mask);
  return s;
}

}  // namespace

TEST_CASE("xeb estimator") {
  SUBCASE("uniform samples score zero within 3 sigma") {
    Rng rng(101);
    for (int n : {4, 8, 10}) {
      const Circuit c = build_grid_rcs(2, n / 2, 5, kTheta, kPhi, rng.next_u64());
      SampleSet s = uniform_samples(n, 20000, rng);
      const XebResult r = estimate_xeb(s, c);
      CAPTURE(n);
      CHECK(std::abs(r.chi) <= 3.0 * r.std_error);
    }
  }

  SUBCASE("ideal samples from an anticoncentrated circuit score about one") {
    const Circuit c = build_grid_rcs(2, 5, 7, kTheta, kPhi, 2025);
    // Anticoncentration onset: collision probability within 10% of 2/2^n.
    const Statevector psi = simulate(c);
    CHECK(std::abs(collision_probability(psi) * 1024.0 / 2.0 - 1.0) < 0.10);
    Rng rng(4);
    SampleSet s = sample(psi, 50000, rng);
    const XebResult r = estimate_xeb(s, c);
    CHECK(std::abs(r.chi - 1.0) < 0.05);
  }

  SUBCASE("deterministic circuit under the adopted normalization") {
    // All samples hit the single support string of the identity: each term
    // is 2^n * 1 - 1 = 1 at n=1.
    Circuit c{1, {}, EnsembleTag::Custom, 0};
    SampleSet s;
    s.n_qubits = 1;
    s.outcomes = {0, 0, 0, 0};
    const XebResult r = estimate_xeb(s, c);
    CHECK(r.chi == doctest::Approx(1.0));
    CHECK(r.std_error == doctest::Approx(0.0));
  }

  SUBCASE("estimator is unbiased against the closed form") {
    // On ideal samples E[chi] = 2^n sum p^2 - 1, computable exactly.
    const Circuit c = build_grid_rcs(2, 4, 4, kTheta, kPhi, 99);
    const Statevector psi = simulate(c);
    const double closed_form = 256.0 * collision_probability(psi) - 1.0;
    Rng rng(5);
    const SampleSet s = sample(psi, 40000, rng);
    const XebResult r = estimate_xeb(s, c);
    CHECK(std::abs(r.chi - closed_form) <= 3.0 * r.std_error);
  }

  SUBCASE("width mismatch is rejected") {
    Circuit c{2, {}, EnsembleTag::Custom, 0};
    SampleSet s;
    s.n_qubits = 3;
    s.outcomes = {0};
    CHECK_THROWS_AS(estimate_xeb(s, c), std::invalid_argument);
  }
}

TEST_CASE("decay rate fitting") {
  SUBCASE("exact synthetic curve") {
    DecayCurve curve;
    for (int d : {2, 4, 6, 8}) {
      curve.points.push_back({d, std::exp(-0.3 * d), 0.0});
    }
    CHECK(fit_decay_rate(curve) == doctest::Approx(0.3).epsilon(1e-12));
  }

  SUBCASE("constant curve has rate zero") {
    DecayCurve curve;
    for (int d : {1, 2, 3}) curve.points.push_back({d, 0.5, 0.0});
    CHECK(fit_decay_rate(curve) == doctest::Approx(0.0));
  }

  SUBCASE("two points are not enough") {
    DecayCurve curve;
    curve.points = {{1, 0.5, 0.0}, {2, 0.25, 0.0}};
    CHECK_THROWS_AS(fit_decay_rate(curve), degenerate_fit_error);
  }

  SUBCASE("non-positive means are degenerate") {
    DecayCurve curve;
    curve.points = {{1, 0.5, 0.0}, {2, 0.0, 0.0}, {3, -0.1, 0.0}};
    CHECK_THROWS_AS(fit_decay_rate(curve), degenerate_fit_error);
  }
}

TEST_CASE("phase classification thresholds") {
  const PhasePoint exact = classify_phase_point(10, 0.01, 0.1);
  CHECK(exact.phase == NoisePhase::Weak);
  CHECK(exact.predicted_weak_rate == doctest::Approx(0.1));

  const PhasePoint strong = classify_phase_point(10, 0.3, 0.3);
  CHECK(strong.phase == NoisePhase::Strong);

  const PhasePoint boundary = classify_phase_point(10, 0.1, 0.65);
  CHECK(boundary.phase == NoisePhase::Boundary);
}

TEST_CASE("decay sweep on a small grid") {
  // Depths start past the anticoncentration onset; below it the ideal XEB
  // sits away from 1 and the proxy relation does not apply. The no-repeat
  // rule tames the gate-set structure that otherwise makes the ideal XEB
  // oscillate with depth on near-1D grids.
  EnsembleSpec ensemble;
  ensemble.no_repeat = true;
  Rng rng(606);
  const int depth_steps[] = {4, 5, 6, 7};
  const SweepResult sweep =
      xeb_decay_sweep(ensemble, 6, 0.01, depth_steps, 3, 300, rng);
  REQUIRE(sweep.xeb.points.size() == 4);
  REQUIRE(sweep.fidelity.points.size() == 4);
  // Depth coordinates are layer counts: two per builder step.
  CHECK(sweep.xeb.points[0].depth == 8);
  CHECK(sweep.xeb.points[3].depth == 14);

  SUBCASE("zero noise keeps both curves flat") {
    Rng r2(607);
    const SweepResult flat =
        xeb_decay_sweep(ensemble, 6, 0.0, depth_steps, 3, 8, r2);
    for (const DecayPoint& p : flat.fidelity.points) {
      CHECK(p.mean == doctest::Approx(1.0).epsilon(1e-9));
    }
    for (const DecayPoint& p : flat.xeb.points) {
      // The noiseless per-trajectory XEB equals the circuit's own collision
      // number, near 1 once anticoncentrated (n=6 still wobbles by ~30%).
      CHECK(p.mean > 0.6);
      CHECK(p.mean < 1.5);
    }
  }

  SUBCASE("weak-noise proxy: xeb tracks fidelity pointwise") {
    for (std::size_t i = 0; i < sweep.xeb.points.size(); ++i) {
      const DecayPoint& x = sweep.xeb.points[i];
      const DecayPoint& f = sweep.fidelity.points[i];
      const double sigma =
          std::sqrt(x.std_error * x.std_error + f.std_error * f.std_error);
      // Finite-size slack: the ideal XEB of an n=6 circuit deviates from 1
      // by O(2^{-n/2}) even past onset.
      CHECK(std::abs(x.mean - f.mean) <= 3.0 * sigma + 0.15 * f.mean);
    }
  }

  SUBCASE("csv output matches the pinned schema") {
    std::ostringstream out;
    const DecayCurve curves[] = {sweep.xeb, sweep.fidelity};
    write_sweep_csv(out, curves);
    const std::string text = out.str();
    CHECK(text.rfind("n,eps,depth,quantity,mean,stderr,n_circuits,n_traj,seed\n",
                     0) == 0);
    CHECK(text.find(",xeb,") != std::string::npos);
    CHECK(text.find(",fidelity,") != std::string::npos);
    CHECK(text.find("6,0.02") != std::string::npos);
  }
}

TEST_CASE("spoofer") {
  SUBCASE("no crossing gates means a perfect spoof") {
    // Two disconnected halves: the product state equals the ideal state.
    Circuit c{4, {}, EnsembleTag::Custom, 0};
    Layer l1 = {Gate::h(0), Gate::h(2)};
    Layer l2 = {Gate::cnot(0, 1), Gate::cnot(2, 3)};
    c.layers = {l1, l2};
    const Statevector spoofed = spoof_product_state(c, {0, 1});
    const Statevector ideal = simulate(c);
    CHECK(std::norm(inner_product(ideal, spoofed)) == doctest::Approx(1.0));

    Rng rng(8);
    const SampleSet s = spoof_samples(c, {0, 1}, 30000, rng);
    const XebResult r = estimate_xeb(s, c);
    // Two Bell pairs: 4 support strings at p = 1/4; on-support samples give
    // chi = 16/4 - 1 = 3 with zero variance.
    CHECK(r.chi == doctest::Approx(3.0).epsilon(1e-9));
  }

  SUBCASE("diagonal phases crossing the cut are split, not severed") {
    const PhaseGate gates[] = {{0.9, mask_from_string("1111")}};
    const Circuit c = build_iqp(4, gates);
    const Statevector spoofed = spoof_product_state(c, {0, 1});
    const PhaseGate half[] = {{0.9, mask_from_string("11")}};
    const Circuit half_c = build_iqp(2, half);
    const Statevector half_psi = simulate(half_c);
    const Statevector expected = tensor_product(half_psi, half_psi);
    CHECK(std::abs(std::norm(inner_product(expected, spoofed)) - 1.0) < 1e-10);
  }

  SUBCASE("bipartition spoof keeps a sizable xeb with tiny fidelity") {
    const Circuit c = build_grid_rcs(3, 4, 4, kTheta, kPhi, 40);
    const std::vector<int> left = {0, 1, 4, 5, 8, 9};
    const Statevector spoofed = spoof_product_state(c, left);
    const Statevector ideal = simulate(c);
    const double fid = std::norm(inner_product(ideal, spoofed));
    const double chi = xeb_of_state(spoofed, probabilities(ideal));
    CHECK(chi > 0.05);
    CHECK(chi > 10.0 * fid);
  }

  SUBCASE("sampled spoof agrees with the exact product-state xeb") {
    const Circuit c = build_grid_rcs(2, 4, 3, kTheta, kPhi, 71);
    const std::vector<int> left = {0, 1, 4, 5};
    const double exact =
        xeb_of_state(spoof_product_state(c, left), probabilities(simulate(c)));
    Rng rng(72);
    const SampleSet s = spoof_samples(c, left, 40000, rng);
    const XebResult r = estimate_xeb(s, c);
    CHECK(std::abs(r.chi - exact) <= 4.0 * r.std_error);
  }

  SUBCASE("trivial bipartitions are rejected") {
    Circuit c{3, {}, EnsembleTag::Custom, 0};
    Rng rng(1);
    CHECK_THROWS_AS(spoof_samples(c, {}, 10, rng), std::invalid_argument);
    CHECK_THROWS_AS(spoof_samples(c, {0, 1, 2}, 10, rng), std::invalid_argument);
    CHECK_THROWS_AS(spoof_samples(c, {0, 0}, 10, rng), std::invalid_argument);
  }
}

TEST_CASE("fidelity extrapolation") {
  SUBCASE("closed under the exponential model") {
    std::vector<std::pair<double, Estimate>> points;
    for (double x : {40.0, 60.0, 80.0, 100.0}) {
      points.push_back({x, {std::exp(-0.01 * x), 0.0, 1}});
    }
    const Estimate pred = extrapolate_fidelity(points, 140.0);
    CHECK(std::abs(pred.value - std::exp(-1.4)) < 1e-12);
    CHECK(pred.std_error < 1e-12);
  }

  SUBCASE("weighted fit propagates uncertainty") {
    std::vector<std::pair<double, Estimate>> points;
    for (double x : {40.0, 60.0, 80.0}) {
      points.push_back({x, {std::exp(-0.01 * x), 0.01, 100}});
    }
    const Estimate pred = extrapolate_fidelity(points, 120.0);
    CHECK(pred.std_error > 0.0);
    CHECK(std::abs(pred.value - std::exp(-1.2)) < 3.0 * pred.std_error + 1e-9);
  }

  SUBCASE("too few points") {
    std::vector<std::pair<double, Estimate>> one = {{10.0, {0.5, 0.0, 1}}};
    CHECK_THROWS_AS(extrapolate_fidelity(one, 20.0), std::invalid_argument);
  }

  SUBCASE("degenerate abscissa") {
    std::vector<std::pair<double, Estimate>> flat = {
        {10.0, {0.5, 0.0, 1}}, {10.0, {0.5, 0.0, 1}}, {10.0, {0.5, 0.0, 1}}};
    CHECK_THROWS_AS(extrapolate_fidelity(flat, 20.0), degenerate_fit_error);
  }

  SUBCASE("non-positive values") {
    std::vector<std::pair<double, Estimate>> bad = {
        {10.0, {0.5, 0.0, 1}}, {20.0, {0.0, 0.0, 1}}, {30.0, {0.1, 0.0, 1}}};
    CHECK_THROWS_AS(extrapolate_fidelity(bad, 40.0), std::invalid_argument);
  }
}
