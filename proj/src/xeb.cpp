#include "rcslab/xeb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "rcslab/errors.hpp"

namespace rcslab {
namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  // Parameter covariance: [var(a), cov(a,b); cov(a,b), var(b)].
  double var_a = 0.0, cov_ab = 0.0, var_b = 0.0;
};

/// Weighted least squares of y on x. With sigmas empty the fit is unweighted
/// and the covariance is scaled by the residual variance.
LineFit fit_line(std::span<const double> xs, std::span<const double> ys,
                 std::span<const double> sigmas) {
  const std::size_t k = xs.size();
  double s = 0.0, sx = 0.0, sxx = 0.0, sy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double w = sigmas.empty() ? 1.0 : 1.0 / (sigmas[i] * sigmas[i]);
    s += w;
    sx += w * xs[i];
    sxx += w * xs[i] * xs[i];
    sy += w * ys[i];
    sxy += w * xs[i] * ys[i];
  }
  const double delta = s * sxx - sx * sx;
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw degenerate_fit_error("fit abscissa has no spread");
  }
  LineFit fit;
  fit.slope = (s * sxy - sx * sy) / delta;
  fit.intercept = (sxx * sy - sx * sxy) / delta;
  fit.var_a = sxx / delta;
  fit.cov_ab = -sx / delta;
  fit.var_b = s / delta;
  if (sigmas.empty()) {
    double rss = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double r = ys[i] - fit.intercept - fit.slope * xs[i];
      rss += r * r;
    }
    const double scale = k > 2 ? rss / static_cast<double>(k - 2) : 0.0;
    fit.var_a *= scale;
    fit.cov_ab *= scale;
    fit.var_b *= scale;
  }
  return fit;
}

}  // namespace

std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::Xeb: return "xeb";
    case Quantity::Fidelity: return "fidelity";
    case Quantity::Echo: return "echo";
  }
  return "xeb";
}

std::string_view to_string(NoisePhase p) {
  switch (p) {
    case NoisePhase::Weak: return "weak";
    case NoisePhase::Strong: return "strong";
    case NoisePhase::Boundary: return "boundary";
  }
  return "boundary";
}

double xeb_of_state(const Statevector& psi,
                    std::span<const double> ideal_probs) {
  if (psi.dim() != ideal_probs.size()) {
    throw std::invalid_argument("probability table width mismatch");
  }
  const double dim = static_cast<double>(psi.dim());
  return dim * kern::weighted_probability(psi.amplitudes(), ideal_probs) - 1.0;
}

XebResult estimate_xeb(const SampleSet& samples, const Circuit& c) {
  if (samples.n_qubits != c.n_qubits) {
    throw std::invalid_argument("sample width does not match circuit width");
  }
  if (samples.outcomes.empty()) {
    throw std::invalid_argument("cannot estimate XEB from zero samples");
  }
  const Statevector ideal = simulate(c);
  const double dim = static_cast<double>(ideal.dim());
  std::vector<double> per_sample;
  per_sample.reserve(samples.outcomes.size());
  for (std::uint64_t x : samples.outcomes) {
    per_sample.push_back(dim * ideal.probability_of(x) - 1.0);
  }
  const Estimate e = mean_estimate(per_sample);
  return {e.value, e.std_error, e.n_samples, c.id()};
}

std::pair<int, int> EnsembleSpec::grid_shape(int n) {
  int best = 1;
  for (int r = 1; r * r <= n; ++r) {
    if (n % r == 0) best = r;
  }
  return {best, n / best};
}

Circuit EnsembleSpec::build(int n, int depth_steps, std::uint64_t seed) const {
  switch (tag) {
    case EnsembleTag::GridRcs: {
      int r = rows, c = cols;
      if (r <= 0 || c <= 0) std::tie(r, c) = grid_shape(n);
      if (r * c != n) {
        throw std::invalid_argument("grid shape does not match sweep width");
      }
      return build_grid_rcs(r, c, depth_steps, fsim_theta, fsim_phi, seed,
                            no_repeat);
    }
    case EnsembleTag::RrGraphRcs:
      return build_rr_graph_rcs(n, degree, depth_steps, seed);
    default:
      throw std::invalid_argument(
          "decay sweeps support the grid-rcs and rr-graph-rcs ensembles");
  }
}

SweepResult xeb_decay_sweep(const EnsembleSpec& ensemble, int n, double eps,
                            std::span<const int> depth_steps, int n_circuits,
                            int n_traj, Rng& rng) {
  if (depth_steps.empty()) throw std::invalid_argument("no sweep depths given");
  if (n_circuits < 1 || n_traj < 1) {
    throw std::invalid_argument("need at least one circuit and trajectory");
  }
  const NoiseModel noise{eps};
  noise.validate();
  const std::uint64_t base = rng.next_u64();

  SweepResult result;
  for (DecayCurve* curve : {&result.xeb, &result.fidelity}) {
    curve->n = n;
    curve->eps = eps;
    curve->n_circuits = n_circuits;
    curve->n_traj = n_traj;
    curve->seed = rng.seed();
  }
  result.xeb.quantity = Quantity::Xeb;
  result.fidelity.quantity = Quantity::Fidelity;

  for (std::size_t di = 0; di < depth_steps.size(); ++di) {
    const std::uint64_t depth_seed = mix_seed(base, di);
    std::vector<Circuit> circuits;
    std::vector<Statevector> ideals;
    std::vector<std::vector<double>> ideal_probs;
    long layer_total = 0;
    for (int ci = 0; ci < n_circuits; ++ci) {
      circuits.push_back(ensemble.build(
          n, depth_steps[di], mix_seed(depth_seed, static_cast<std::uint64_t>(ci))));
      ideals.push_back(simulate(circuits.back()));
      ideal_probs.push_back(probabilities(ideals.back()));
      layer_total += circuits.back().depth();
    }

    const long total = static_cast<long>(n_circuits) * n_traj;
    std::vector<double> chis(static_cast<std::size_t>(total));
    std::vector<double> fids(static_cast<std::size_t>(total));
    const std::uint64_t traj_seed = mix_seed(depth_seed, 0x72616a);
#pragma omp parallel for schedule(dynamic)
    for (long idx = 0; idx < total; ++idx) {
      const auto ci = static_cast<std::size_t>(idx / n_traj);
      Rng traj_rng(mix_seed(traj_seed, static_cast<std::uint64_t>(idx)));
      const Statevector psi = noisy_trajectory(circuits[ci], noise, traj_rng);
      chis[static_cast<std::size_t>(idx)] = xeb_of_state(psi, ideal_probs[ci]);
      fids[static_cast<std::size_t>(idx)] =
          std::norm(inner_product(ideals[ci], psi));
    }

    const int depth = static_cast<int>(layer_total / n_circuits);
    const Estimate chi = mean_estimate(chis);
    const Estimate fid = mean_estimate(fids);
    result.xeb.points.push_back({depth, chi.value, chi.std_error});
    result.fidelity.points.push_back({depth, fid.value, fid.std_error});
  }
  return result;
}

double fit_decay_rate(const DecayCurve& curve) {
  if (curve.points.size() < 3) {
    throw degenerate_fit_error("decay fit needs at least 3 depth points");
  }
  std::vector<double> xs, ys;
  int last_depth = -1;
  for (const DecayPoint& p : curve.points) {
    if (p.depth <= last_depth) {
      throw std::invalid_argument("curve depths must be strictly increasing");
    }
    last_depth = p.depth;
    if (!(p.mean > 0.0)) {
      throw degenerate_fit_error(
          "decay fit needs positive means (value consistent with 0)");
    }
    xs.push_back(static_cast<double>(p.depth));
    ys.push_back(std::log(p.mean));
  }
  return -fit_line(xs, ys, {}).slope;
}

PhasePoint classify_phase_point(int n, double eps, double fitted_xeb_rate) {
  PhasePoint p;
  p.n = n;
  p.eps = eps;
  p.fitted_rate = fitted_xeb_rate;
  p.predicted_weak_rate = eps * static_cast<double>(n);
  if (fitted_xeb_rate >= 0.8 * p.predicted_weak_rate) {
    p.phase = NoisePhase::Weak;
  } else if (fitted_xeb_rate <= 0.5 * p.predicted_weak_rate) {
    p.phase = NoisePhase::Strong;
  } else {
    p.phase = NoisePhase::Boundary;
  }
  return p;
}

namespace {

struct BlockSplit {
  std::vector<int> a, b;  // sorted qubit lists
  Circuit block_a, block_b;
  int severed = 0;
};

std::uint64_t remap_mask(std::uint64_t mask, const std::vector<int>& qubits) {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    if ((mask >> qubits[i]) & 1ULL) out |= 1ULL << i;
  }
  return out;
}

BlockSplit split_circuit(const Circuit& c, const std::vector<int>& block_a) {
  c.validate();
  std::vector<int> a = block_a;
  std::sort(a.begin(), a.end());
  if (a.empty() || static_cast<int>(a.size()) >= c.n_qubits) {
    throw std::invalid_argument("bipartition must be a nonempty proper subset");
  }
  if (std::adjacent_find(a.begin(), a.end()) != a.end()) {
    throw std::invalid_argument("bipartition has duplicate qubits");
  }
  if (a.front() < 0 || a.back() >= c.n_qubits) {
    throw std::invalid_argument("bipartition qubit out of range");
  }

  BlockSplit split;
  split.a = std::move(a);
  std::uint64_t amask = 0;
  for (int q : split.a) amask |= 1ULL << q;
  for (int q = 0; q < c.n_qubits; ++q) {
    if (!((amask >> q) & 1ULL)) split.b.push_back(q);
  }

  std::vector<int> local(static_cast<std::size_t>(c.n_qubits), -1);
  std::vector<bool> in_a(static_cast<std::size_t>(c.n_qubits), false);
  for (std::size_t i = 0; i < split.a.size(); ++i) {
    local[static_cast<std::size_t>(split.a[i])] = static_cast<int>(i);
    in_a[static_cast<std::size_t>(split.a[i])] = true;
  }
  for (std::size_t i = 0; i < split.b.size(); ++i) {
    local[static_cast<std::size_t>(split.b[i])] = static_cast<int>(i);
  }

  split.block_a.n_qubits = static_cast<int>(split.a.size());
  split.block_b.n_qubits = static_cast<int>(split.b.size());
  for (const Layer& layer : c.layers) {
    Layer la, lb;
    for (const Gate& g : layer) {
      if (g.kind == GateKind::DiagPhase) {
        // Diagonal phases factorize exactly across any cut; split the mask.
        const std::uint64_t ma = g.mask & amask;
        const std::uint64_t mb = g.mask & ~amask;
        if (ma) la.push_back(Gate::diag_phase(g.a, remap_mask(ma, split.a)));
        if (mb) lb.push_back(Gate::diag_phase(g.a, remap_mask(mb, split.b)));
        continue;
      }
      if (g.is_two_qubit() && in_a[static_cast<std::size_t>(g.q1)] !=
                                  in_a[static_cast<std::size_t>(g.q2)]) {
        ++split.severed;
        continue;
      }
      Gate mapped = g;
      mapped.q1 = local[static_cast<std::size_t>(g.q1)];
      if (g.is_two_qubit()) mapped.q2 = local[static_cast<std::size_t>(g.q2)];
      (in_a[static_cast<std::size_t>(g.q1)] ? la : lb).push_back(mapped);
    }
    split.block_a.layers.push_back(std::move(la));
    split.block_b.layers.push_back(std::move(lb));
  }
  return split;
}

std::uint64_t scatter_bits(std::uint64_t word, const std::vector<int>& qubits) {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    if ((word >> i) & 1ULL) out |= 1ULL << qubits[i];
  }
  return out;
}

}  // namespace

SampleSet spoof_samples(const Circuit& c, const std::vector<int>& block_a,
                        int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("sample count must be positive");
  const BlockSplit split = split_circuit(c, block_a);
  const Statevector psi_a = simulate(split.block_a);
  const Statevector psi_b = simulate(split.block_b);
  Rng rng_a = rng.stream(0);
  Rng rng_b = rng.stream(1);
  const SampleSet sa = sample(psi_a, k, rng_a);
  const SampleSet sb = sample(psi_b, k, rng_b);

  SampleSet out;
  out.circuit_id = c.id();
  out.n_qubits = c.n_qubits;
  out.seed = rng.seed();
  out.outcomes.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    out.outcomes.push_back(
        scatter_bits(sa.outcomes[static_cast<std::size_t>(i)], split.a) |
        scatter_bits(sb.outcomes[static_cast<std::size_t>(i)], split.b));
  }
  return out;
}

Statevector spoof_product_state(const Circuit& c,
                                const std::vector<int>& block_a) {
  const BlockSplit split = split_circuit(c, block_a);
  const Statevector psi_a = simulate(split.block_a);
  const Statevector psi_b = simulate(split.block_b);
  const auto av = psi_a.amplitudes();
  const auto bv = psi_b.amplitudes();
  Statevector full(c.n_qubits);
  auto out = full.amplitudes();
  for (std::uint64_t ia = 0; ia < av.size(); ++ia) {
    const std::uint64_t xa = scatter_bits(ia, split.a);
    for (std::uint64_t ib = 0; ib < bv.size(); ++ib) {
      out[xa | scatter_bits(ib, split.b)] = av[ia] * bv[ib];
    }
  }
  return full;
}

Estimate extrapolate_fidelity(
    std::span<const std::pair<double, Estimate>> points, double target) {
  if (points.size() < 3) {
    throw std::invalid_argument("extrapolation needs at least 3 points");
  }
  std::vector<double> xs, ys, sigmas;
  bool all_weighted = true;
  for (const auto& [proxy, est] : points) {
    if (!(est.value > 0.0)) {
      throw std::invalid_argument("extrapolation needs positive values");
    }
    xs.push_back(proxy);
    ys.push_back(std::log(est.value));
    sigmas.push_back(est.std_error / est.value);
    if (!(est.std_error > 0.0)) all_weighted = false;
  }
  const LineFit fit =
      fit_line(xs, ys, all_weighted ? std::span<const double>(sigmas)
                                    : std::span<const double>{});
  const double ln_pred = fit.intercept + fit.slope * target;
  const double var =
      fit.var_a + 2.0 * target * fit.cov_ab + target * target * fit.var_b;
  const double pred = std::exp(ln_pred);
  return {pred, pred * std::sqrt(std::max(var, 0.0)),
          static_cast<std::int64_t>(points.size())};
}

void write_sweep_csv(std::ostream& out, std::span<const DecayCurve> curves) {
  out << "n,eps,depth,quantity,mean,stderr,n_circuits,n_traj,seed\n";
  for (const DecayCurve& curve : curves) {
    for (const DecayPoint& p : curve.points) {
      out << curve.n << ',' << format_double(curve.eps) << ',' << p.depth
          << ',' << to_string(curve.quantity) << ',' << format_double(p.mean)
          << ',' << format_double(p.std_error) << ',' << curve.n_circuits
          << ',' << curve.n_traj << ',' << curve.seed << "\n";
    }
  }
}

}  // namespace rcslab
