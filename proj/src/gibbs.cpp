#include "dimershuffle/gibbs.hpp"

#include <cmath>
#include <stdexcept>

#include "dimershuffle/shuffle.hpp"

namespace dimershuffle {

double SectorDistribution::total_mass() const {
  double s = 0;
  for (const auto& [k, p] : table) s += p;
  return s;
}

SectorDistribution exact_distribution(const WeightField& w, WindingPair delta) {
  if (w.L() > 2) throw std::invalid_argument("exact_distribution: L must be <= 2");
  SectorDistribution d{w.L(), delta, {}};
  double z = 0;
  for (const DimerConfig& c : enumerate_matchings(w.L())) {
    if (!(winding_numbers(c) == delta)) continue;
    double wt = config_weight(c, w);
    d.table[c.key()] = wt;
    z += wt;
  }
  if (d.table.empty()) throw std::invalid_argument("exact_distribution: empty sector");
  for (auto& [k, p] : d.table) p /= z;
  return d;
}

SectorDistribution exact_distribution(int L, double a, WindingPair delta) {
  return exact_distribution(initial_weights(L, {a}), delta);
}

double total_variation(const SectorDistribution& p, const SectorDistribution& q) {
  double s = 0;
  for (const auto& [k, v] : p.table) {
    auto it = q.table.find(k);
    s += std::abs(v - (it == q.table.end() ? 0.0 : it->second));
  }
  for (const auto& [k, v] : q.table)
    if (!p.table.count(k)) s += std::abs(v);
  return 0.5 * s;
}

SectorDistribution push_forward_F(const SectorDistribution& p, const WeightField& w, int parity) {
  SectorDistribution out{p.L, {-p.delta.d1, -p.delta.d2}, {}};
  for (const auto& [key, prob] : p.table) {
    DimerConfig eta = DimerConfig::from_key(p.L, key);
    for_each_F_outcome(eta, w, parity, [&](const DimerConfig& o, double q) { out.table[o.key()] += prob * q; });
  }
  return out;
}

SectorDistribution push_forward_exact(int L, double a, WindingPair delta) {
  ShuffleWeights sw = make_shuffle_weights(L, {a});
  SectorDistribution mid = push_forward_F(exact_distribution(sw.w0, delta), sw.w0, 0);
  SectorDistribution end = push_forward_F(mid, sw.w1, 1);
  SectorDistribution out{L, end.delta, {}};
  for (const auto& [key, prob] : end.table)
    out.table[translate(DimerConfig::from_key(L, key), -1, -1).key()] += prob;
  return out;
}

RotationSampler::RotationSampler(const WeightField& w, DimerConfig start, std::uint64_t seed)
    : w_(w), eta_(std::move(start)), gen_(seed) {}

double RotationSampler::acceptance(Face f) const {
  FaceBoundary b = eta_.boundary(f.i, f.j);
  const FaceWeights& fw = w_.at(f.i, f.j);
  double ratio;
  if (b.top && b.bottom)
    ratio = fw.b * fw.d / (fw.a * fw.c);
  else if (b.left && b.right)
    ratio = fw.a * fw.c / (fw.b * fw.d);
  else
    return 0.0;
  return ratio < 1.0 ? ratio : 1.0;
}

bool RotationSampler::propose() {
  const int n = eta_.lattice().side();
  std::uniform_int_distribution<int> pick(0, n * n - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int f = pick(gen_);
  Face face{f % n, f / n};
  double acc = acceptance(face);
  if (acc == 0.0) return false;
  if (acc < 1.0 && u(gen_) >= acc) return false;
  eta_ = *elementary_rotation(eta_, face);
  return true;
}

void RotationSampler::sweep() {
  const int faces = eta_.lattice().num_faces();
  for (int s = 0; s < faces; ++s) propose();
}

DimerConfig mcmc_sample(int L, double a, WindingPair delta, const SamplerConfig& cfg) {
  if (cfg.sweeps < 0 || cfg.burn_in < 0) throw std::invalid_argument("mcmc_sample: negative sweep count");
  RotationSampler s(initial_weights(L, {a}), staircase_config(L, delta), cfg.seed);
  for (long t = 0; t < cfg.burn_in + cfg.sweeps; ++t) s.sweep();
  return s.config();
}

double edge_density(const DimerConfig& eta, EdgeClass cls) {
  const int L = eta.L();
  int occ = 0;
  for (int m = 0; m < 2 * L; m += 2) {
    for (int q = 0; q < 2 * L; q += 2) {
      switch (cls) {
        case EdgeClass::e1: occ += eta.has_h(m, q); break;
        case EdgeClass::e2: occ += eta.has_v(m + 1, q); break;
        case EdgeClass::e3: occ += eta.has_h(m + 1, q + 1); break;
        case EdgeClass::e4: occ += eta.has_v(m + 2, q + 1); break;
      }
    }
  }
  return static_cast<double>(occ) / (L * L);
}

Estimate edge_occupation_estimate(const std::vector<DimerConfig>& samples, EdgeClass cls) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("edge_occupation_estimate: need at least 2 samples");
  const std::size_t batches = n < 32 ? n : 32;
  const std::size_t per = n / batches;
  std::vector<double> means(batches, 0.0);
  double total = 0;
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t s = b * per; s < (b + 1) * per; ++s) means[b] += edge_density(samples[s], cls);
    means[b] /= static_cast<double>(per);
  }
  for (const DimerConfig& c : samples) total += edge_density(c, cls);
  Estimate e;
  e.mean = total / static_cast<double>(n);
  double bm = 0;
  for (double m : means) bm += m;
  bm /= static_cast<double>(batches);
  double var = 0;
  for (double m : means) var += (m - bm) * (m - bm);
  var /= static_cast<double>(batches - 1);
  e.std_error = std::sqrt(var / static_cast<double>(batches));
  return e;
}

double exact_edge_expectation(const SectorDistribution& p, EdgeClass cls) {
  double s = 0;
  for (const auto& [key, prob] : p.table) s += prob * edge_density(DimerConfig::from_key(p.L, key), cls);
  return s;
}

}  // namespace dimershuffle
