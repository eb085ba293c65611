#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "dimershuffle/lattice.hpp"
#include "dimershuffle/weights.hpp"

namespace dimershuffle {

// Probability table over one winding sector, keyed by DimerConfig::key().
struct SectorDistribution {
  int L = 0;
  WindingPair delta;
  std::map<std::uint64_t, double> table;

  double total_mass() const;
};

// pi_Delta proportional to a^{N_a} on T_L, L <= 2.
SectorDistribution exact_distribution(int L, double a, WindingPair delta);
// Same with arbitrary edge weights.
SectorDistribution exact_distribution(const WeightField& w, WindingPair delta);

double total_variation(const SectorDistribution& p, const SectorDistribution& q);

// Law of F_parity(eta) for eta ~ p, by enumeration of creation choices.
SectorDistribution push_forward_F(const SectorDistribution& p, const WeightField& w, int parity);
// Exact law of T(eta) for eta ~ pi_Delta.
SectorDistribution push_forward_exact(int L, double a, WindingPair delta);

struct SamplerConfig {
  long sweeps = 0;
  long burn_in = 0;
  std::uint64_t seed = 0;
};

// Metropolis chain on single-face rotations at fixed winding.
class RotationSampler {
 public:
  RotationSampler(const WeightField& w, DimerConfig start, std::uint64_t seed);

  // One proposal; returns true when a rotation was applied.
  bool propose();
  // L^2 * 4 proposals.
  void sweep();
  const DimerConfig& config() const { return eta_; }
  // Acceptance probability of rotating face f in the current configuration (0 if not flippable).
  double acceptance(Face f) const;

 private:
  WeightField w_;
  DimerConfig eta_;
  std::mt19937_64 gen_;
};

DimerConfig mcmc_sample(int L, double a, WindingPair delta, const SamplerConfig& cfg);

// e1: bottom edge of an 'a' face, e2: right edge of an 'a' face,
// e3: bottom edge of a '1' face, e4: right edge of a '1' face.
enum class EdgeClass { e1, e2, e3, e4 };

// Fraction of the L^2 translates of the class edge that are occupied.
double edge_density(const DimerConfig& eta, EdgeClass cls);

struct Estimate {
  double mean = 0;
  double std_error = 0;
};

// Mean over samples of edge_density with a batch-means standard error.
Estimate edge_occupation_estimate(const std::vector<DimerConfig>& samples, EdgeClass cls);
double exact_edge_expectation(const SectorDistribution& p, EdgeClass cls);

}  // namespace dimershuffle
