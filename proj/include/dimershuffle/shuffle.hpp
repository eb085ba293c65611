#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dimershuffle/lattice.hpp"
#include "dimershuffle/rng.hpp"
#include "dimershuffle/weights.hpp"

namespace dimershuffle {

// Weights used by one step of T: w_0 for F_0 and w_1 for F_1.
struct ShuffleWeights {
  ModelParams params;
  WeightField w0;
  WeightField w1;
  // Vertical creation probability indexed by [time parity][i & 1][j & 1].
  double p_vertical[2][2][2] = {};
};

ShuffleWeights make_shuffle_weights(int L, const ModelParams& p);
// Refresh the probability table after editing w0 or w1 by hand.
void refresh_probabilities(ShuffleWeights& sw);

// F_k on the faces of parity k mod 2; creation draws use key (k, i, j).
DimerConfig apply_F(const DimerConfig& eta, const WeightField& w, std::uint64_t k, const RngStream& rng);

// Enumerates every outcome of F_k with its probability.
void for_each_F_outcome(const DimerConfig& eta, const WeightField& w, int parity,
                        const std::function<void(const DimerConfig&, double)>& visit);

// T = tau_(-1,-1) F_1 F_0, using time indices 2n and 2n+1.
DimerConfig apply_T(const DimerConfig& eta, const ShuffleWeights& sw, std::uint64_t n, const RngStream& rng);

struct TrackedState {
  DimerConfig eta;
  QuarterInt h0 = 0;  // height of face (0,0)
  std::uint64_t step = 0;
};

// One step of T together with the height update at face (0,0).
QuarterInt height_increment(const DimerConfig& eta, const DimerConfig& f0_eta, Face f);
TrackedState step_with_height(const TrackedState& s, const ShuffleWeights& sw, const RngStream& rng);

struct StepInfo {
  std::uint64_t step = 0;     // steps completed
  QuarterInt h0 = 0;
  QuarterInt increment = 0;   // change of h0 in this step
  double mean_increment = 0;  // increment averaged over all even faces, full units
};

using Observer = std::function<void(const StepInfo&)>;

struct TrajectorySummary {
  std::uint64_t steps = 0;
  QuarterInt h0_change = 0;
  double mean_speed = 0;  // average over steps of the even-face mean increment
};

TrajectorySummary evolve(TrackedState& s, std::uint64_t n_steps, const ShuffleWeights& sw, const RngStream& rng,
                         const std::vector<Observer>& observers = {});

// Fast implementation of T on edge-occupancy arrays with a lazily applied
// translation. Tracks the height at every even face.
class ShuffleEngine {
 public:
  ShuffleEngine(const ShuffleWeights& sw, const RngStream& rng);

  void load(const TrackedState& s);
  TrackedState state() const;
  DimerConfig config() const;

  StepInfo step();

  int L() const { return L_; }
  std::uint64_t steps() const { return step_; }
  // Heights of even faces, indexed by face_index; odd entries are unused.
  const std::vector<QuarterInt>& heights() const { return heights_; }

 private:
  int stored(int x, int y) const { return wrap_[y + off_ + n_] * n_ + wrap_[x + off_ + n_]; }
  void pass(int parity, std::uint64_t k);

  const ShuffleWeights& sw_;
  RngStream rng_;
  int L_, n_;
  int off_ = 0;
  std::uint64_t step_ = 0;
  std::vector<int> wrap_;
  std::vector<std::uint8_t> h_, v_;
  std::vector<QuarterInt> heights_;
};

}  // namespace dimershuffle
