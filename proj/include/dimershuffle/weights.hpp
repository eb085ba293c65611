#pragma once

#include <vector>

#include "dimershuffle/lattice.hpp"

namespace dimershuffle {

struct ModelParams {
  double a = 1.0;
  // c = a / (1 + a^2)
  double c() const { return a / (1.0 + a * a); }
};

// Edge weights around a face, clockwise from the top edge.
struct FaceWeights {
  double a = 1.0, b = 1.0, c = 1.0, d = 1.0;
  double delta() const { return a * c + b * d; }
  // Probability of filling an empty face with a vertical pair.
  double p_vertical() const { return b * d / delta(); }
  double p_horizontal() const { return a * c / delta(); }
};

// Face weight tuples for every face; the tuples of adjacent faces share edges.
class WeightField {
 public:
  WeightField(int L, int k);

  int L() const { return lat_.L(); }
  int k() const { return k_; }
  const TorusLattice& lattice() const { return lat_; }
  FaceWeights& at(int i, int j) { return faces_[lat_.face_index(i, j)]; }
  const FaceWeights& at(int i, int j) const { return faces_[lat_.face_index(i, j)]; }

  double h_edge_weight(int x, int y) const { return at(x, y).c; }
  double v_edge_weight(int x, int y) const { return at(x, y).d; }

  // Largest relative mismatch between the two tuples that share each edge.
  double consistency_error() const;
  // Rebuild the tuples of faces with parity p from the other parity.
  void resync_from_parity(int p);

 private:
  TorusLattice lat_;
  int k_;
  std::vector<FaceWeights> faces_;
};

// w_0: a on every edge of faces with i,j even, 1 on faces with i,j odd.
WeightField initial_weights(int L, const ModelParams& p);

// w_k -> w_{k+1}: faces of parity k+1 take the neighbour tuples divided by their
// Delta; the other parity is rebuilt from the shared edges.
WeightField spider_step(const WeightField& w);

WeightField weights_at(int L, const ModelParams& p, int k);

// Shifted field: out(i,j) = w(i - dx, j - dy).
WeightField translate(const WeightField& w, int dx, int dy);

WeightField scaled(const WeightField& w, double s);

double config_weight(const DimerConfig& eta, const WeightField& w);

}  // namespace dimershuffle
