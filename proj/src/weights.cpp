#include "dimershuffle/weights.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dimershuffle {

WeightField::WeightField(int L, int k) : lat_(L), k_(k), faces_(lat_.num_faces()) {}

namespace {

double rel(double x, double y) { return std::abs(x - y) / std::max(std::abs(x), std::abs(y)); }

}  // namespace

double WeightField::consistency_error() const {
  const int n = lat_.side();
  double err = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      err = std::max(err, rel(at(i, j).a, at(i, j + 1).c));
      err = std::max(err, rel(at(i, j).b, at(i + 1, j).d));
    }
  }
  return err;
}

void WeightField::resync_from_parity(int p) {
  const int n = lat_.side();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (((i + j) & 1) == p) continue;
      FaceWeights& f = at(i, j);
      f.a = at(i, j + 1).c;
      f.b = at(i + 1, j).d;
      f.c = at(i, j - 1).a;
      f.d = at(i - 1, j).b;
    }
  }
}

WeightField initial_weights(int L, const ModelParams& p) {
  if (!(p.a > 0.0)) throw std::invalid_argument("initial_weights: a must be positive");
  WeightField w(L, 0);
  const int n = w.lattice().side();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (!TorusLattice::face_even(i, j)) continue;
      double v = TorusLattice::face_label(i, j) == 'a' ? p.a : 1.0;
      w.at(i, j) = {v, v, v, v};
    }
  }
  w.resync_from_parity(0);
  return w;
}

WeightField spider_step(const WeightField& w) {
  WeightField out(w.L(), w.k() + 1);
  const int n = w.lattice().side();
  const int p = (w.k() + 1) & 1;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (((i + j) & 1) != p) continue;
      const FaceWeights& up = w.at(i, j + 1);
      const FaceWeights& rt = w.at(i + 1, j);
      const FaceWeights& dn = w.at(i, j - 1);
      const FaceWeights& lf = w.at(i - 1, j);
      out.at(i, j) = {up.a / up.delta(), rt.b / rt.delta(), dn.c / dn.delta(), lf.d / lf.delta()};
    }
  }
  out.resync_from_parity(p);
  return out;
}

WeightField weights_at(int L, const ModelParams& p, int k) {
  WeightField w = initial_weights(L, p);
  for (int s = 0; s < k; ++s) w = spider_step(w);
  return w;
}

WeightField translate(const WeightField& w, int dx, int dy) {
  WeightField out(w.L(), w.k());
  const int n = w.lattice().side();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out.at(i + dx, j + dy) = w.at(i, j);
  return out;
}

WeightField scaled(const WeightField& w, double s) {
  WeightField out = w;
  const int n = w.lattice().side();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      FaceWeights& f = out.at(i, j);
      f = {f.a * s, f.b * s, f.c * s, f.d * s};
    }
  }
  return out;
}

double config_weight(const DimerConfig& eta, const WeightField& w) {
  const int n = eta.lattice().side();
  double prod = 1.0;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      if (eta.has_h(x, y)) prod *= w.h_edge_weight(x, y);
      if (eta.has_v(x, y)) prod *= w.v_edge_weight(x, y);
    }
  }
  return prod;
}

}  // namespace dimershuffle
