#include "dimershuffle/shuffle.hpp"

#include <stdexcept>

namespace dimershuffle {

ShuffleWeights make_shuffle_weights(int L, const ModelParams& p) {
  WeightField w0 = initial_weights(L, p);
  WeightField w1 = spider_step(w0);
  ShuffleWeights sw{p, w0, w1};
  refresh_probabilities(sw);
  return sw;
}

void refresh_probabilities(ShuffleWeights& sw) {
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      sw.p_vertical[0][i][j] = sw.w0.at(i, j).p_vertical();
      sw.p_vertical[1][i][j] = sw.w1.at(i, j).p_vertical();
    }
  }
}

namespace {

// Writes the new boundary of face (i,j) into out. Deletion, sliding and
// creation each touch only the edges of this face.
void write_face(DimerConfig& out, int i, int j, const FaceBoundary& b, bool create_vertical) {
  switch (b.count()) {
    case 2:
      break;
    case 1:
      if (b.top) out.set_h(i, j);
      if (b.bottom) out.set_h(i, j + 1);
      if (b.left) out.set_v(i + 1, j);
      if (b.right) out.set_v(i, j);
      break;
    case 0:
      if (create_vertical) {
        out.set_v(i, j);
        out.set_v(i + 1, j);
      } else {
        out.set_h(i, j);
        out.set_h(i, j + 1);
      }
      break;
    default:
      throw std::logic_error("apply_F: invalid face boundary");
  }
}

}  // namespace

DimerConfig apply_F(const DimerConfig& eta, const WeightField& w, std::uint64_t k, const RngStream& rng) {
  const int n = eta.lattice().side();
  const int parity = static_cast<int>(k & 1);
  DimerConfig out(eta.L());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (((i + j) & 1) != parity) continue;
      FaceBoundary b = eta.boundary(i, j);
      bool vertical = false;
      if (b.count() == 0) vertical = rng.uniform(k, i, j) < w.at(i, j).p_vertical();
      write_face(out, i, j, b, vertical);
    }
  }
  if (!out.valid()) throw std::logic_error("apply_F: output is not a perfect matching");
  return out;
}

void for_each_F_outcome(const DimerConfig& eta, const WeightField& w, int parity,
                        const std::function<void(const DimerConfig&, double)>& visit) {
  const int n = eta.lattice().side();
  std::vector<Face> empty;
  DimerConfig base(eta.L());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (((i + j) & 1) != parity) continue;
      FaceBoundary b = eta.boundary(i, j);
      if (b.count() == 0)
        empty.push_back({i, j});
      else
        write_face(base, i, j, b, false);
    }
  }
  const std::uint64_t combos = std::uint64_t{1} << empty.size();
  for (std::uint64_t m = 0; m < combos; ++m) {
    DimerConfig out = base;
    double prob = 1.0;
    for (std::size_t e = 0; e < empty.size(); ++e) {
      const bool vertical = (m >> e) & 1;
      const FaceWeights& fw = w.at(empty[e].i, empty[e].j);
      prob *= vertical ? fw.p_vertical() : fw.p_horizontal();
      write_face(out, empty[e].i, empty[e].j, FaceBoundary{}, vertical);
    }
    visit(out, prob);
  }
}

DimerConfig apply_T(const DimerConfig& eta, const ShuffleWeights& sw, std::uint64_t n, const RngStream& rng) {
  DimerConfig a = apply_F(eta, sw.w0, 2 * n, rng);
  DimerConfig b = apply_F(a, sw.w1, 2 * n + 1, rng);
  return translate(b, -1, -1);
}

QuarterInt height_increment(const DimerConfig& eta, const DimerConfig& f0_eta, Face f) {
  // r2 = 1/4 - [right edge of f in eta]
  QuarterInt r2 = 1 - 4 * eta.has_v(f.i + 1, f.j);
  // r1 = [top edge of f in tau_(-1,0) F_0(eta)] - 1/4
  QuarterInt r1 = 4 * f0_eta.has_h(f.i + 1, f.j + 1) - 1;
  return r1 + r2;
}

TrackedState step_with_height(const TrackedState& s, const ShuffleWeights& sw, const RngStream& rng) {
  DimerConfig a = apply_F(s.eta, sw.w0, 2 * s.step, rng);
  QuarterInt inc = height_increment(s.eta, a, {0, 0});
  DimerConfig b = apply_F(a, sw.w1, 2 * s.step + 1, rng);
  return {translate(b, -1, -1), s.h0 + inc, s.step + 1};
}

TrajectorySummary evolve(TrackedState& s, std::uint64_t n_steps, const ShuffleWeights& sw, const RngStream& rng,
                         const std::vector<Observer>& observers) {
  ShuffleEngine engine(sw, rng);
  engine.load(s);
  TrajectorySummary sum;
  const QuarterInt start = s.h0;
  double total = 0.0;
  for (std::uint64_t t = 0; t < n_steps; ++t) {
    StepInfo info = engine.step();
    total += info.mean_increment;
    for (const Observer& obs : observers) obs(info);
  }
  s = engine.state();
  sum.steps = n_steps;
  sum.h0_change = s.h0 - start;
  sum.mean_speed = n_steps ? total / static_cast<double>(n_steps) : 0.0;
  return sum;
}

ShuffleEngine::ShuffleEngine(const ShuffleWeights& sw, const RngStream& rng)
    : sw_(sw), rng_(rng), L_(sw.w0.L()), n_(2 * L_) {
  wrap_.resize(3 * n_);
  for (int x = 0; x < 3 * n_; ++x) wrap_[x] = x % n_;
  h_.assign(n_ * n_, 0);
  v_.assign(n_ * n_, 0);
  heights_.assign(n_ * n_, 0);
}

void ShuffleEngine::load(const TrackedState& s) {
  if (s.eta.L() != L_) throw std::invalid_argument("ShuffleEngine::load: size mismatch");
  off_ = 0;
  step_ = s.step;
  for (int y = 0; y < n_; ++y) {
    for (int x = 0; x < n_; ++x) {
      h_[y * n_ + x] = s.eta.has_h(x, y);
      v_[y * n_ + x] = s.eta.has_v(x, y);
    }
  }
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i)
      heights_[j * n_ + i] = TorusLattice::face_even(i, j) ? s.h0 + height_gradient(s.eta, {0, 0}, {i, j}) : 0;
}

DimerConfig ShuffleEngine::config() const {
  DimerConfig c(L_);
  for (int y = 0; y < n_; ++y) {
    for (int x = 0; x < n_; ++x) {
      if (h_[stored(x, y)]) c.set_h(x, y);
      if (v_[stored(x, y)]) c.set_v(x, y);
    }
  }
  return c;
}

TrackedState ShuffleEngine::state() const { return {config(), heights_[0], step_}; }

void ShuffleEngine::pass(int parity, std::uint64_t k) {
  const double(&pv)[2][2] = sw_.p_vertical[parity];
  for (int q = 0; q < n_; ++q) {
    const int j = wrap_[q - off_ + n_];
    const int row = q * n_;
    const int row_up = wrap_[q + 1] * n_;
    for (int p = (parity + q) & 1; p < n_; p += 2) {
      const int p1 = wrap_[p + 1];
      std::uint8_t& bot = h_[row + p];
      std::uint8_t& top = h_[row_up + p];
      std::uint8_t& lft = v_[row + p];
      std::uint8_t& rgt = v_[row + p1];
      const int cnt = bot + top + lft + rgt;
      if (cnt == 2) {
        bot = top = lft = rgt = 0;
      } else if (cnt == 1) {
        std::uint8_t tb = top, bb = bot, lb = lft, rb = rgt;
        top = bb;
        bot = tb;
        lft = rb;
        rgt = lb;
      } else {
        const int i = wrap_[p - off_ + n_];
        if (rng_.uniform(k, i, j) < pv[i & 1][j & 1])
          lft = rgt = 1;
        else
          bot = top = 1;
      }
    }
  }
}

StepInfo ShuffleEngine::step() {
  // r2 at every even face: right edge in the current configuration.
  const QuarterInt h0_before = heights_[0];
  long total = 0;
  for (int j = 0; j < n_; ++j) {
    for (int i = j & 1; i < n_; i += 2) {
      QuarterInt r2 = 1 - 4 * v_[stored(i + 1, j)];
      heights_[j * n_ + i] += r2;
      total += r2;
    }
  }
  pass(0, 2 * step_);
  for (int j = 0; j < n_; ++j) {
    for (int i = j & 1; i < n_; i += 2) {
      QuarterInt r1 = 4 * h_[stored(i + 1, j + 1)] - 1;
      heights_[j * n_ + i] += r1;
      total += r1;
    }
  }
  pass(1, 2 * step_ + 1);
  // tau_(-1,-1): the actual edge (x,y) now lives at stored (x+off+1, y+off+1).
  off_ = (off_ + 1) % n_;
  ++step_;
  StepInfo info;
  info.step = step_;
  info.h0 = heights_[0];
  info.increment = heights_[0] - h0_before;
  info.mean_increment = static_cast<double>(total) / (4.0 * (n_ * n_ / 2));
  return info;
}

}  // namespace dimershuffle
