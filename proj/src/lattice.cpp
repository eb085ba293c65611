#include "dimershuffle/lattice.hpp"

#include <cstdlib>
#include <deque>
#include <stdexcept>

namespace dimershuffle {

TorusLattice::TorusLattice(int L) : L_(L) {
  if (L < 1) throw std::invalid_argument("TorusLattice: L must be >= 1");
}

char TorusLattice::face_label(int i, int j) {
  if (!face_even(i, j)) return 'o';
  return (i & 1) == 0 ? 'a' : '1';
}

DimerConfig::DimerConfig(int L) : lat_(L), dir_(lat_.num_vertices(), kUnset) {}

void DimerConfig::set_h(int x, int y) {
  dir_[lat_.vertex(x, y)] = kRight;
  dir_[lat_.vertex(x + 1, y)] = kLeft;
}

void DimerConfig::set_v(int x, int y) {
  dir_[lat_.vertex(x, y)] = kUp;
  dir_[lat_.vertex(x, y + 1)] = kDown;
}

FaceBoundary DimerConfig::boundary(int i, int j) const {
  FaceBoundary b;
  b.top = has_h(i, j + 1);
  b.bottom = has_h(i, j);
  b.left = has_v(i, j);
  b.right = has_v(i + 1, j);
  return b;
}

bool DimerConfig::edge_occupied(int edge) const {
  const int nv = lat_.num_vertices();
  if (edge < nv) return dir_[edge] == kRight;
  return dir_[edge - nv] == kUp;
}

bool DimerConfig::valid() const {
  const int n = lat_.side();
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      Dir d = dir(x, y);
      if (d == kUnset) return false;
      int px = x, py = y;
      if (d == kRight) ++px;
      if (d == kLeft) --px;
      if (d == kUp) ++py;
      if (d == kDown) --py;
      if (dir(px, py) != opposite(d)) return false;
    }
  }
  return true;
}

std::uint64_t DimerConfig::key() const {
  if (lat_.num_edges() > 64) throw std::invalid_argument("DimerConfig::key: lattice too large");
  std::uint64_t k = 0;
  for (int e = 0; e < lat_.num_edges(); ++e)
    if (edge_occupied(e)) k |= std::uint64_t{1} << e;
  return k;
}

DimerConfig DimerConfig::from_key(int L, std::uint64_t key) {
  DimerConfig c(L);
  const int n = c.lat_.side();
  const int nv = c.lat_.num_vertices();
  for (int e = 0; e < c.lat_.num_edges(); ++e) {
    if (!(key >> e & 1)) continue;
    int v = e % nv;
    if (e < nv)
      c.set_h(v % n, v / n);
    else
      c.set_v(v % n, v / n);
  }
  return c;
}

WindingPair winding_numbers(const DimerConfig& eta) {
  const int n = eta.lattice().side();
  WindingPair w;
  for (int i = 0; i < n; ++i) w.d1 += sigma_right(i, 0) * eta.has_v(i + 1, 0);
  for (int j = 0; j < n; ++j) w.d2 += sigma_up(0, j) * eta.has_h(0, j + 1);
  return w;
}

QuarterInt height_gradient(const DimerConfig& eta, Face f, Face g) {
  const TorusLattice& lat = eta.lattice();
  int dx = lat.wrap(g.i - f.i);
  int dy = lat.wrap(g.j - f.j);
  QuarterInt h = 0;
  int i = f.i, j = f.j;
  for (int s = 0; s < dx; ++s, ++i) h += sigma_right(i, j) * (4 * eta.has_v(i + 1, j) - 1);
  for (int s = 0; s < dy; ++s, ++j) h += sigma_up(i, j) * (4 * eta.has_h(i, j + 1) - 1);
  return h;
}

std::optional<DimerConfig> elementary_rotation(const DimerConfig& eta, Face f) {
  FaceBoundary b = eta.boundary(f.i, f.j);
  DimerConfig out = eta;
  if (b.top && b.bottom) {
    out.set_v(f.i, f.j);
    out.set_v(f.i + 1, f.j);
  } else if (b.left && b.right) {
    out.set_h(f.i, f.j);
    out.set_h(f.i, f.j + 1);
  } else {
    return std::nullopt;
  }
  return out;
}

DimerConfig translate(const DimerConfig& eta, int dx, int dy) {
  const int n = eta.lattice().side();
  DimerConfig out(eta.L());
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) out.set_dir_raw(x + dx, y + dy, eta.dir(x, y));
  return out;
}

namespace {

// Largest admissible height step when crossing an edge with sign sigma.
int max_step(int sigma) { return sigma == 1 ? 3 : 1; }

}  // namespace

DimerConfig staircase_config(int L, WindingPair delta) {
  if (std::abs(delta.d1) + std::abs(delta.d2) >= L)
    throw std::invalid_argument("staircase_config: winding outside the open diamond");
  const TorusLattice lat(L);
  const int n = lat.side();

  // Residues mod 4 come from the height field of the horizontal brick pattern.
  DimerConfig brick(L);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; x += 2) brick.set_h(x, y);
  std::vector<QuarterInt> h(lat.num_faces());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) h[lat.face_index(i, j)] = height_gradient(brick, {0, 0}, {i, j});

  // Greatest height function below the brick heights subject to the Lipschitz
  // constraints, with quasi-periodic offsets 4*delta across the seams.
  struct Arc {
    int to;
    QuarterInt w;
  };
  auto arcs_from = [&](int i, int j, Arc out[4]) {
    out[0] = {lat.face_index(i + 1, j), max_step(sigma_right(i, j)) - (i == n - 1 ? 4 * delta.d1 : 0)};
    out[1] = {lat.face_index(i - 1, j), max_step(-sigma_right(i - 1, j)) + (i == 0 ? 4 * delta.d1 : 0)};
    out[2] = {lat.face_index(i, j + 1), max_step(sigma_up(i, j)) - (j == n - 1 ? 4 * delta.d2 : 0)};
    out[3] = {lat.face_index(i, j - 1), max_step(-sigma_up(i, j - 1)) + (j == 0 ? 4 * delta.d2 : 0)};
  };
  std::deque<int> queue;
  std::vector<char> queued(lat.num_faces(), 1);
  std::vector<long> relax_count(lat.num_faces(), 0);
  for (int f = 0; f < lat.num_faces(); ++f) queue.push_back(f);
  while (!queue.empty()) {
    int f = queue.front();
    queue.pop_front();
    queued[f] = 0;
    Arc arcs[4];
    arcs_from(f % n, f / n, arcs);
    for (const Arc& a : arcs) {
      if (h[f] + a.w < h[a.to]) {
        h[a.to] = h[f] + a.w;
        if (++relax_count[a.to] > 4L * lat.num_faces())
          throw std::invalid_argument("staircase_config: winding not realizable");
        if (!queued[a.to]) {
          queued[a.to] = 1;
          queue.push_back(a.to);
        }
      }
    }
  }

  DimerConfig out(L);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      // Vertical edge at (x,y): faces (x-1,y) and (x,y).
      QuarterInt dv = h[lat.face_index(x, y)] - h[lat.face_index(x - 1, y)] + (x == 0 ? 4 * delta.d1 : 0);
      if (std::abs(dv) == 3) out.set_v(x, y);
      // Horizontal edge at (x,y): faces (x,y-1) and (x,y).
      QuarterInt dh = h[lat.face_index(x, y)] - h[lat.face_index(x, y - 1)] + (y == 0 ? 4 * delta.d2 : 0);
      if (std::abs(dh) == 3) out.set_h(x, y);
    }
  }
  if (!out.valid() || !(winding_numbers(out) == delta))
    throw std::logic_error("staircase_config: construction failed");
  return out;
}

namespace {

void backtrack(DimerConfig& c, int start, std::vector<DimerConfig>& out) {
  const TorusLattice& lat = c.lattice();
  const int n = lat.side();
  int v = start;
  while (v < lat.num_vertices() && c.raw()[v] != kUnset) ++v;
  if (v == lat.num_vertices()) {
    out.push_back(c);
    return;
  }
  const int x = v % n, y = v / n;
  const int nx[4] = {x + 1, x, x - 1, x};
  const int ny[4] = {y, y + 1, y, y - 1};
  for (int d = 0; d < 4; ++d) {
    if (c.dir(nx[d], ny[d]) != kUnset) continue;
    c.set_dir_raw(x, y, static_cast<Dir>(d));
    c.set_dir_raw(nx[d], ny[d], opposite(static_cast<Dir>(d)));
    backtrack(c, v + 1, out);
    c.set_dir_raw(nx[d], ny[d], kUnset);
    c.set_dir_raw(x, y, kUnset);
  }
}

}  // namespace

std::vector<DimerConfig> enumerate_matchings(int L) {
  if (L > 2) throw std::invalid_argument("enumerate_matchings: L must be <= 2");
  std::vector<DimerConfig> out;
  DimerConfig c(L);
  backtrack(c, 0, out);
  return out;
}

std::string to_string(const DimerConfig& eta) {
  static const char glyph[4] = {'>', '^', '<', 'v'};
  const int n = eta.lattice().side();
  std::string s;
  for (int y = n - 1; y >= 0; --y) {
    for (int x = 0; x < n; ++x) {
      Dir d = eta.dir(x, y);
      s += d == kUnset ? '?' : glyph[d];
    }
    s += '\n';
  }
  return s;
}

}  // namespace dimershuffle
