#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dimershuffle {

// Heights are stored exactly, in units of 1/4.
using QuarterInt = std::int64_t;

struct Face {
  int i = 0;
  int j = 0;
};

struct WindingPair {
  int d1 = 0;
  int d2 = 0;
  bool operator==(const WindingPair&) const = default;
};

// Direction of the dimer attached to a vertex.
enum Dir : std::uint8_t { kRight = 0, kUp = 1, kLeft = 2, kDown = 3, kUnset = 255 };

inline Dir opposite(Dir d) { return static_cast<Dir>((d + 2) & 3); }

// The 2L x 2L torus. Vertex (x,y) is white when x+y is even. Face (i,j) has
// corners (i,j), (i+1,j), (i,j+1), (i+1,j+1); it is even when i+j is even, so
// even faces have a white top-right corner.
class TorusLattice {
 public:
  explicit TorusLattice(int L);

  int L() const { return L_; }
  int side() const { return 2 * L_; }
  int num_vertices() const { return side() * side(); }
  int num_faces() const { return side() * side(); }
  int num_edges() const { return 2 * side() * side(); }

  int wrap(int x) const {
    int m = x % side();
    return m < 0 ? m + side() : m;
  }
  int vertex(int x, int y) const { return wrap(y) * side() + wrap(x); }
  int face_index(int i, int j) const { return wrap(j) * side() + wrap(i); }

  // Horizontal edge (x,y)-(x+1,y) and vertical edge (x,y)-(x,y+1).
  int h_edge(int x, int y) const { return vertex(x, y); }
  int v_edge(int x, int y) const { return num_vertices() + vertex(x, y); }

  static bool white(int x, int y) { return ((x + y) & 1) == 0; }
  static bool face_even(int i, int j) { return ((i + j) & 1) == 0; }
  // 'a' for even faces with i,j even, '1' for even faces with i,j odd, 'o' for odd faces.
  static char face_label(int i, int j);

  bool operator==(const TorusLattice& o) const { return L_ == o.L_; }

 private:
  int L_;
};

// Boundary occupancy of one face.
struct FaceBoundary {
  bool top = false, right = false, bottom = false, left = false;
  int count() const { return top + right + bottom + left; }
};

// Perfect matching stored as the dimer direction at every vertex. Directions
// rather than partner indices keep the L = 1 multigraph unambiguous.
class DimerConfig {
 public:
  explicit DimerConfig(int L);

  const TorusLattice& lattice() const { return lat_; }
  int L() const { return lat_.L(); }

  Dir dir(int x, int y) const { return static_cast<Dir>(dir_[lat_.vertex(x, y)]); }
  bool has_h(int x, int y) const { return dir_[lat_.vertex(x, y)] == kRight; }
  bool has_v(int x, int y) const { return dir_[lat_.vertex(x, y)] == kUp; }
  void set_h(int x, int y);
  void set_v(int x, int y);
  void set_dir_raw(int x, int y, Dir d) { dir_[lat_.vertex(x, y)] = d; }

  FaceBoundary boundary(int i, int j) const;
  bool edge_occupied(int edge) const;
  bool valid() const;

  // Edge-occupancy bitmask; requires num_edges <= 64.
  std::uint64_t key() const;
  static DimerConfig from_key(int L, std::uint64_t key);

  const std::vector<std::uint8_t>& raw() const { return dir_; }
  bool operator==(const DimerConfig& o) const { return lat_ == o.lat_ && dir_ == o.dir_; }

 private:
  TorusLattice lat_;
  std::vector<std::uint8_t> dir_;
};

// Sign of an edge crossing: +1 when the white endpoint is on the right.
inline int sigma_right(int i, int j) { return TorusLattice::face_even(i, j) ? -1 : 1; }
inline int sigma_up(int i, int j) { return TorusLattice::face_even(i, j) ? 1 : -1; }

WindingPair winding_numbers(const DimerConfig& eta);

// Height difference h(g) - h(f) along the staircase path (right first, then up)
// with displacements reduced to [0, 2L).
QuarterInt height_gradient(const DimerConfig& eta, Face f, Face g);

std::optional<DimerConfig> elementary_rotation(const DimerConfig& eta, Face f);

// tau_n: a dimer on edge e moves to e + n.
DimerConfig translate(const DimerConfig& eta, int dx, int dy);

// A configuration with winding delta; throws std::invalid_argument when delta/L
// is not in the open diamond |d1| + |d2| < L.
DimerConfig staircase_config(int L, WindingPair delta);

// All perfect matchings of T_L, L <= 2.
std::vector<DimerConfig> enumerate_matchings(int L);

std::string to_string(const DimerConfig& eta);

}  // namespace dimershuffle
