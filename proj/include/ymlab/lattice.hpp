#pragma once

// Flat-torus lattice geometry: uniform spacing, periodic in every axis,
// dimension 2..5.  Sites are indexed site-major with axis 0 fastest:
//   index = x0 + N0*(x1 + N1*(x2 + ...)).

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ymlab {

inline constexpr int kMaxDim = 5;

using SiteIndex = std::int64_t;

struct Coords {
  std::array<int, kMaxDim> x{};
};

class LatticeGeometry {
 public:
  LatticeGeometry() = default;

  LatticeGeometry(int n, const std::vector<int>& sizes, double spacing)
      : n_(n), spacing_(spacing) {
    if (n < 2 || n > kMaxDim)
      throw std::invalid_argument("lattice dimension must be in [2," +
                                  std::to_string(kMaxDim) + "], got " +
                                  std::to_string(n));
    if (static_cast<int>(sizes.size()) != n)
      throw std::invalid_argument("sizes list does not match dimension");
    if (spacing <= 0.0) throw std::invalid_argument("spacing must be positive");
    sites_ = 1;
    for (int mu = 0; mu < n; ++mu) {
      if (sizes[mu] < 4)
        throw std::invalid_argument("axis " + std::to_string(mu) +
                                    " needs at least 4 sites");
      sizes_[mu] = sizes[mu];
      sites_ *= sizes[mu];
    }
    SiteIndex s = 1;
    for (int mu = 0; mu < n; ++mu) {
      strides_[mu] = s;
      s *= sizes_[mu];
    }
  }

  int dim() const { return n_; }
  int size(int mu) const { return sizes_[mu]; }
  double spacing() const { return spacing_; }
  SiteIndex site_count() const { return sites_; }
  double extent(int mu) const { return spacing_ * sizes_[mu]; }

  double volume() const {
    double v = 1.0;
    for (int mu = 0; mu < n_; ++mu) v *= extent(mu);
    return v;
  }

  /// Injectivity-radius proxy: half the shortest period.
  double injectivity_radius() const {
    int m = sizes_[0];
    for (int mu = 1; mu < n_; ++mu) m = std::min(m, sizes_[mu]);
    return 0.5 * spacing_ * m;
  }

  int pair_count() const { return n_ * (n_ - 1) / 2; }

  /// Ordered-pair index for mu < nu, lexicographic.
  int pair_index(int mu, int nu) const {
    int p = 0;
    for (int a = 0; a < n_; ++a)
      for (int b = a + 1; b < n_; ++b) {
        if (a == mu && b == nu) return p;
        ++p;
      }
    throw std::invalid_argument("bad axis pair");
  }

  std::pair<int, int> pair_axes(int p) const {
    int q = 0;
    for (int a = 0; a < n_; ++a)
      for (int b = a + 1; b < n_; ++b) {
        if (q == p) return {a, b};
        ++q;
      }
    throw std::invalid_argument("bad pair index");
  }

  Coords coords(SiteIndex s) const {
    Coords c;
    for (int mu = 0; mu < n_; ++mu) {
      c.x[mu] = static_cast<int>(s % sizes_[mu]);
      s /= sizes_[mu];
    }
    return c;
  }

  SiteIndex site(const Coords& c) const {
    SiteIndex s = 0;
    for (int mu = 0; mu < n_; ++mu) s += strides_[mu] * c.x[mu];
    return s;
  }

  /// Neighbor site one step along +/-mu; wrap reports -1/0/+1 boundary
  /// crossing so callers can apply the transition map.
  SiteIndex neighbor(SiteIndex s, int mu, int dir, int* wrap) const {
    const int xmu = static_cast<int>((s / strides_[mu]) % sizes_[mu]);
    *wrap = 0;
    if (dir > 0) {
      if (xmu + 1 == sizes_[mu]) {
        *wrap = +1;
        return s - strides_[mu] * (sizes_[mu] - 1);
      }
      return s + strides_[mu];
    }
    if (xmu == 0) {
      *wrap = -1;
      return s + strides_[mu] * (sizes_[mu] - 1);
    }
    return s - strides_[mu];
  }

  /// Shortest signed displacement from b to a along axis mu, in lattice units.
  int wrapped_delta(int a, int b, int mu) const {
    int d = a - b;
    const int N = sizes_[mu];
    d %= N;
    if (d < -N / 2) d += N;
    if (d > N / 2) d -= N;  // ties resolve to -N/2
    if (2 * d == N) d -= N;
    return d;
  }

  /// Flat-torus distance between site centers.
  double torus_distance(SiteIndex a, SiteIndex b) const {
    const Coords ca = coords(a), cb = coords(b);
    double s = 0.0;
    for (int mu = 0; mu < n_; ++mu) {
      const double d = wrapped_delta(ca.x[mu], cb.x[mu], mu) * spacing_;
      s += d * d;
    }
    return std::sqrt(s);
  }

  bool operator==(const LatticeGeometry& o) const {
    if (n_ != o.n_ || spacing_ != o.spacing_) return false;
    for (int mu = 0; mu < n_; ++mu)
      if (sizes_[mu] != o.sizes_[mu]) return false;
    return true;
  }
  bool operator!=(const LatticeGeometry& o) const { return !(*this == o); }

 private:
  int n_ = 0;
  std::array<int, kMaxDim> sizes_{};
  std::array<SiteIndex, kMaxDim> strides_{};
  double spacing_ = 0.0;
  SiteIndex sites_ = 0;
};

}  // namespace ymlab
