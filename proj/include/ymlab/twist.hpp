#pragma once

// Twisted boundary conditions: one constant transition map per axis plus the
// declared integer 2-form of first-Chern numbers.  Cocycle consistency means
// the commutator of any two transition maps is the central element
//   g_mu g_nu g_mu^-1 g_nu^-1 = exp(+2 pi i c_{mu nu} / r) Id,
// which is the convention realized by the clock/shift pair below.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "ymlab/lattice.hpp"
#include "ymlab/matrix.hpp"

namespace ymlab {

struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename S>
struct TwistCocycle {
  int rank = 1;
  int dim = 0;
  std::vector<SquareMatrix<S>> g;                   // one per axis
  std::array<std::array<int, kMaxDim>, kMaxDim> chern{};  // antisymmetric

  static TwistCocycle untwisted(int n, int rank) {
    TwistCocycle t;
    t.rank = rank;
    t.dim = n;
    t.g.assign(n, SquareMatrix<S>::identity(rank));
    for (auto& row : t.chern) row.fill(0);
    return t;
  }

  bool axis_trivial(int mu) const {
    return max_abs(g[mu] - SquareMatrix<S>::identity(rank)) < 1e-14;
  }

  bool is_untwisted() const {
    for (int mu = 0; mu < dim; ++mu)
      if (!axis_trivial(mu)) return false;
    for (int mu = 0; mu < dim; ++mu)
      for (int nu = 0; nu < dim; ++nu)
        if (chern[mu][nu] != 0) return false;
    return true;
  }

  void set_chern(int mu, int nu, int k) {
    chern[mu][nu] = k;
    chern[nu][mu] = -k;
  }
};

/// Clock matrix diag(1, w, w^2, ...) with w = exp(2 pi i / r).
inline CplxMatrix clock_matrix(int rank) {
  CplxMatrix c(rank);
  for (int j = 0; j < rank; ++j)
    c(j, j) = std::polar(1.0, 2.0 * std::numbers::pi * j / rank);
  return c;
}

/// Cyclic shift e_j -> e_{j+1 mod r}.
inline CplxMatrix shift_matrix(int rank) {
  CplxMatrix s(rank);
  for (int j = 0; j < rank; ++j) s((j + 1) % rank, j) = Cplx(1.0, 0.0);
  return s;
}

namespace detail {

template <typename S>
void check_commutator(const TwistCocycle<S>& t, int mu, int nu, double tol) {
  const SquareMatrix<S> k = t.g[mu] * t.g[nu] * inverse(t.g[mu]) * inverse(t.g[nu]);
  const double arg = 2.0 * std::numbers::pi * t.chern[mu][nu] / t.rank;
  SquareMatrix<S> expected(t.rank);
  if constexpr (scalar_traits<S>::is_complex) {
    const Cplx phase = std::polar(1.0, arg);
    for (int i = 0; i < t.rank; ++i) expected(i, i) = phase;
  } else {
    // A real bundle only admits real central phases (+-1).
    const double c = std::cos(arg), s = std::sin(arg);
    if (std::abs(s) > 1e-12)
      throw TopologyError("axis pair (" + std::to_string(mu) + "," +
                          std::to_string(nu) +
                          "): declared chern number has no real central phase");
    for (int i = 0; i < t.rank; ++i) expected(i, i) = c;
  }
  if (max_abs(k - expected) > tol)
    throw TopologyError(
        "axis pair (" + std::to_string(mu) + "," + std::to_string(nu) +
        "): twist commutator is not the declared central element");
}

}  // namespace detail

/// Validate a cocycle against a geometry: transition maps must lie in the
/// group and all pairwise commutators must be the declared central phases.
template <typename S>
void validate_cocycle(const LatticeGeometry& geom, const TwistCocycle<S>& t,
                      double tol = 1e-10) {
  if (t.dim != geom.dim())
    throw TopologyError("twist dimension does not match the geometry");
  if (static_cast<int>(t.g.size()) != t.dim)
    throw TopologyError("twist needs one transition map per axis");
  for (int mu = 0; mu < t.dim; ++mu) {
    if (t.g[mu].rank() != t.rank)
      throw TopologyError("transition map rank mismatch on axis " +
                          std::to_string(mu));
    if (unitary_defect(t.g[mu]) > tol)
      throw TopologyError("transition map on axis " + std::to_string(mu) +
                          " is not in the group");
  }
  for (int mu = 0; mu < t.dim; ++mu)
    for (int nu = mu + 1; nu < t.dim; ++nu) {
      if (t.chern[mu][nu] != -t.chern[nu][mu])
        throw TopologyError("chern numbers must be antisymmetric");
      detail::check_commutator(t, mu, nu, tol);
    }
  if constexpr (!scalar_traits<S>::is_complex) {
    for (int mu = 0; mu < t.dim; ++mu)
      for (int nu = mu + 1; nu < t.dim; ++nu)
        if (t.chern[mu][nu] * 2 % t.rank != 0)
          throw TopologyError("real bundle cannot carry this chern declaration");
  }
}

/// Build and validate the torus geometry plus its bundle twist in one go.
template <typename S>
LatticeGeometry build_torus(int n, const std::vector<int>& sizes, double spacing,
                            const TwistCocycle<S>& twist) {
  LatticeGeometry geom(n, sizes, spacing);
  validate_cocycle(geom, twist);
  return geom;
}

/// Constant harmonic representative of -2 pi c1(E): theta_{mu nu} =
/// -2 pi c_{mu nu} / (L_mu L_nu), one real number per ordered pair mu < nu.
template <typename S>
std::vector<double> harmonic_chern_form(const LatticeGeometry& geom,
                                        const TwistCocycle<S>& twist) {
  if constexpr (!scalar_traits<S>::is_complex)
    throw std::invalid_argument("harmonic chern form needs a complex bundle");
  std::vector<double> theta(geom.pair_count(), 0.0);
  for (int p = 0; p < geom.pair_count(); ++p) {
    const auto [mu, nu] = geom.pair_axes(p);
    theta[p] = -2.0 * std::numbers::pi * twist.chern[mu][nu] /
               (geom.extent(mu) * geom.extent(nu));
  }
  return theta;
}

}  // namespace ymlab
