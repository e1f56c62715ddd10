#pragma once

// Initial-data constructors: seeded random connections, the concentrated
// instanton-like bump used by the refinement experiments, and random smooth
// Hermitian metrics for the metric flow.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ymlab/eig.hpp"
#include "ymlab/field.hpp"
#include "ymlab/rng.hpp"

namespace ymlab {

struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename S>
SquareMatrix<S> random_skew(Rng& rng, int rank, double amplitude) {
  SquareMatrix<S> m(rank);
  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < rank; ++j) {
      if constexpr (scalar_traits<S>::is_complex) {
        m(i, j) = Cplx(amplitude * rng.symmetric(), amplitude * rng.symmetric());
      } else {
        m(i, j) = amplitude * rng.symmetric();
      }
    }
  return skew_project(m);
}

}  // namespace detail

/// Seed-deterministic connection with i.i.d. skew values of entry magnitude
/// <= amplitude.  Sites are filled in index order, axis fastest.
template <typename S>
ConnectionField<S> random_connection(const LatticeGeometry& geom,
                                     const TwistCocycle<S>& twist,
                                     double amplitude, std::uint64_t seed) {
  if (amplitude < 0.0) throw std::invalid_argument("amplitude must be >= 0");
  ConnectionField<S> a(geom, twist);
  Rng rng(seed);
  for (SiteIndex s = 0; s < geom.site_count(); ++s)
    for (int mu = 0; mu < geom.dim(); ++mu)
      a.set(s, mu, detail::random_skew<S>(rng, twist.rank, amplitude));
  return a;
}

namespace detail {

// 't Hooft symbols eta^a_{mu nu}, a in 0..2, mu,nu in 0..3.
inline double eta_symbol(int a, int mu, int nu) {
  if (mu < 3 && nu < 3)  // epsilon_{a mu nu} on {0,1,2}
    return 0.5 * (a - mu) * (mu - nu) * (nu - a);
  if (nu == 3 && mu < 3) return (a == mu) ? 1.0 : 0.0;
  if (mu == 3 && nu < 3) return (a == nu) ? -1.0 : 0.0;
  return 0.0;
}

// Smooth cutoff, identically 1 at 0, support in [0,2).
inline double bump_cutoff(double s) {
  if (s >= 2.0) return 0.0;
  const double q = s / 2.0;
  return std::exp(1.0 - 1.0 / (1.0 - q * q));
}

// su(2) generators -i sigma_a / 2 embedded in the top-left block.
inline CplxMatrix su2_generator(int rank, int a) {
  CplxMatrix t(rank);
  const Cplx mi(0.0, -0.5);
  switch (a) {
    case 0:
      t(0, 1) = mi;
      t(1, 0) = mi;
      break;
    case 1:
      t(0, 1) = Cplx(-0.5, 0.0);
      t(1, 0) = Cplx(0.5, 0.0);
      break;
    default:
      t(0, 0) = mi;
      t(1, 1) = -mi;
      break;
  }
  return t;
}

// so(3) generators (L_a)_{bc} = -eps_{abc} embedded in the top-left block.
inline RealMatrix so3_generator(int rank, int a) {
  RealMatrix t(rank);
  const int b = (a + 1) % 3, c = (a + 2) % 3;
  t(b, c) = -1.0;
  t(c, b) = 1.0;
  return t;
}

template <typename S>
SquareMatrix<S> bump_generator(int rank, int a) {
  if constexpr (scalar_traits<S>::is_complex)
    return su2_generator(rank, a);
  else
    return so3_generator(rank, a);
}

}  // namespace detail

/// Concentrated bump connection: a cut-off instanton-like profile
///   A_mu(x) = amplitude * f(rho/scale) * 2 eta^a_{mu nu} d_nu /
///             (rho4^2 + scale^2) * T_a
/// on the first four axes, zero elsewhere; d is the wrapped displacement from
/// the center.  Curvature is supported in the ball of radius 2*scale.  The
/// generators T_a span an su(2) block (complex kind) or an so(3) block (real
/// kind, rank >= 3).
template <typename S>
ConnectionField<S> concentrated_bump_connection(const LatticeGeometry& geom,
                                                const TwistCocycle<S>& twist,
                                                double scale,
                                                const std::vector<double>& center,
                                                double amplitude = 1.0) {
  const int n = geom.dim();
  if (n < 4) throw std::invalid_argument("bump needs dimension >= 4");
  const int min_rank = scalar_traits<S>::is_complex ? 2 : 3;
  if (twist.rank < min_rank)
    throw std::invalid_argument("bump needs rank >= " + std::to_string(min_rank) +
                                " for this scalar kind");
  if (static_cast<int>(center.size()) != n)
    throw std::invalid_argument("bump center does not match the dimension");
  const double a = geom.spacing();
  if (scale < 2.0 * a)
    throw ResolutionError("bump scale is below the lattice resolution floor (2a)");
  if (scale > 0.5 * geom.injectivity_radius())
    throw ResolutionError("bump support exceeds the injectivity ball");

  ConnectionField<S> field(geom, twist);
  SquareMatrix<S> gen[3] = {detail::bump_generator<S>(twist.rank, 0),
                            detail::bump_generator<S>(twist.rank, 1),
                            detail::bump_generator<S>(twist.rank, 2)};
  for (SiteIndex s = 0; s < geom.site_count(); ++s) {
    const Coords c = geom.coords(s);
    double d[kMaxDim] = {};
    double rho2 = 0.0, rho4sq = 0.0;
    for (int mu = 0; mu < n; ++mu) {
      double delta = c.x[mu] * a - center[mu];
      const double L = geom.extent(mu);
      delta -= L * std::round(delta / L);
      d[mu] = delta;
      rho2 += delta * delta;
      if (mu < 4) rho4sq += delta * delta;
    }
    const double f = detail::bump_cutoff(std::sqrt(rho2) / scale);
    if (f == 0.0) continue;
    const double denom = rho4sq + scale * scale;
    for (int mu = 0; mu < 4; ++mu) {
      SquareMatrix<S> v(twist.rank);
      for (int aa = 0; aa < 3; ++aa) {
        double coef = 0.0;
        for (int nu = 0; nu < 4; ++nu)
          coef += detail::eta_symbol(aa, mu, nu) * d[nu];
        if (coef != 0.0) v += gen[aa] * (2.0 * coef / denom);
      }
      field.set(s, mu, v * (amplitude * f));
    }
  }
  return field;
}

/// Random smooth positive Hermitian metric exp(P(x)) where P is a Hermitian
/// trigonometric polynomial with modes |k| <= kmax per axis.
inline HermitianMetricField random_smooth_metric(const LatticeGeometry& geom,
                                                 const TwistCocycle<Cplx>& twist,
                                                 double amplitude,
                                                 std::uint64_t seed,
                                                 int kmax = 2) {
  HermitianMetricField h(geom, twist);
  Rng rng(seed);
  const int n = geom.dim();
  const int r = twist.rank;
  // Draw mode coefficients first so the field is resolution independent.
  struct Mode {
    std::array<int, kMaxDim> k;
    CplxMatrix amp{1};
  };
  std::vector<Mode> modes;
  std::array<int, kMaxDim> k{};
  const auto advance = [&]() {
    for (int mu = 0; mu < n; ++mu) {
      if (++k[mu] <= kmax) return true;
      k[mu] = -kmax;
    }
    return false;
  };
  k.fill(-kmax);
  do {
    Mode m;
    m.k = k;
    m.amp = CplxMatrix(r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        m.amp(i, j) = Cplx(rng.symmetric(), rng.symmetric());
    modes.push_back(m);
  } while (advance());

  for (SiteIndex s = 0; s < geom.site_count(); ++s) {
    const Coords c = geom.coords(s);
    CplxMatrix p(r);
    for (const Mode& m : modes) {
      double phase = 0.0;
      for (int mu = 0; mu < n; ++mu)
        phase += 2.0 * std::numbers::pi * m.k[mu] * c.x[mu] / geom.size(mu);
      const Cplx e = std::polar(1.0, phase);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) p(i, j) += m.amp(i, j) * e;
    }
    p = hermitian_project(p);
    h.set(s, hermitian_function(p * amplitude,
                                [](double x) { return std::exp(x); }));
  }
  return h;
}

}  // namespace ymlab
