#pragma once

// Lattice field containers over a twisted torus bundle.  Storage is a packed
// flat scalar array, site-major with the component index next and the r x r
// fiber entries fastest:
//   1-forms:  raw[(site * n + mu) * r^2 ...]
//   2-forms:  raw[(site * npairs + pair_index(mu,nu)) * r^2 ...]  (mu < nu)
//   0-forms:  raw[site * r^2 ...]
// Accessors copy fiber values in and out; per-fiber copies are at most 8x8.
// Values transport across a torus boundary by conjugation with the axis
// transition map (all stored representations are conjugation-equivariant;
// constant transition maps make the connection's inhomogeneous term vanish).

#include <cmath>
#include <utility>
#include <vector>

#include "ymlab/lattice.hpp"
#include "ymlab/matrix.hpp"
#include "ymlab/twist.hpp"

namespace ymlab {

namespace detail {

template <typename S>
struct FieldBase {
  LatticeGeometry geom;
  TwistCocycle<S> twist;
  std::vector<S> raw;

  int rank() const { return twist.rank; }

  SquareMatrix<S> get(size_t slot) const {
    const int r = twist.rank;
    SquareMatrix<S> m(r);
    const S* src = raw.data() + slot * r * r;
    for (int i = 0; i < r * r; ++i) m.data()[i] = src[i];
    return m;
  }

  void put(size_t slot, const SquareMatrix<S>& m) {
    const int r = twist.rank;
    S* dst = raw.data() + slot * r * r;
    for (int i = 0; i < r * r; ++i) dst[i] = m.data()[i];
  }

  void check_compatible(const FieldBase& o) const {
    if (geom != o.geom || twist.rank != o.twist.rank)
      throw std::invalid_argument("fields live on different geometries");
  }

  // Whole-field linear algebra on the packed storage (integrator stages).
  void axpy(double alpha, const FieldBase& x) {
    check_compatible(x);
    for (size_t i = 0; i < raw.size(); ++i) raw[i] += alpha * x.raw[i];
  }
  void scale(double alpha) {
    for (auto& v : raw) v *= alpha;
  }
};

}  // namespace detail

/// Matrix-valued 1-form: one fiber value per (site, axis).
template <typename S>
struct VectorField : detail::FieldBase<S> {
  VectorField() = default;
  VectorField(const LatticeGeometry& g, const TwistCocycle<S>& t) {
    this->geom = g;
    this->twist = t;
    this->raw.assign(static_cast<size_t>(g.site_count()) * g.dim() * t.rank *
                         t.rank,
                     S{});
  }
  size_t slot(SiteIndex s, int mu) const {
    return static_cast<size_t>(s) * this->geom.dim() + mu;
  }
  SquareMatrix<S> at(SiteIndex s, int mu) const { return this->get(slot(s, mu)); }
  void set(SiteIndex s, int mu, const SquareMatrix<S>& m) {
    this->put(slot(s, mu), m);
  }
};

/// Matrix-valued 2-form: one fiber value per (site, ordered pair mu < nu).
template <typename S>
struct PairField : detail::FieldBase<S> {
  PairField() = default;
  PairField(const LatticeGeometry& g, const TwistCocycle<S>& t) {
    this->geom = g;
    this->twist = t;
    this->raw.assign(static_cast<size_t>(g.site_count()) * g.pair_count() *
                         t.rank * t.rank,
                     S{});
  }
  size_t slot(SiteIndex s, int p) const {
    return static_cast<size_t>(s) * this->geom.pair_count() + p;
  }
  SquareMatrix<S> at(SiteIndex s, int p) const { return this->get(slot(s, p)); }
  void set(SiteIndex s, int p, const SquareMatrix<S>& m) {
    this->put(slot(s, p), m);
  }
};

/// Matrix-valued 0-form: one fiber value per site.
template <typename S>
struct SiteField : detail::FieldBase<S> {
  SiteField() = default;
  SiteField(const LatticeGeometry& g, const TwistCocycle<S>& t) {
    this->geom = g;
    this->twist = t;
    this->raw.assign(static_cast<size_t>(g.site_count()) * t.rank * t.rank, S{});
  }
  SquareMatrix<S> at(SiteIndex s) const {
    return this->get(static_cast<size_t>(s));
  }
  void set(SiteIndex s, const SquareMatrix<S>& m) {
    this->put(static_cast<size_t>(s), m);
  }
};

// Spec-facing roles of the generic containers.
template <typename S>
using ConnectionField = VectorField<S>;  // skew values A_mu(x)
template <typename S>
using TwoFormField = PairField<S>;  // F_{mu nu}(x), mu < nu stored
template <typename S>
using GaugeFieldU = SiteField<S>;  // group-valued u(x)
using HermitianMetricField = SiteField<Cplx>;  // positive H(x)

/// Conjugation transport across the axis-mu boundary: v -> g v g^-1 going up,
/// v -> g^-1 v g coming down.  Transition maps are unitary, so the inverse is
/// the adjoint.
template <typename S>
SquareMatrix<S> transport(const TwistCocycle<S>& twist, int mu, int wrap,
                          const SquareMatrix<S>& v) {
  if (wrap == 0 || twist.axis_trivial(mu)) return v;
  const SquareMatrix<S>& g = twist.g[mu];
  if (wrap > 0) return g * v * adjoint(g);
  return adjoint(g) * v * g;
}

/// Value of a 1-form component at x +/- a e_mu with the wrap applied.
template <typename S>
SquareMatrix<S> shifted_value(const VectorField<S>& f, SiteIndex s, int comp,
                              int mu, int dir) {
  if (mu < 0 || mu >= f.geom.dim()) throw std::invalid_argument("bad shift axis");
  int wrap = 0;
  const SiteIndex t = f.geom.neighbor(s, mu, dir, &wrap);
  return transport(f.twist, mu, wrap, f.at(t, comp));
}

/// Value of a 2-form component at x +/- a e_mu with the wrap applied.
template <typename S>
SquareMatrix<S> shifted_value(const PairField<S>& f, SiteIndex s, int pair,
                              int mu, int dir) {
  if (mu < 0 || mu >= f.geom.dim()) throw std::invalid_argument("bad shift axis");
  int wrap = 0;
  const SiteIndex t = f.geom.neighbor(s, mu, dir, &wrap);
  return transport(f.twist, mu, wrap, f.at(t, pair));
}

/// Value of a 0-form at x +/- a e_mu with the wrap applied.
template <typename S>
SquareMatrix<S> shifted_value(const SiteField<S>& f, SiteIndex s, int mu,
                              int dir) {
  if (mu < 0 || mu >= f.geom.dim()) throw std::invalid_argument("bad shift axis");
  int wrap = 0;
  const SiteIndex t = f.geom.neighbor(s, mu, dir, &wrap);
  return transport(f.twist, mu, wrap, f.at(t));
}

/// Max entry magnitude over the whole field.
template <typename S>
double raw_max_abs(const detail::FieldBase<S>& f) {
  double m = 0.0;
  for (const auto& v : f.raw) m = std::max(m, scalar_traits<S>::abs2(v));
  return std::sqrt(m);
}

/// Max skew defect over all stored values (invariant check helper).
template <typename S>
double field_skew_defect(const VectorField<S>& f) {
  double d = 0.0;
  for (SiteIndex s = 0; s < f.geom.site_count(); ++s)
    for (int mu = 0; mu < f.geom.dim(); ++mu)
      d = std::max(d, skew_defect(f.at(s, mu)));
  return d;
}

/// L2 norm squared with the lattice measure a^n.
template <typename S>
double l2_norm2(const detail::FieldBase<S>& f) {
  const double w = std::pow(f.geom.spacing(), f.geom.dim());
  double s = 0.0;
  for (const auto& v : f.raw) s += scalar_traits<S>::abs2(v);
  return s * w;
}

/// L2 pairing with the lattice measure a^n.
template <typename S>
double l2_inner(const detail::FieldBase<S>& f, const detail::FieldBase<S>& g) {
  f.check_compatible(g);
  const double w = std::pow(f.geom.spacing(), f.geom.dim());
  double s = 0.0;
  for (size_t i = 0; i < f.raw.size(); ++i)
    s += scalar_traits<S>::real(f.raw[i] * scalar_traits<S>::conj(g.raw[i]));
  return s * w;
}

}  // namespace ymlab
