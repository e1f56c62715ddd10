#pragma once

// Hermitian metric flow on a flat complex torus (complex dimension 1 or 2):
// Chern connections, the slope, the metric evolution
//   H^-1 dH/dt = -2 (i Lambda F_H - lambda Id),
// the conformal normalization that pins i Lambda tr F to the slope, and the
// square-root complex-gauge bridge back to connection-side curvature.
//
// Conventions.  Complex axis j pairs real axes (2j, 2j+1), z_j = x_{2j} +
// i x_{2j+1}; the Kaehler form is sum_j dx_{2j} ^ dx_{2j+1} and the
// contraction is i Lambda F = sum_j i F_{2j,2j+1}.  The discrete H^-1 dH uses
// symmetric matrix-log ratios of neighboring metrics; this is second-order
// accurate and makes tr A_mu the exact centered difference of log det H, so
// the trace identity tr F_H = tr F_{H0} + dbar d log det h holds to roundoff
// on the lattice.  Steps are multiplicative, H <- H exp(dt K) with K the
// H-Hermitian flow velocity, which preserves Hermiticity, positivity, and
// det h exactly (up to roundoff) along the flow.
//
// Fields here live in the fixed holomorphic frame: Chern connection
// components are H-unitary rather than Id-skew, so they are carried as plain
// matrix-valued fields instead of ConnectionField's skew values, and norms
// are taken in the evolving metric.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "ymlab/calculus.hpp"
#include "ymlab/dft.hpp"
#include "ymlab/eig.hpp"
#include "ymlab/field.hpp"
#include "ymlab/flow.hpp"
#include "ymlab/parallel.hpp"

namespace ymlab {

struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Holomorphic structure dbar_E = dbar + a01 in the global frame.  a01 holds
/// one matrix component per complex axis; empty means a01 = 0.
struct HolomorphicStructure {
  LatticeGeometry geom;
  TwistCocycle<Cplx> twist;
  std::vector<SiteField<Cplx>> a01;

  HolomorphicStructure() = default;
  HolomorphicStructure(const LatticeGeometry& g, const TwistCocycle<Cplx>& t)
      : geom(g), twist(t) {
    if (g.dim() % 2 != 0)
      throw std::invalid_argument("complex torus needs even real dimension");
  }

  int complex_dim() const { return geom.dim() / 2; }
  bool a01_zero() const { return a01.empty(); }
};

namespace hym_detail {

template <typename FieldT>
SquareMatrix<Cplx> centered_diff(const FieldT& f, SiteIndex s, int mu) {
  const double inv2a = 0.5 / f.geom.spacing();
  return (shifted_value(f, s, mu, +1) - shifted_value(f, s, mu, -1)) * inv2a;
}

// log(H1^-1 H2) for positive Hermitian H1, H2 via the symmetric similarity
// H1^-1 H2 = H1^-1/2 (H1^-1/2 H2 H1^-1/2) H1^1/2; w = H1^1/2, wi = H1^-1/2.
inline SquareMatrix<Cplx> log_metric_ratio(const CplxMatrix& wi,
                                           const CplxMatrix& w,
                                           const CplxMatrix& h2) {
  return wi * log_positive(wi * h2 * wi) * w;
}

}  // namespace hym_detail

/// Integrability residual || dbar a01 + a01 ^ a01 ||_inf (identically zero in
/// complex dimension 1 and for a01 = 0).
inline double integrability_residual(const HolomorphicStructure& hol) {
  if (hol.a01_zero() || hol.complex_dim() < 2) return 0.0;
  const LatticeGeometry& geom = hol.geom;
  double worst = 0.0;
  for (SiteIndex s = 0; s < geom.site_count(); ++s) {
    const auto dbar = [&](int j, const SiteField<Cplx>& f) {
      return (hym_detail::centered_diff(f, s, 2 * j) +
              Cplx(0, 1) * hym_detail::centered_diff(f, s, 2 * j + 1)) *
             0.5;
    };
    const SquareMatrix<Cplx> r = dbar(0, hol.a01[1]) - dbar(1, hol.a01[0]) +
                                 comm(hol.a01[0].at(s), hol.a01[1].at(s));
    worst = std::max(worst, max_abs(r));
  }
  return worst;
}

inline void validate_holomorphic_structure(const HolomorphicStructure& hol,
                                           double tol = 1e-10) {
  if (!hol.a01_zero() && static_cast<int>(hol.a01.size()) != hol.complex_dim())
    throw std::invalid_argument("a01 needs one component per complex axis");
  const double res = integrability_residual(hol);
  if (res > tol)
    throw std::invalid_argument("holomorphic structure is not integrable: " +
                                std::to_string(res));
}

inline void check_positive_metric(const HermitianMetricField& h) {
  for (SiteIndex s = 0; s < h.geom.site_count(); ++s)
    if (min_eigenvalue(h.at(s)) <= 0.0)
      throw MetricError("metric is not positive definite at site " +
                        std::to_string(s));
}

/// Min eigenvalue of the metric over all sites (Gershgorin fast path).
inline double metric_min_eigenvalue(const HermitianMetricField& h,
                                    double exact_below = 0.0) {
  double global = std::numeric_limits<double>::infinity();
  const int r = h.twist.rank;
  for (SiteIndex s = 0; s < h.geom.site_count(); ++s) {
    const CplxMatrix m = h.at(s);
    double lower = std::numeric_limits<double>::infinity();
    for (int i = 0; i < r; ++i) {
      double row = m(i, i).real();
      for (int j = 0; j < r; ++j)
        if (j != i) row -= std::abs(m(i, j));
      lower = std::min(lower, row);
    }
    const double lam =
        (lower > exact_below) ? lower : min_eigenvalue(m);  // exact when needed
    global = std::min(global, lam);
  }
  return global;
}

/// Chern connection (real-axis components, H-unitary in the holomorphic
/// frame) together with its curvature including the sector background.
struct ChernData {
  VectorField<Cplx> conn;
  TwoFormField<Cplx> curv;
};

/// The unique H-unitary connection with (0,1)-part dbar_E:
///   A^{1,0}_j = (H^-1 del H)_j - H^-1 (a01_j)^dagger H,  A^{0,1}_j = a01_j,
/// assembled into real-axis components A_{2j} = A10_j + a01_j and
/// A_{2j+1} = i (A10_j - a01_j), plus its curvature.
inline ChernData chern_connection(const HermitianMetricField& h,
                                  const HolomorphicStructure& hol,
                                  int threads = 1) {
  const LatticeGeometry& geom = h.geom;
  const int n = geom.dim();
  const int m = n / 2;
  const int r = h.twist.rank;
  check_positive_metric(h);

  ChernData out;
  out.conn = VectorField<Cplx>(geom, h.twist);

  SiteField<Cplx> wfield(geom, h.twist), wifield(geom, h.twist);
  parallel_for(geom.site_count(), threads, [&](SiteIndex s) {
    const CplxMatrix hs = h.at(s);
    wfield.set(s, sqrt_positive(hs));
    wifield.set(s, inv_sqrt_positive(hs));
  });

  const double inv2a = 0.5 / geom.spacing();
  parallel_for(geom.site_count(), threads, [&](SiteIndex s) {
    const CplxMatrix w = wfield.at(s);
    const CplxMatrix wi = wifield.at(s);
    const CplxMatrix hs = h.at(s);
    const CplxMatrix hinv = wi * wi;
    std::array<SquareMatrix<Cplx>, 2 * kMaxDim> logd;
    for (int mu = 0; mu < n; ++mu) {
      const CplxMatrix hp = shifted_value(h, s, mu, +1);
      const CplxMatrix hm = shifted_value(h, s, mu, -1);
      // symmetric average of the one-sided log ratios:
      //   (log(H(x)^-1 H(x+)) + log(H(x-)^-1 H(x))) / 2a
      // with the backward ratio rewritten as -log(H(x)^-1 H(x-)), so both
      // logs share the cached H(x)^{+-1/2} factors.  Its trace is exactly the
      // centered difference of log det H.
      logd[mu] = (hym_detail::log_metric_ratio(wi, w, hp) -
                  hym_detail::log_metric_ratio(wi, w, hm)) *
                 inv2a;
    }
    for (int j = 0; j < m; ++j) {
      SquareMatrix<Cplx> a10 =
          (logd[2 * j] - Cplx(0, 1) * logd[2 * j + 1]) * 0.5;
      SquareMatrix<Cplx> a01(r);
      if (!hol.a01_zero()) {
        a01 = hol.a01[j].at(s);
        a10 -= hinv * adjoint(a01) * hs;
      }
      out.conn.set(s, 2 * j, a10 + a01);
      out.conn.set(s, 2 * j + 1, Cplx(0, 1) * (a10 - a01));
    }
  });

  const std::vector<SquareMatrix<Cplx>> bg = sector_background(geom, h.twist);
  out.curv = TwoFormField<Cplx>(geom, h.twist);
  parallel_for(geom.site_count(), threads, [&](SiteIndex s) {
    int p = 0;
    for (int mu = 0; mu < n; ++mu)
      for (int nu = mu + 1; nu < n; ++nu, ++p) {
        SquareMatrix<Cplx> v = (shifted_value(out.conn, s, nu, mu, +1) -
                                shifted_value(out.conn, s, nu, mu, -1)) *
                                   inv2a -
                               (shifted_value(out.conn, s, mu, nu, +1) -
                                shifted_value(out.conn, s, mu, nu, -1)) *
                                   inv2a +
                               comm(out.conn.at(s, mu), out.conn.at(s, nu));
        if (!bg.empty()) v += bg[p];
        out.curv.set(s, p, v);
      }
  });
  return out;
}

/// deg(E) from the declared chern numbers against the Kaehler pairing, then
/// lambda = 2 pi deg / (rank Vol).
inline double slope_lambda(const LatticeGeometry& geom,
                           const TwistCocycle<Cplx>& twist, int rank) {
  const int m = geom.dim() / 2;
  double deg = 0.0;
  for (int j = 0; j < m; ++j) {
    double transverse = 1.0;
    for (int mu = 0; mu < geom.dim(); ++mu)
      if (mu != 2 * j && mu != 2 * j + 1) transverse *= geom.extent(mu);
    deg += twist.chern[2 * j][2 * j + 1] * transverse;
  }
  return 2.0 * std::numbers::pi * deg / (rank * geom.volume());
}

/// i Lambda F at one site: sum_j i F_{2j, 2j+1}.
inline SquareMatrix<Cplx> lambda_contraction(const TwoFormField<Cplx>& f,
                                             SiteIndex s) {
  const int m = f.geom.dim() / 2;
  SquareMatrix<Cplx> k(f.twist.rank);
  for (int j = 0; j < m; ++j)
    k += Cplx(0, 1) * f.at(s, f.geom.pair_index(2 * j, 2 * j + 1));
  return k;
}

/// |phi|_W^2 = Re Tr(phi W^-1 phi^dagger W), the endomorphism norm in the
/// metric W.
inline double endo_norm2_in_metric(const SquareMatrix<Cplx>& phi,
                                   const CplxMatrix& w_inv, const CplxMatrix& w) {
  return scalar_traits<Cplx>::real(trace(phi * w_inv * adjoint(phi) * w));
}

/// ||F||_{L2}^2 in the evolving metric.
inline double curvature_energy_in_metric(const TwoFormField<Cplx>& f,
                                         const HermitianMetricField& h) {
  const LatticeGeometry& geom = f.geom;
  const double cell = std::pow(geom.spacing(), geom.dim());
  double acc = 0.0;
  for (SiteIndex s = 0; s < geom.site_count(); ++s) {
    const CplxMatrix hs = h.at(s);
    const CplxMatrix hinv = inverse_positive(hs);
    for (int p = 0; p < geom.pair_count(); ++p)
      acc += endo_norm2_in_metric(f.at(s, p), hinv, hs);
  }
  return acc * cell;
}

/// ||F^perp||_{L2} in the evolving metric (equal to the H0-norm of the
/// sigma-transported trace-free curvature).
inline double tracefree_l2_in_metric(const TwoFormField<Cplx>& f,
                                     const HermitianMetricField& h) {
  const LatticeGeometry& geom = f.geom;
  const double cell = std::pow(geom.spacing(), geom.dim());
  double acc = 0.0;
  for (SiteIndex s = 0; s < geom.site_count(); ++s) {
    const CplxMatrix hs = h.at(s);
    const CplxMatrix hinv = inverse_positive(hs);
    for (int p = 0; p < geom.pair_count(); ++p)
      acc += endo_norm2_in_metric(trace_free_part(f.at(s, p)), hinv, hs);
  }
  return std::sqrt(acc * cell);
}

/// sup over sites of |F|(x) in the evolving metric.
inline double sup_curvature_in_metric(const TwoFormField<Cplx>& f,
                                      const HermitianMetricField& h) {
  const LatticeGeometry& geom = f.geom;
  double best = 0.0;
  for (SiteIndex s = 0; s < geom.site_count(); ++s) {
    const CplxMatrix hs = h.at(s);
    const CplxMatrix hinv = inverse_positive(hs);
    double acc = 0.0;
    for (int p = 0; p < geom.pair_count(); ++p)
      acc += endo_norm2_in_metric(f.at(s, p), hinv, hs);
    best = std::max(best, acc);
  }
  return std::sqrt(best);
}

/// max_x |det(H0^-1 H) - 1|.
inline double det_h_drift(const HermitianMetricField& h,
                          const HermitianMetricField& h0) {
  double worst = 0.0;
  for (SiteIndex s = 0; s < h.geom.site_count(); ++s) {
    const double dh = determinant(h.at(s)).real();
    const double d0 = determinant(h0.at(s)).real();
    worst = std::max(worst, std::abs(dh / d0 - 1.0));
  }
  return worst;
}

struct ConformalNormalizeResult {
  HermitianMetricField h0;
  std::vector<double> phi;  // conformal exponent (zero on the solver kernel)
  double residual = 0.0;    // max |i Lambda tr F_{H0} - r lambda|
};

/// Conformal change H0 = e^phi K0 making i Lambda tr F constant (= r lambda),
/// via the spectral Poisson solve on the torus.  F^perp is untouched: the
/// change shifts the curvature by a multiple of the identity.
inline ConformalNormalizeResult conformal_normalize(
    const HermitianMetricField& k0, const HolomorphicStructure& hol,
    int threads = 1) {
  const LatticeGeometry& geom = k0.geom;
  const int r = k0.twist.rank;
  const double lambda = slope_lambda(geom, k0.twist, r);
  const ChernData chern = chern_connection(k0, hol, threads);

  std::vector<double> rhs(static_cast<size_t>(geom.site_count()));
  for (SiteIndex s = 0; s < geom.site_count(); ++s) {
    const double b =
        scalar_traits<Cplx>::real(trace(lambda_contraction(chern.curv, s)));
    rhs[static_cast<size_t>(s)] = (2.0 / r) * (b - r * lambda);
  }
  const LatticeDft dft(geom);
  ConformalNormalizeResult out;
  out.phi = poisson_solve_centered(dft, rhs);

  out.h0 = k0;
  for (SiteIndex s = 0; s < geom.site_count(); ++s)
    out.h0.set(s, k0.at(s) * std::exp(out.phi[static_cast<size_t>(s)]));

  const ChernData check = chern_connection(out.h0, hol, threads);
  double worst = 0.0;
  for (SiteIndex s = 0; s < geom.site_count(); ++s) {
    const double b =
        scalar_traits<Cplx>::real(trace(lambda_contraction(check.curv, s)));
    worst = std::max(worst, std::abs(b - r * lambda));
  }
  out.residual = worst;
  if (!(worst < 1e-6))
    throw SolverError("conformal normalization residual too large: " +
                      std::to_string(worst));
  return out;
}

struct TraceIdentityReport {
  double trace_residual = 0.0;       // tr F_H - tr F_{H0} - dbar del log det h
  double connection_residual = 0.0;  // A10_H - A10_{H0} - h^-1 del_{H0} h
  double curvature_residual = 0.0;   // F_H - F_{H0} - dbar_E(h^-1 del_{H0} h)
};

/// Residuals of the metric-change identities, max entry norm over sites.
/// The trace identity is exact for this discretization (roundoff only); the
/// matrix identities hold to O(a^2).
inline TraceIdentityReport trace_identity_residual(
    const ChernData& ch, const HermitianMetricField& h, const ChernData& ch0,
    const HermitianMetricField& h0, const HolomorphicStructure& hol) {
  const LatticeGeometry& geom = h.geom;
  const int n = geom.dim();
  const int m = n / 2;
  const int r = h.twist.rank;
  h.check_compatible(h0);

  const TwistCocycle<Cplx> scalar_twist = TwistCocycle<Cplx>::untwisted(n, 1);

  // scalar field log det h (det is conjugation invariant, so plain periodic)
  SiteField<Cplx> logdeth(geom, scalar_twist);
  for (SiteIndex s = 0; s < geom.site_count(); ++s) {
    SquareMatrix<Cplx> v(1);
    v(0, 0) = std::log(determinant(h.at(s)).real() /
                       determinant(h0.at(s)).real());
    logdeth.set(s, v);
  }

  // w = del(log det h) in real components, then G = d w (its dbar-part; the
  // del-part cancels because centered differences commute)
  VectorField<Cplx> w(geom, scalar_twist);
  for (SiteIndex s = 0; s < geom.site_count(); ++s)
    for (int j = 0; j < m; ++j) {
      const SquareMatrix<Cplx> dj =
          (hym_detail::centered_diff(logdeth, s, 2 * j) -
           Cplx(0, 1) * hym_detail::centered_diff(logdeth, s, 2 * j + 1)) *
          0.5;
      w.set(s, 2 * j, dj);
      w.set(s, 2 * j + 1, Cplx(0, 1) * dj);
    }

  TraceIdentityReport rep;
  const double inv2a = 0.5 / geom.spacing();
  for (SiteIndex s = 0; s < geom.site_count(); ++s) {
    int p = 0;
    for (int mu = 0; mu < n; ++mu)
      for (int nu = mu + 1; nu < n; ++nu, ++p) {
        const Cplx g = ((shifted_value(w, s, nu, mu, +1) -
                         shifted_value(w, s, nu, mu, -1)) *
                            inv2a -
                        (shifted_value(w, s, mu, nu, +1) -
                         shifted_value(w, s, mu, nu, -1)) *
                            inv2a)(0, 0);
        const Cplx lhs = trace(ch.curv.at(s, p)) - trace(ch0.curv.at(s, p));
        rep.trace_residual = std::max(rep.trace_residual, std::abs(lhs - g));
      }
  }

  // endomorphism h as a field (transports by conjugation like the metrics)
  SiteField<Cplx> hfield(geom, h.twist);
  for (SiteIndex s = 0; s < geom.site_count(); ++s)
    hfield.set(s, inverse_positive(h0.at(s)) * h.at(s));

  const auto a10_of = [](const ChernData& cd, SiteIndex s, int j) {
    return (cd.conn.at(s, 2 * j) - Cplx(0, 1) * cd.conn.at(s, 2 * j + 1)) * 0.5;
  };

  // q_k = h^-1 (del_{H0} h)_k, one component per complex axis
  std::vector<SiteField<Cplx>> q(m, SiteField<Cplx>(geom, h.twist));
  for (SiteIndex s = 0; s < geom.site_count(); ++s) {
    const SquareMatrix<Cplx> hx = hfield.at(s);
    const SquareMatrix<Cplx> hxi = inverse(hx);
    for (int k = 0; k < m; ++k) {
      const SquareMatrix<Cplx> dh =
          (hym_detail::centered_diff(hfield, s, 2 * k) -
           Cplx(0, 1) * hym_detail::centered_diff(hfield, s, 2 * k + 1)) *
          0.5;
      const SquareMatrix<Cplx> a0 = a10_of(ch0, s, k);
      q[k].set(s, hxi * (dh + a0 * hx - hx * a0));
    }
  }

  for (SiteIndex s = 0; s < geom.site_count(); ++s)
    for (int k = 0; k < m; ++k) {
      const SquareMatrix<Cplx> res =
          a10_of(ch, s, k) - a10_of(ch0, s, k) - q[k].at(s);
      rep.connection_residual = std::max(rep.connection_residual, max_abs(res));
    }

  // curvature identity on each (dzbar_j, dz_k) component
  const auto f_component = [&](const TwoFormField<Cplx>& fa,
                               const TwoFormField<Cplx>& fb, SiteIndex s,
                               int mu, int nu) {
    if (mu == nu) return SquareMatrix<Cplx>(r);
    double sign = 1.0;
    int a = mu, b = nu;
    if (a > b) {
      std::swap(a, b);
      sign = -1.0;
    }
    const int p = geom.pair_index(a, b);
    return (fa.at(s, p) - fb.at(s, p)) * sign;
  };
  for (SiteIndex s = 0; s < geom.site_count(); ++s)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        SquareMatrix<Cplx> dq =
            (hym_detail::centered_diff(q[k], s, 2 * j) +
             Cplx(0, 1) * hym_detail::centered_diff(q[k], s, 2 * j + 1)) *
            0.5;
        if (!hol.a01_zero()) dq += comm(hol.a01[j].at(s), q[k].at(s));
        // F(dzbar_j, dz_k) = (Ftilde_{2j,2k} - i Ftilde_{2j,2k+1}
        //                     + i Ftilde_{2j+1,2k} + Ftilde_{2j+1,2k+1}) / 4
        const SquareMatrix<Cplx> fc =
            (f_component(ch.curv, ch0.curv, s, 2 * j, 2 * k) -
             Cplx(0, 1) * f_component(ch.curv, ch0.curv, s, 2 * j, 2 * k + 1) +
             Cplx(0, 1) * f_component(ch.curv, ch0.curv, s, 2 * j + 1, 2 * k) +
             f_component(ch.curv, ch0.curv, s, 2 * j + 1, 2 * k + 1)) *
            0.25;
        rep.curvature_residual =
            std::max(rep.curvature_residual, max_abs(dq - fc));
      }
  return rep;
}

inline TraceIdentityReport trace_identity_residual(
    const HermitianMetricField& h, const HermitianMetricField& h0,
    const HolomorphicStructure& hol, int threads = 1) {
  const ChernData ch = chern_connection(h, hol, threads);
  const ChernData ch0 = chern_connection(h0, hol, threads);
  return trace_identity_residual(ch, h, ch0, h0, hol);
}

struct YmFromHymResult {
  TwoFormField<Cplx> f_a;  // sigma F_H sigma^-1, the connection-side curvature
  double trace_shift_inf = 0.0;  // max |tr F_A - tr F_{H0}|
  double tracefree_l2 = 0.0;     // ||F_A^perp||_{L2, H0}
};

/// Complex-gauge bridge: sigma = h^{1/2} (the positive root with
/// sigma^{*H0} sigma = h) conjugates the metric-side curvature into the
/// Yang-Mills trajectory curvature F_{A(t)} = sigma F_H sigma^-1, compatible
/// with the fixed metric H0.
inline YmFromHymResult ym_from_hym(const HermitianMetricField& h,
                                   const HermitianMetricField& h0,
                                   const HolomorphicStructure& hol,
                                   int threads = 1) {
  const LatticeGeometry& geom = h.geom;
  const ChernData ch = chern_connection(h, hol, threads);
  const ChernData ch0 = chern_connection(h0, hol, threads);

  YmFromHymResult out;
  out.f_a = TwoFormField<Cplx>(geom, h.twist);
  parallel_for(geom.site_count(), threads, [&](SiteIndex s) {
    const CplxMatrix w = sqrt_positive(h0.at(s));
    const CplxMatrix wi = inv_sqrt_positive(h0.at(s));
    const CplxMatrix mmat = wi * h.at(s) * wi;  // H0^-1/2 H H0^-1/2
    const CplxMatrix sigma = wi * sqrt_positive(mmat) * w;
    const CplxMatrix sigma_inv = wi * inv_sqrt_positive(mmat) * w;
    for (int p = 0; p < geom.pair_count(); ++p)
      out.f_a.set(s, p, sigma * ch.curv.at(s, p) * sigma_inv);
  });

  for (SiteIndex s = 0; s < geom.site_count(); ++s)
    for (int p = 0; p < geom.pair_count(); ++p)
      out.trace_shift_inf =
          std::max(out.trace_shift_inf,
                   std::abs(trace(out.f_a.at(s, p)) - trace(ch0.curv.at(s, p))));
  out.tracefree_l2 = tracefree_l2_in_metric(out.f_a, h0);
  return out;
}

// ---------------------------------------------------------------------------
// Metric flow integration

struct HymConfig {
  double dt_init = 1e-4;
  double dt_min = 1e-12;
  double dt_max = 0.05;
  double safety = 0.9;
  double tolerance = 1e-6;
  double t_end = 1.0;
  double gtol = 1e-10;      // convergence: max entry of i Lambda F - lambda Id
  double eig_floor = 1e-12;  // positivity floor for acceptance
  int threads = 1;

  void validate() const {
    if (!(dt_min <= dt_init && dt_init <= dt_max))
      throw std::invalid_argument("need dt_min <= dt_init <= dt_max");
    if (!(safety > 0.0 && safety <= 1.0))
      throw std::invalid_argument("safety must be in (0,1]");
    if (tolerance <= 0.0) throw std::invalid_argument("tolerance must be > 0");
  }
};

struct HymState {
  double t = 0.0;
  double dt = 0.0;
  HermitianMetricField h;   // H(t)
  HermitianMetricField h0;  // reference metric (det h bookkeeping)
  ChernData chern;          // cached at h
  double lambda = 0.0;
  double deviation_inf = 0.0;  // max entry of i Lambda F - lambda Id
  double energy = 0.0;         // ||F_H||_{L2,H}^2
  double tracefree = 0.0;      // ||F^perp||_{L2,H}
  double det_drift = 0.0;      // max |det h - 1|
  double min_eig = 0.0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;

  static HymState initial(HermitianMetricField start,
                          const HolomorphicStructure& hol,
                          const HymConfig& cfg) {
    cfg.validate();
    validate_holomorphic_structure(hol);
    HymState st;
    st.h = start;
    st.h0 = std::move(start);
    st.dt = cfg.dt_init;
    st.lambda = slope_lambda(st.h.geom, st.h.twist, st.h.twist.rank);
    st.refresh(hol, cfg.threads);
    return st;
  }

  void refresh(const HolomorphicStructure& hol, int threads) {
    chern = chern_connection(h, hol, threads);
    double dev = 0.0;
    for (SiteIndex s = 0; s < h.geom.site_count(); ++s) {
      SquareMatrix<Cplx> k = lambda_contraction(chern.curv, s);
      for (int i = 0; i < h.twist.rank; ++i) k(i, i) -= lambda;
      dev = std::max(dev, max_abs(k));
    }
    deviation_inf = dev;
    energy = curvature_energy_in_metric(chern.curv, h);
    tracefree = tracefree_l2_in_metric(chern.curv, h);
    det_drift = det_h_drift(h, h0);
    min_eig = metric_min_eigenvalue(h);
  }
};

/// One adaptive multiplicative step of the metric flow, Heun-type:
///   predictor H1 = H exp(dt K(H)), corrector H+ = H exp(dt (K(H)+K(H1))/2)
/// with K = -2 (i Lambda F_H - lambda Id) projected onto its H-Hermitian
/// part.  The projection is an O(a^2)-consistent modification (the continuum
/// velocity is H-Hermitian) that makes H exp(dt K) exactly Hermitian and
/// positive and keeps tr K exactly real, so log det h obeys the exact
/// discrete law v -> v + dt tr K and det h = 1 is preserved to roundoff.
/// The eigenvalue floor stays as a guard on acceptance.
inline StepStatus hym_step(HymState& st, const HolomorphicStructure& hol,
                           const HymConfig& cfg) {
  const LatticeGeometry& geom = st.h.geom;
  const int r = st.h.twist.rank;
  const int threads = cfg.threads;

  if (cfg.gtol > 0.0 && st.deviation_inf < cfg.gtol) return StepStatus::critical;

  // velocity at the base point, projected H-Hermitian: (K + H^-1 K^dag H)/2
  const auto velocity = [&](const ChernData& chern, const HermitianMetricField& h,
                            SiteField<Cplx>& out) {
    parallel_for(geom.site_count(), threads, [&](SiteIndex s) {
      SquareMatrix<Cplx> k = lambda_contraction(chern.curv, s);
      for (int i = 0; i < r; ++i) k(i, i) -= st.lambda;
      k *= -2.0;
      const CplxMatrix hs = h.at(s);
      const CplxMatrix hinv = inverse_positive(hs);
      out.set(s, (k + hinv * adjoint(k) * hs) * 0.5);
    });
  };

  SiteField<Cplx> k1(geom, st.h.twist);
  velocity(st.chern, st.h, k1);
  const double h_scale = 1.0 + raw_max_abs(st.h);

  while (true) {
    const double dt = st.dt;
    HermitianMetricField h1(geom, st.h.twist);
    parallel_for(geom.site_count(), threads, [&](SiteIndex s) {
      h1.set(s, hermitian_project(st.h.at(s) * exp_dense(k1.at(s) * dt)));
    });
    bool ok = metric_min_eigenvalue(h1, cfg.eig_floor) >= cfg.eig_floor;
    double err_rel = 0.0;
    HermitianMetricField hc(geom, st.h.twist);
    if (ok) {
      const ChernData chern1 = chern_connection(h1, hol, threads);
      SiteField<Cplx> k2(geom, st.h.twist);
      velocity(chern1, st.h, k2);  // projected at the base metric
      double diff = 0.0;
      for (SiteIndex s = 0; s < geom.site_count(); ++s)
        diff = std::max(diff, max_abs(k2.at(s) - k1.at(s)));
      parallel_for(geom.site_count(), threads, [&](SiteIndex s) {
        hc.set(s, hermitian_project(
                      st.h.at(s) *
                      exp_dense((k1.at(s) + k2.at(s)) * (0.5 * dt))));
      });
      err_rel = 0.5 * dt * diff / h_scale;
      ok = err_rel <= cfg.tolerance &&
           metric_min_eigenvalue(hc, cfg.eig_floor) >= cfg.eig_floor;
    }
    if (ok) {
      st.h = std::move(hc);
      st.t += dt;
      ++st.accepted;
      st.refresh(hol, threads);
      const double grow =
          err_rel > 0.0
              ? std::clamp(cfg.safety * std::sqrt(cfg.tolerance / err_rel), 0.3,
                           2.0)
              : 1.0 + cfg.safety;
      st.dt = std::clamp(dt * grow, cfg.dt_min, cfg.dt_max);
      return StepStatus::accepted;
    }
    ++st.rejected;
    st.dt = 0.5 * dt;
    if (st.dt < cfg.dt_min) {
      st.dt = dt;
      return StepStatus::stiff_stop;
    }
  }
}

struct HymRunStats {
  double max_tracefree_step_increase = 0.0;
  double max_det_drift = 0.0;
  double min_eig_overall = std::numeric_limits<double>::infinity();
  std::uint64_t samples = 0;
};

using HymSampleHook = std::function<std::optional<FlowOutcome>(const HymState&)>;

/// Integrate the metric flow to t_end, with the same outcome semantics as the
/// connection-side run loop.
inline FlowOutcome run_hym_flow(HymState& st, const HolomorphicStructure& hol,
                                const HymConfig& cfg, int cadence,
                                const HymSampleHook& sample,
                                HymRunStats* stats = nullptr) {
  cfg.validate();
  if (cadence < 1) cadence = 1;
  HymRunStats local;
  HymRunStats& rs = stats ? *stats : local;

  const auto note = [&]() {
    rs.max_det_drift = std::max(rs.max_det_drift, st.det_drift);
    rs.min_eig_overall = std::min(rs.min_eig_overall, st.min_eig);
  };
  const auto emit = [&]() -> std::optional<FlowOutcome> {
    ++rs.samples;
    return sample ? sample(st) : std::nullopt;
  };

  note();
  if (auto stop = emit()) return *stop;

  std::uint64_t since_sample = 0;
  while (st.t < cfg.t_end) {
    const double tracefree_before = st.tracefree;
    const StepStatus status = hym_step(st, hol, cfg);
    if (status == StepStatus::critical) {
      emit();
      return FlowOutcome::converged;
    }
    note();
    rs.max_tracefree_step_increase = std::max(
        rs.max_tracefree_step_increase, st.tracefree - tracefree_before);
    if (status == StepStatus::stiff_stop) {
      emit();
      return FlowOutcome::stiff_stop;
    }
    ++since_sample;
    if (since_sample >= static_cast<std::uint64_t>(cadence) ||
        st.t >= cfg.t_end) {
      since_sample = 0;
      if (auto stop = emit()) return *stop;
    }
  }
  if (since_sample != 0) emit();
  if (cfg.gtol > 0.0 && st.deviation_inf < cfg.gtol) return FlowOutcome::converged;
  return FlowOutcome::undecided;
}

}  // namespace ymlab
