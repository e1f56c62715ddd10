#pragma once

// Diagnostic quantities and decision predicates: local parabolic energies and
// the eps-regularity implication, concentration profiles over shrinking
// balls, the blow-up proxy detector, harmonic-form deviation, and the
// energy-gap test applied to near-critical states.

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "ymlab/calculus.hpp"
#include "ymlab/dft.hpp"

namespace ymlab {

struct CoverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MonitorConfig {
  double eps0 = 0.02;    // premise threshold of the eps-regularity test
  double delta0 = 0.1;   // in (0, 1/4)
  double sigma1 = 0.01;  // concentration threshold (default eps0 / 2)
  std::vector<double> radii;  // profile radii, each <= injectivity radius
  int cadence = 10;           // accepted steps between monitor evaluations
  int window = 10;            // detector persistence (consecutive samples)
  double detector_sup_fraction = 0.5;  // fraction of the curvature bound
  double gtol = 1e-10;
  double flat_tol = 1e-4;

  void validate(const LatticeGeometry& geom) const {
    if (!(delta0 > 0.0 && delta0 < 0.25))
      throw std::invalid_argument("delta0 must lie in (0, 1/4)");
    if (eps0 <= 0.0 || sigma1 <= 0.0)
      throw std::invalid_argument("eps0 and sigma1 must be positive");
    for (double r : radii)
      if (r <= 0.0 || r > geom.injectivity_radius())
        throw std::invalid_argument(
            "profile radii must lie in (0, injectivity radius]");
    if (window < 1 || cadence < 1)
      throw std::invalid_argument("cadence and window must be >= 1");
  }

  double min_radius() const {
    double m = 0.0;
    for (double r : radii) m = (m == 0.0) ? r : std::min(m, r);
    return m;
  }
};

/// Time-stamped |F|^2 density snapshots spanning a parabolic window.  Old
/// snapshots are evicted once they fall behind the configured span.
class TrajectoryArchive {
 public:
  TrajectoryArchive(const LatticeGeometry& geom, double keep_span)
      : geom_(geom), keep_span_(keep_span) {}

  void push(double t, std::vector<double> density) {
    snaps_.push_back({t, std::move(density)});
    while (snaps_.size() > 2 && snaps_.front().t < t - keep_span_)
      snaps_.pop_front();
  }

  bool covers(double t_lo, double t_hi) const {
    return !snaps_.empty() && snaps_.front().t <= t_lo + 1e-14 &&
           snaps_.back().t + 1e-14 >= t_hi;
  }

  double min_time() const { return snaps_.empty() ? 0.0 : snaps_.front().t; }
  double max_time() const { return snaps_.empty() ? 0.0 : snaps_.back().t; }
  size_t size() const { return snaps_.size(); }

  struct Snapshot {
    double t;
    std::vector<double> density;
  };
  const std::deque<Snapshot>& snapshots() const { return snaps_; }
  const LatticeGeometry& geometry() const { return geom_; }

 private:
  LatticeGeometry geom_;
  double keep_span_;
  std::deque<Snapshot> snaps_;
};

namespace detail {

inline std::vector<SiteIndex> ball_sites(const LatticeGeometry& geom,
                                         SiteIndex center, double radius) {
  std::vector<SiteIndex> out;
  for (SiteIndex s = 0; s < geom.site_count(); ++s)
    if (geom.torus_distance(s, center) <= radius) out.push_back(s);
  return out;
}

// Piecewise-linear interpolation of a snapshot scalar g(t).
inline double interp(const std::deque<TrajectoryArchive::Snapshot>& snaps,
                     const std::vector<double>& values, double t) {
  if (t <= snaps.front().t) return values.front();
  if (t >= snaps.back().t) return values.back();
  for (size_t i = 1; i < snaps.size(); ++i) {
    if (snaps[i].t >= t) {
      const double t0 = snaps[i - 1].t, t1 = snaps[i].t;
      const double w = (t1 > t0) ? (t - t0) / (t1 - t0) : 0.0;
      return values[i - 1] * (1.0 - w) + values[i] * w;
    }
  }
  return values.back();
}

}  // namespace detail

/// R^{2-n} * integral of |F|^2 over the parabolic cylinder
/// P_R(x0,t0) = B_R(x0) x [t0 - R^2, t0 + R^2], trapezoidal in time.
inline double local_parabolic_energy(const TrajectoryArchive& archive,
                                     SiteIndex x0, double t0, double radius) {
  const LatticeGeometry& geom = archive.geometry();
  const double rsq = radius * radius;
  const double t_lo = t0 - rsq, t_hi = t0 + rsq;
  if (radius <= 0.0) throw std::invalid_argument("radius must be positive");
  if (radius > geom.injectivity_radius() + 1e-14 ||
      (t0 > 0.0 && radius > 0.5 * std::sqrt(t0) + 1e-14))
    throw std::invalid_argument("radius violates R < min(i_M, sqrt(t0)/2)");
  if (!archive.covers(t_lo, t_hi))
    throw CoverageError("archive does not span the parabolic window");

  const auto& snaps = archive.snapshots();
  const std::vector<SiteIndex> ball = detail::ball_sites(geom, x0, radius);
  std::vector<double> g(snaps.size());
  const double cell = std::pow(geom.spacing(), geom.dim());
  for (size_t i = 0; i < snaps.size(); ++i) {
    double acc = 0.0;
    for (SiteIndex s : ball) acc += snaps[i].density[static_cast<size_t>(s)];
    g[i] = acc * cell;
  }
  // trapezoid over [t_lo, t_hi] of the sampled ball energy
  double integral = 0.0;
  double prev_t = t_lo;
  double prev_g = detail::interp(snaps, g, t_lo);
  for (size_t i = 0; i < snaps.size(); ++i) {
    const double t = snaps[i].t;
    if (t <= t_lo || t >= t_hi) continue;
    integral += 0.5 * (prev_g + g[i]) * (t - prev_t);
    prev_t = t;
    prev_g = g[i];
  }
  const double end_g = detail::interp(snaps, g, t_hi);
  integral += 0.5 * (prev_g + end_g) * (t_hi - prev_t);
  return std::pow(radius, 2 - geom.dim()) * integral;
}

struct EpsRegularityReport {
  double premise_value = 0.0;   // Eq(2.14)-style scaled parabolic energy
  bool premise_holds = false;   // premise_value < eps0
  double sup_value = 0.0;       // sup of |F|^2 over the delta-cylinder
  double bound = 0.0;           // 16 (delta R)^{-4}
  bool conclusion_holds = false;
  bool consistent = true;  // false only on premise-true / conclusion-false
  double margin = 0.0;     // bound - sup_value
};

/// Evaluate the small-energy implication:
///   premise:    R^{2-n} int_{P_R} |F|^2 < eps0
///   conclusion: sup_{P_{delta R}} |F|^2 <= 16 (delta R)^{-4}.
inline EpsRegularityReport epsilon_regularity_check(
    const TrajectoryArchive& archive, SiteIndex x0, double t0, double radius,
    double delta, const MonitorConfig& cfg) {
  if (!(delta > 0.0 && delta < cfg.delta0))
    throw std::invalid_argument("delta must lie in (0, delta0)");
  EpsRegularityReport rep;
  rep.premise_value = local_parabolic_energy(archive, x0, t0, radius);
  rep.premise_holds = rep.premise_value < cfg.eps0;

  const LatticeGeometry& geom = archive.geometry();
  const double dr = delta * radius;
  const double t_lo = t0 - dr * dr, t_hi = t0 + dr * dr;
  const std::vector<SiteIndex> ball = detail::ball_sites(geom, x0, dr);
  double sup = 0.0;
  for (const auto& snap : archive.snapshots()) {
    if (snap.t < t_lo - 1e-14 || snap.t > t_hi + 1e-14) continue;
    for (SiteIndex s : ball)
      sup = std::max(sup, snap.density[static_cast<size_t>(s)]);
  }
  rep.sup_value = sup;
  rep.bound = 16.0 / (dr * dr * dr * dr);
  rep.conclusion_holds = rep.sup_value <= rep.bound;
  rep.margin = rep.bound - rep.sup_value;
  rep.consistent = !(rep.premise_holds && !rep.conclusion_holds);
  return rep;
}

/// Ball sums over every center via circular convolution with the ball
/// indicator (exact up to roundoff); profile value at radius r is
///   r^{4-n} * max_centers sum_{x in B_r(c)} |F|^2(x) a^n.
class ConcentrationProfiler {
 public:
  ConcentrationProfiler(const LatticeGeometry& geom, std::vector<double> radii)
      : geom_(geom), radii_(std::move(radii)), dft_(geom) {
    for (double r : radii_)
      if (r <= 0.0 || r > geom.injectivity_radius())
        throw std::invalid_argument(
            "profile radii must lie in (0, injectivity radius]");
    indicator_hat_.resize(radii_.size());
    const SiteIndex origin = 0;
    for (size_t k = 0; k < radii_.size(); ++k) {
      std::vector<Cplx> ind(static_cast<size_t>(geom.site_count()), Cplx{});
      for (SiteIndex s = 0; s < geom.site_count(); ++s)
        if (geom.torus_distance(s, origin) <= radii_[k]) ind[s] = Cplx(1.0, 0.0);
      dft_.forward(ind);
      indicator_hat_[k] = std::move(ind);
    }
  }

  const std::vector<double>& radii() const { return radii_; }

  std::vector<double> evaluate(const std::vector<double>& density) const {
    std::vector<Cplx> dens_hat(density.begin(), density.end());
    dft_.forward(dens_hat);
    std::vector<double> out(radii_.size(), 0.0);
    const double cell = std::pow(geom_.spacing(), geom_.dim());
    std::vector<Cplx> work(dens_hat.size());
    for (size_t k = 0; k < radii_.size(); ++k) {
      for (size_t i = 0; i < work.size(); ++i)
        work[i] = dens_hat[i] * indicator_hat_[k][i];
      dft_.inverse(work);
      double best = 0.0;
      for (const Cplx& v : work) best = std::max(best, v.real());
      out[k] = std::pow(radii_[k], 4 - geom_.dim()) * best * cell;
    }
    return out;
  }

 private:
  LatticeGeometry geom_;
  std::vector<double> radii_;
  LatticeDft dft_;
  std::vector<std::vector<Cplx>> indicator_hat_;
};

/// Convenience one-shot profile of a curvature field.
template <typename S>
std::vector<std::pair<double, double>> concentration_profile(
    const TwoFormField<S>& f, const std::vector<double>& radii) {
  ConcentrationProfiler prof(f.geom, radii);
  const std::vector<double> vals = prof.evaluate(curvature_density(f));
  std::vector<std::pair<double, double>> out;
  for (size_t i = 0; i < radii.size(); ++i) out.emplace_back(radii[i], vals[i]);
  return out;
}

/// Blow-up proxy: "concentrating" once the smallest-radius scaled ball energy
/// stays >= sigma1 while sup|F| exceeds the configured fraction of the
/// eps-regularity curvature bound at that scale, persistently over the
/// configured number of consecutive monitor samples.
class BlowUpDetector {
 public:
  explicit BlowUpDetector(const MonitorConfig& cfg)
      : sigma1_(cfg.sigma1), window_(cfg.window) {
    const double rmin = cfg.min_radius();
    sup_threshold_ =
        rmin > 0.0
            ? cfg.detector_sup_fraction * 4.0 / ((cfg.delta0 * rmin) * (cfg.delta0 * rmin))
            : std::numeric_limits<double>::infinity();
  }

  void observe(double profile_rmin, double sup_curv) {
    const bool hit = profile_rmin >= sigma1_ && sup_curv >= sup_threshold_;
    streak_ = hit ? streak_ + 1 : 0;
  }

  bool concentrating() const { return streak_ >= window_; }
  int streak() const { return streak_; }
  double sup_threshold() const { return sup_threshold_; }

 private:
  double sigma1_;
  int window_;
  double sup_threshold_ = 0.0;
  int streak_ = 0;
};

/// L2 norm squared of e(A, theta) = |F_A - (i theta / r) Id|^2.
template <typename S>
double harmonic_deviation(const TwoFormField<S>& f,
                          const std::vector<double>& theta) {
  static_assert(scalar_traits<S>::is_complex,
                "harmonic deviation needs a complex bundle");
  const LatticeGeometry& geom = f.geom;
  if (static_cast<int>(theta.size()) != geom.pair_count())
    throw std::invalid_argument("theta size does not match the geometry");
  const int r = f.twist.rank;
  const double cell = std::pow(geom.spacing(), geom.dim());
  double acc = 0.0;
  for (SiteIndex s = 0; s < geom.site_count(); ++s)
    for (int p = 0; p < geom.pair_count(); ++p) {
      SquareMatrix<S> v = f.at(s, p);
      const Cplx shift = Cplx(0.0, theta[p] / r);
      for (int i = 0; i < r; ++i) v(i, i) -= shift;
      acc += norm2(v);
    }
  return acc * cell;
}

/// L2 norm of the trace-free curvature part.
template <typename S>
double tracefree_l2(const TwoFormField<S>& f) {
  const double cell = std::pow(f.geom.spacing(), f.geom.dim());
  double acc = 0.0;
  for (SiteIndex s = 0; s < f.geom.site_count(); ++s)
    for (int p = 0; p < f.geom.pair_count(); ++p)
      acc += norm2(trace_free_part(f.at(s, p)));
  return std::sqrt(acc * cell);
}

/// Pointwise sup of the trace-free curvature norm.
template <typename S>
double tracefree_sup(const TwoFormField<S>& f) {
  double best = 0.0;
  for (SiteIndex s = 0; s < f.geom.site_count(); ++s) {
    double acc = 0.0;
    for (int p = 0; p < f.geom.pair_count(); ++p)
      acc += norm2(trace_free_part(f.at(s, p)));
    best = std::max(best, acc);
  }
  return std::sqrt(best);
}

struct GapReport {
  bool is_critical = false;
  double grad_inf = 0.0;
  double f_l2 = 0.0;            // ||F||_{L2}
  double f_sup = 0.0;           // sup |F|
  double tracefree_norm = 0.0;  // ||F_perp||_{L2}
  double tracefree_sup = 0.0;
  double model_deviation = 0.0;  // ||F - (i theta / r) Id||_{L2}
  std::string verdict;  // flat | projectively-flat | critical-other | non-critical
};

/// Energy-gap predicate on a (near-)critical connection: critical + tiny
/// sup|F| means flat, critical + tiny sup|F_perp| means projectively flat.
template <typename S>
GapReport gap_test(const ConnectionField<S>& a, const MonitorConfig& cfg,
                   int threads = 1) {
  GapReport rep;
  const TwoFormField<S> f = curvature(a, threads);
  ConnectionField<S> g;
  ym_gradient_into(a, f, g, threads);
  rep.grad_inf = raw_max_abs(g);
  rep.is_critical = rep.grad_inf < cfg.gtol;
  rep.f_l2 = std::sqrt(energy(f));
  rep.f_sup = sup_curvature(f);
  rep.tracefree_norm = tracefree_l2(f);
  rep.tracefree_sup = ymlab::tracefree_sup(f);
  if constexpr (scalar_traits<S>::is_complex) {
    const std::vector<double> theta = harmonic_chern_form(a.geom, a.twist);
    rep.model_deviation = std::sqrt(harmonic_deviation(f, theta));
  } else {
    rep.model_deviation = rep.f_l2;
  }
  if (rep.is_critical && rep.f_sup < cfg.flat_tol)
    rep.verdict = "flat";
  else if (rep.is_critical && rep.tracefree_sup < cfg.flat_tol)
    rep.verdict = "projectively-flat";
  else if (rep.is_critical)
    rep.verdict = "critical-other";
  else
    rep.verdict = "non-critical";
  return rep;
}

}  // namespace ymlab
