#pragma once

// Time integration of the Yang-Mills gradient flow dA/dt = -D_A^* F_A with
// adaptive step control.  Acceptance enforces the energy rule (no step may
// raise the energy by more than tolerance * (1 + energy)) plus an embedded
// local-error estimate; rejected steps halve dt, accepted ones grow it.
// Because the gradient is the exact differential of the discrete energy,
// monotone decay is a property of the scheme, not an approximation.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "ymlab/calculus.hpp"

namespace ymlab {

enum class FlowScheme { euler, heun, rk4 };

inline const char* to_string(FlowScheme s) {
  switch (s) {
    case FlowScheme::euler: return "euler";
    case FlowScheme::heun: return "heun";
    default: return "rk4";
  }
}

inline FlowScheme flow_scheme_from(const std::string& s) {
  if (s == "euler") return FlowScheme::euler;
  if (s == "heun") return FlowScheme::heun;
  if (s == "rk4") return FlowScheme::rk4;
  throw std::invalid_argument("unknown flow scheme: " + s);
}

struct FlowConfig {
  double dt_init = 1e-4;
  double dt_min = 1e-12;
  double dt_max = 0.1;
  double safety = 0.9;      // in (0,1]
  double tolerance = 1e-6;  // local error / energy-increase budget
  double t_end = 1.0;
  double gtol = 1e-10;      // convergence: max entry of the gradient
  FlowScheme scheme = FlowScheme::heun;
  int threads = 1;

  void validate() const {
    if (!(dt_min <= dt_init && dt_init <= dt_max))
      throw std::invalid_argument("need dt_min <= dt_init <= dt_max");
    if (!(safety > 0.0 && safety <= 1.0))
      throw std::invalid_argument("safety must be in (0,1]");
    if (tolerance <= 0.0) throw std::invalid_argument("tolerance must be > 0");
    if (t_end < 0.0) throw std::invalid_argument("t_end must be >= 0");
  }
};

template <typename S>
struct FlowState {
  double t = 0.0;
  double dt = 0.0;
  ConnectionField<S> a;
  TwoFormField<S> f;     // curvature of a (kept consistent)
  double energy = 0.0;   // energy(f)
  double grad_inf = 0.0;    // max entry of the latest gradient evaluation
  double grad_l2sq = 0.0;   // ||gradient||_{L2}^2 at the latest evaluation
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;

  static FlowState initial(ConnectionField<S> a0, const FlowConfig& cfg) {
    cfg.validate();
    FlowState st;
    st.a = std::move(a0);
    st.dt = cfg.dt_init;
    curvature_into(st.a, st.f, cfg.threads);
    st.energy = ymlab::energy(st.f);
    return st;
  }
};

enum class StepStatus { accepted, stiff_stop, critical };

/// Scratch fields reused across steps.
template <typename S>
struct FlowWorkspace {
  ConnectionField<S> g1, g2, a_try;
  TwoFormField<S> f_try, f_scratch;
};

namespace detail {

template <typename S>
void refresh_gradient_stats(FlowState<S>& st, const ConnectionField<S>& g) {
  st.grad_inf = raw_max_abs(g);
  st.grad_l2sq = l2_norm2(g);
}

}  // namespace detail

/// One adaptive step.  Returns `critical` (state untouched) when the gradient
/// is already below gtol, `stiff_stop` when halving hits dt_min.
template <typename S>
StepStatus flow_step(FlowState<S>& st, const FlowConfig& cfg,
                     FlowWorkspace<S>& ws) {
  const int threads = cfg.threads;
  ym_gradient_into(st.a, st.f, ws.g1, threads);
  detail::refresh_gradient_stats(st, ws.g1);
  if (cfg.gtol > 0.0 && st.grad_inf < cfg.gtol) return StepStatus::critical;

  const double a_scale = 1.0 + raw_max_abs(st.a);
  while (true) {
    const double dt = st.dt;
    double err_abs = -1.0;
    switch (cfg.scheme) {
      case FlowScheme::euler: {
        ws.a_try = st.a;
        ws.a_try.axpy(-dt, ws.g1);
        break;
      }
      case FlowScheme::heun: {
        ws.a_try = st.a;
        ws.a_try.axpy(-dt, ws.g1);  // predictor
        curvature_into(ws.a_try, ws.f_scratch, threads);
        ym_gradient_into(ws.a_try, ws.f_scratch, ws.g2, threads);
        // corrector: a - dt (g1 + g2) / 2 = predictor + dt (g1 - g2) / 2
        ws.a_try.axpy(0.5 * dt, ws.g1);
        ws.a_try.axpy(-0.5 * dt, ws.g2);
        double diff = 0.0;
        for (size_t i = 0; i < ws.g1.raw.size(); ++i)
          diff = std::max(diff, scalar_traits<S>::abs2(ws.g1.raw[i] - ws.g2.raw[i]));
        err_abs = 0.5 * dt * std::sqrt(diff);
        break;
      }
      case FlowScheme::rk4: {
        ConnectionField<S> k2, k3, k4;  // rk4 is for small lattices
        ws.a_try = st.a;
        ws.a_try.axpy(-0.5 * dt, ws.g1);
        curvature_into(ws.a_try, ws.f_scratch, threads);
        ym_gradient_into(ws.a_try, ws.f_scratch, k2, threads);
        ws.a_try = st.a;
        ws.a_try.axpy(-0.5 * dt, k2);
        curvature_into(ws.a_try, ws.f_scratch, threads);
        ym_gradient_into(ws.a_try, ws.f_scratch, k3, threads);
        ws.a_try = st.a;
        ws.a_try.axpy(-dt, k3);
        curvature_into(ws.a_try, ws.f_scratch, threads);
        ym_gradient_into(ws.a_try, ws.f_scratch, k4, threads);
        ws.a_try = st.a;
        ws.a_try.axpy(-dt / 6.0, ws.g1);
        ws.a_try.axpy(-dt / 3.0, k2);
        ws.a_try.axpy(-dt / 3.0, k3);
        ws.a_try.axpy(-dt / 6.0, k4);
        // compare against the embedded midpoint update
        double diff = 0.0;
        for (size_t i = 0; i < ws.g1.raw.size(); ++i) {
          const S rk = (ws.g1.raw[i] + 2.0 * k2.raw[i] + 2.0 * k3.raw[i] +
                        k4.raw[i]) * (1.0 / 6.0);
          diff = std::max(diff, scalar_traits<S>::abs2(rk - k2.raw[i]));
        }
        err_abs = dt * std::sqrt(diff);
        break;
      }
    }

    curvature_into(ws.a_try, ws.f_try, threads);
    const double e_try = energy(ws.f_try);
    const double err_rel = err_abs < 0.0 ? 0.0 : err_abs / a_scale;
    const bool ok = (e_try <= st.energy + cfg.tolerance * (1.0 + st.energy)) &&
                    (err_rel <= cfg.tolerance);
    if (ok) {
      std::swap(st.a.raw, ws.a_try.raw);
      std::swap(st.f.raw, ws.f_try.raw);
      st.energy = e_try;
      st.t += dt;
      ++st.accepted;
      double grow;
      if (err_rel > 0.0)
        grow = std::clamp(cfg.safety * std::sqrt(cfg.tolerance / err_rel), 0.3, 2.0);
      else
        grow = 1.0 + cfg.safety;
      st.dt = std::clamp(dt * grow, cfg.dt_min, cfg.dt_max);
      return StepStatus::accepted;
    }
    ++st.rejected;
    st.dt = 0.5 * dt;
    if (st.dt < cfg.dt_min) {
      st.dt = dt;  // leave a usable dt behind for diagnostics
      return StepStatus::stiff_stop;
    }
  }
}

enum class FlowOutcome { converged, concentrating, stiff_stop, undecided };

inline const char* to_string(FlowOutcome o) {
  switch (o) {
    case FlowOutcome::converged: return "converged";
    case FlowOutcome::concentrating: return "concentrating";
    case FlowOutcome::stiff_stop: return "stiff-stop";
    default: return "undecided";
  }
}

/// Sampling hook invoked at t=0, every `cadence` accepted steps, and at the
/// final state.  Returning an outcome stops the run (blow-up detector).
template <typename S>
using SampleHook = std::function<std::optional<FlowOutcome>(const FlowState<S>&)>;

struct RunStats {
  double grad_l2sq_time_integral = 0.0;  // int 2 ||grad||^2 dt, trapezoidal
  double max_energy_step_increase = 0.0;
  std::uint64_t samples = 0;
};

/// Integrate to t_end or until convergence, stiffness stop, or a hook stop.
/// Deterministic for fixed config, initial data, and thread count.  The stats
/// accumulate the gradient-flow energy identity integral int 2||grad||^2 dt by
/// trapezoid over the gradient evaluations at accepted-step endpoints.
template <typename S>
FlowOutcome run_flow(FlowState<S>& st, const FlowConfig& cfg, int cadence,
                     const SampleHook<S>& sample, RunStats* stats = nullptr) {
  cfg.validate();
  if (cadence < 1) cadence = 1;
  FlowWorkspace<S> ws;
  RunStats local;
  RunStats& rs = stats ? *stats : local;

  const auto emit = [&](const FlowState<S>& s) -> std::optional<FlowOutcome> {
    ++rs.samples;
    return sample ? sample(s) : std::nullopt;
  };

  bool have_prev = false;
  double prev_t = 0.0, prev_g2 = 0.0;
  const auto note_gradient_point = [&](double t, double g2) {
    if (have_prev) rs.grad_l2sq_time_integral += (t - prev_t) * (prev_g2 + g2);
    prev_t = t;
    prev_g2 = g2;
    have_prev = true;
  };
  const auto close_integral = [&]() {
    // one extra gradient evaluation at the final state
    ym_gradient_into(st.a, st.f, ws.g1, cfg.threads);
    detail::refresh_gradient_stats(st, ws.g1);
    note_gradient_point(st.t, st.grad_l2sq);
  };

  if (auto stop = emit(st)) return *stop;

  std::uint64_t since_sample = 0;
  while (st.t < cfg.t_end) {
    const double e_before = st.energy;
    const double t_before = st.t;
    const StepStatus status = flow_step(st, cfg, ws);
    if (status == StepStatus::critical) {
      // gradient stats refreshed at the (final) current state
      note_gradient_point(st.t, st.grad_l2sq);
      emit(st);
      return FlowOutcome::converged;
    }
    note_gradient_point(t_before, st.grad_l2sq);
    if (status == StepStatus::stiff_stop) {
      close_integral();
      emit(st);
      return FlowOutcome::stiff_stop;
    }
    rs.max_energy_step_increase =
        std::max(rs.max_energy_step_increase, st.energy - e_before);
    ++since_sample;
    if (since_sample >= static_cast<std::uint64_t>(cadence) ||
        st.t >= cfg.t_end) {
      since_sample = 0;
      const bool at_end = st.t >= cfg.t_end;
      if (at_end) close_integral();
      if (auto stop = emit(st)) return *stop;
    }
  }
  if (since_sample != 0) {
    close_integral();
    emit(st);
  }
  // grad stats were refreshed at the final state when closing the integral
  if (cfg.gtol > 0.0 && st.grad_inf < cfg.gtol) return FlowOutcome::converged;
  return FlowOutcome::undecided;
}

}  // namespace ymlab
