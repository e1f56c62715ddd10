#pragma once

// Separable discrete Fourier transform on the lattice, one axis at a time.
// Lattices here are desk scale, so the O(sites * N_axis) direct per-axis
// transform is fast enough and keeps the dependency surface empty.  Used by
// the torus Poisson solve, the ball-sum convolutions, and test oracles.

#include <complex>
#include <numbers>
#include <vector>

#include "ymlab/lattice.hpp"
#include "ymlab/matrix.hpp"

namespace ymlab {

class LatticeDft {
 public:
  explicit LatticeDft(const LatticeGeometry& geom) : geom_(geom) {
    for (int mu = 0; mu < geom.dim(); ++mu) {
      const int N = geom.size(mu);
      auto& tw = twiddle_[mu];
      tw.resize(static_cast<size_t>(N) * N);
      for (int k = 0; k < N; ++k)
        for (int x = 0; x < N; ++x)
          tw[static_cast<size_t>(k) * N + x] =
              std::polar(1.0, -2.0 * std::numbers::pi * k * x / N);
    }
  }

  const LatticeGeometry& geometry() const { return geom_; }

  /// In-place forward transform: f_hat(k) = sum_x f(x) e^{-2 pi i k.x / N}.
  void forward(std::vector<Cplx>& f) const { transform(f, false); }

  /// In-place inverse transform (includes the 1/N normalization).
  void inverse(std::vector<Cplx>& f) const { transform(f, true); }

  /// Mode index along axis mu of a flattened spectral index.
  int mode(SiteIndex s, int mu) const {
    return geom_.coords(s).x[mu];
  }

 private:
  void transform(std::vector<Cplx>& f, bool inv) const {
    const int n = geom_.dim();
    const SiteIndex total = geom_.site_count();
    std::vector<Cplx> line, out;
    for (int mu = 0; mu < n; ++mu) {
      const int N = geom_.size(mu);
      const auto& tw = twiddle_[mu];
      line.resize(N);
      out.resize(N);
      // stride of axis mu and number of lines
      SiteIndex stride = 1;
      for (int a = 0; a < mu; ++a) stride *= geom_.size(a);
      const SiteIndex lines = total / N;
      for (SiteIndex l = 0; l < lines; ++l) {
        // base index of this line: interleave the remaining axes
        const SiteIndex low = l % stride;
        const SiteIndex high = l / stride;
        const SiteIndex base = low + high * stride * N;
        for (int x = 0; x < N; ++x) line[x] = f[base + stride * x];
        for (int k = 0; k < N; ++k) {
          Cplx acc{};
          const Cplx* row = &tw[static_cast<size_t>(k) * N];
          if (inv) {
            for (int x = 0; x < N; ++x) acc += line[x] * std::conj(row[x]);
            acc /= static_cast<double>(N);
          } else {
            for (int x = 0; x < N; ++x) acc += line[x] * row[x];
          }
          out[k] = acc;
        }
        for (int k = 0; k < N; ++k) f[base + stride * k] = out[k];
      }
    }
  }

  LatticeGeometry geom_;
  std::array<std::vector<Cplx>, kMaxDim> twiddle_;
};

/// Solve the centered-difference Poisson problem Lap_c phi = rhs on the torus,
/// where Lap_c = sum_mu Dc_mu Dc_mu and Dc is the centered difference.  The
/// solution is fixed by phi = 0 on the kernel of Lap_c (the zero mode and the
/// per-axis Nyquist modes); the rhs must be orthogonal to that kernel, which
/// holds for any divergence-form right-hand side.
inline std::vector<double> poisson_solve_centered(const LatticeDft& dft,
                                                  const std::vector<double>& rhs) {
  const LatticeGeometry& geom = dft.geometry();
  const int n = geom.dim();
  const double a = geom.spacing();
  std::vector<Cplx> f(rhs.begin(), rhs.end());
  dft.forward(f);
  for (SiteIndex s = 0; s < geom.site_count(); ++s) {
    const Coords k = geom.coords(s);
    // kernel modes have k_mu in {0, N_mu/2} on every axis; test structurally
    // rather than via sin(pi) roundoff
    bool kernel = true;
    double lam = 0.0;
    for (int mu = 0; mu < n; ++mu) {
      const int N = geom.size(mu);
      if (k.x[mu] != 0 && 2 * k.x[mu] != N) kernel = false;
      const double w = std::sin(2.0 * std::numbers::pi * k.x[mu] / N) / a;
      lam -= w * w;
    }
    f[s] = kernel ? Cplx{} : f[s] / lam;
  }
  dft.inverse(f);
  std::vector<double> phi(rhs.size());
  for (size_t i = 0; i < phi.size(); ++i) phi[i] = f[i].real();
  return phi;
}

}  // namespace ymlab
