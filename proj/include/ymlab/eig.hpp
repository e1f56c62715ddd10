#pragma once

// Small dense matrix functions: Hermitian eigendecomposition (cyclic Jacobi),
// exponentials of skew elements, and log/sqrt of positive Hermitian metrics.
// Everything here is for r <= 8 fibers; no external linear algebra needed.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ymlab/matrix.hpp"

namespace ymlab {

struct HermitianEig {
  std::array<double, kMaxRank> eval{};
  CplxMatrix vec{1};  // columns are eigenvectors
};

/// Cyclic Jacobi for complex Hermitian matrices.  Input is Hermitized first;
/// eigenvalues come out ascending.
inline HermitianEig hermitian_eig(const CplxMatrix& h_in) {
  const int r = h_in.rank();
  CplxMatrix a = hermitian_project(h_in);
  CplxMatrix v = CplxMatrix::identity(r);

  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < r; ++p)
      for (int q = p + 1; q < r; ++q) off += scalar_traits<Cplx>::abs2(a(p, q));
    if (off < 1e-32 * std::max(1.0, norm2(a))) break;

    for (int p = 0; p < r; ++p) {
      for (int q = p + 1; q < r; ++q) {
        const Cplx apq = a(p, q);
        const double abs_apq = std::abs(apq);
        if (abs_apq == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // Unitary rotation in the (p,q) plane annihilating a(p,q).
        const double tau = (aqq - app) / (2.0 * abs_apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const Cplx phase = apq / abs_apq;
        const Cplx s = phase * (t * c);

        for (int k = 0; k < r; ++k) {
          const Cplx akp = a(k, p);
          const Cplx akq = a(k, q);
          a(k, p) = c * akp - std::conj(s) * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < r; ++k) {
          const Cplx apk = a(p, k);
          const Cplx aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = std::conj(s) * apk + c * aqk;
        }
        for (int k = 0; k < r; ++k) {
          const Cplx vkp = v(k, p);
          const Cplx vkq = v(k, q);
          v(k, p) = c * vkp - std::conj(s) * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  HermitianEig out;
  out.vec = CplxMatrix(r);
  std::array<int, kMaxRank> order{};
  for (int i = 0; i < r; ++i) order[i] = i;
  std::sort(order.begin(), order.begin() + r,
            [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });
  for (int i = 0; i < r; ++i) {
    out.eval[i] = a(order[i], order[i]).real();
    for (int k = 0; k < r; ++k) out.vec(k, i) = v(k, order[i]);
  }
  return out;
}

/// Apply a scalar function to a Hermitian matrix through its spectrum.
template <typename F>
CplxMatrix hermitian_function(const CplxMatrix& h, F&& f) {
  const int r = h.rank();
  const HermitianEig eig = hermitian_eig(h);
  CplxMatrix out(r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      Cplx s{};
      for (int k = 0; k < r; ++k)
        s += eig.vec(i, k) * f(eig.eval[k]) * std::conj(eig.vec(j, k));
      out(i, j) = s;
    }
  return out;
}

inline double min_eigenvalue(const CplxMatrix& h) {
  return hermitian_eig(h).eval[0];
}

inline CplxMatrix sqrt_positive(const CplxMatrix& h) {
  if (min_eigenvalue(h) <= 0.0)
    throw std::domain_error("matrix square root needs a positive metric");
  return hermitian_function(h, [](double x) { return std::sqrt(x); });
}

inline CplxMatrix inv_sqrt_positive(const CplxMatrix& h) {
  if (min_eigenvalue(h) <= 0.0)
    throw std::domain_error("matrix inverse square root needs a positive metric");
  return hermitian_function(h, [](double x) { return 1.0 / std::sqrt(x); });
}

inline CplxMatrix log_positive(const CplxMatrix& h) {
  if (min_eigenvalue(h) <= 0.0)
    throw std::domain_error("matrix logarithm needs a positive metric");
  return hermitian_function(h, [](double x) { return std::log(x); });
}

inline CplxMatrix inverse_positive(const CplxMatrix& h) {
  return hermitian_function(h, [](double x) {
    if (x <= 0.0) throw std::domain_error("matrix inverse needs a positive metric");
    return 1.0 / x;
  });
}

/// Gauss-Jordan inverse for general small matrices (partial pivoting).
template <typename S>
SquareMatrix<S> inverse(const SquareMatrix<S>& m) {
  const int r = m.rank();
  SquareMatrix<S> a = m;
  SquareMatrix<S> inv = SquareMatrix<S>::identity(r);
  for (int col = 0; col < r; ++col) {
    int piv = col;
    double best = scalar_traits<S>::abs2(a(col, col));
    for (int k = col + 1; k < r; ++k) {
      const double v = scalar_traits<S>::abs2(a(k, col));
      if (v > best) {
        best = v;
        piv = k;
      }
    }
    if (best == 0.0) throw std::domain_error("singular matrix in inverse()");
    if (piv != col)
      for (int j = 0; j < r; ++j) {
        std::swap(a(col, j), a(piv, j));
        std::swap(inv(col, j), inv(piv, j));
      }
    const S d = S{1} / a(col, col);
    for (int j = 0; j < r; ++j) {
      a(col, j) *= d;
      inv(col, j) *= d;
    }
    for (int k = 0; k < r; ++k) {
      if (k == col) continue;
      const S f = a(k, col);
      if (f == S{}) continue;
      for (int j = 0; j < r; ++j) {
        a(k, j) -= f * a(col, j);
        inv(k, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

template <typename S>
S determinant(const SquareMatrix<S>& m) {
  const int r = m.rank();
  SquareMatrix<S> a = m;
  S det{1};
  for (int col = 0; col < r; ++col) {
    int piv = col;
    double best = scalar_traits<S>::abs2(a(col, col));
    for (int k = col + 1; k < r; ++k) {
      const double v = scalar_traits<S>::abs2(a(k, col));
      if (v > best) {
        best = v;
        piv = k;
      }
    }
    if (best == 0.0) return S{};
    if (piv != col) {
      det = -det;
      for (int j = col; j < r; ++j) std::swap(a(col, j), a(piv, j));
    }
    det *= a(col, col);
    const S d = S{1} / a(col, col);
    for (int k = col + 1; k < r; ++k) {
      const S f = a(k, col) * d;
      if (f == S{}) continue;
      for (int j = col; j < r; ++j) a(k, j) -= f * a(col, j);
    }
  }
  return det;
}

/// Scaling-and-squaring Taylor exponential for general small matrices.
template <typename S>
SquareMatrix<S> exp_dense(const SquareMatrix<S>& m) {
  const int r = m.rank();
  const double nrm = fro_norm(m);
  int squarings = 0;
  double scale = 1.0;
  while (nrm * scale > 0.5) {
    scale *= 0.5;
    ++squarings;
  }
  SquareMatrix<S> x = m * scale;
  SquareMatrix<S> term = SquareMatrix<S>::identity(r);
  SquareMatrix<S> sum = term;
  for (int k = 1; k <= 24; ++k) {
    term = term * x;
    term *= 1.0 / k;
    sum += term;
    if (fro_norm(term) < 1e-18 * std::max(1.0, fro_norm(sum))) break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

namespace detail {

inline CplxMatrix to_complex(const RealMatrix& m) {
  CplxMatrix c(m.rank());
  for (int i = 0; i < m.rank(); ++i)
    for (int j = 0; j < m.rank(); ++j) c(i, j) = Cplx(m(i, j), 0.0);
  return c;
}

inline RealMatrix to_real(const CplxMatrix& m) {
  RealMatrix out(m.rank());
  for (int i = 0; i < m.rank(); ++i)
    for (int j = 0; j < m.rank(); ++j) out(i, j) = m(i, j).real();
  return out;
}

}  // namespace detail

inline CplxMatrix exp_skew_impl(const CplxMatrix& s) {
  // s = i h with h Hermitian; exponentiate through the spectrum of h so the
  // result is unitary to roundoff.
  const int r = s.rank();
  CplxMatrix h(r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) h(i, j) = Cplx(0, -1) * s(i, j);
  h = hermitian_project(h);
  const HermitianEig eig = hermitian_eig(h);
  CplxMatrix out(r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      Cplx acc{};
      for (int k = 0; k < r; ++k)
        acc += eig.vec(i, k) * std::polar(1.0, eig.eval[k]) *
               std::conj(eig.vec(j, k));
      out(i, j) = acc;
    }
  return out;
}

/// Exponential map algebra -> group.  Output satisfies the group invariant
/// (unitary / orthogonal) to roundoff.
inline GroupElement<Cplx> exp_map(const AlgebraElement<Cplx>& a) {
  return GroupElement<Cplx>(exp_skew_impl(a.m));
}

inline GroupElement<double> exp_map(const AlgebraElement<double>& a) {
  return GroupElement<double>(detail::to_real(exp_skew_impl(detail::to_complex(a.m))));
}

}  // namespace ymlab
