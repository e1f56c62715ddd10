#pragma once

// Dense rank-r matrix algebra (r <= 8) over real or complex scalars, with
// the Lie-algebra/group helpers used by every other module.  Matrices are
// value types with inline storage; the scalar kind selects so(r) vs u(r).

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace ymlab {

inline constexpr int kMaxRank = 8;

using Cplx = std::complex<double>;

template <typename S>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  static constexpr bool is_complex = false;
  static double conj(double x) { return x; }
  static double real(double x) { return x; }
  static double imag(double) { return 0.0; }
  static double abs2(double x) { return x * x; }
  static const char* name() { return "real"; }
};

template <>
struct scalar_traits<Cplx> {
  static constexpr bool is_complex = true;
  static Cplx conj(const Cplx& x) { return std::conj(x); }
  static double real(const Cplx& x) { return x.real(); }
  static double imag(const Cplx& x) { return x.imag(); }
  static double abs2(const Cplx& x) {
    return x.real() * x.real() + x.imag() * x.imag();
  }
  static const char* name() { return "complex"; }
};

/// r x r matrix with inline storage, row-major.
template <typename S>
class SquareMatrix {
 public:
  using Scalar = S;

  SquareMatrix() : rank_(1) { e_[0] = S{}; }

  explicit SquareMatrix(int rank) : rank_(rank) {
    check_rank(rank);
    // entries are row-major with stride rank, so the used block is the
    // contiguous prefix of length rank^2
    for (int i = 0; i < rank * rank; ++i) e_[i] = S{};
  }

  static SquareMatrix zero(int rank) { return SquareMatrix(rank); }

  static SquareMatrix identity(int rank) {
    SquareMatrix m(rank);
    for (int i = 0; i < rank; ++i) m(i, i) = S{1};
    return m;
  }

  int rank() const { return rank_; }

  S& operator()(int i, int j) { return e_[static_cast<size_t>(i) * rank_ + j]; }
  const S& operator()(int i, int j) const {
    return e_[static_cast<size_t>(i) * rank_ + j];
  }

  S* data() { return e_.data(); }
  const S* data() const { return e_.data(); }

  SquareMatrix& operator+=(const SquareMatrix& o) {
    check_match(o);
    for (int i = 0; i < rank_ * rank_; ++i) e_[i] += o.e_[i];
    return *this;
  }
  SquareMatrix& operator-=(const SquareMatrix& o) {
    check_match(o);
    for (int i = 0; i < rank_ * rank_; ++i) e_[i] -= o.e_[i];
    return *this;
  }
  SquareMatrix& operator*=(const S& c)
    requires(!std::is_same_v<S, double>)
  {
    for (int i = 0; i < rank_ * rank_; ++i) e_[i] *= c;
    return *this;
  }
  SquareMatrix& operator*=(double c) {
    for (int i = 0; i < rank_ * rank_; ++i) e_[i] *= c;
    return *this;
  }

  friend SquareMatrix operator+(SquareMatrix a, const SquareMatrix& b) {
    a += b;
    return a;
  }
  friend SquareMatrix operator-(SquareMatrix a, const SquareMatrix& b) {
    a -= b;
    return a;
  }
  friend SquareMatrix operator*(SquareMatrix a, const S& c)
    requires(!std::is_same_v<S, double>)
  {
    a *= c;
    return a;
  }
  friend SquareMatrix operator*(const S& c, SquareMatrix a)
    requires(!std::is_same_v<S, double>)
  {
    a *= c;
    return a;
  }
  friend SquareMatrix operator*(SquareMatrix a, double c) {
    a *= c;
    return a;
  }
  friend SquareMatrix operator*(double c, SquareMatrix a) {
    a *= c;
    return a;
  }
  friend SquareMatrix operator-(const SquareMatrix& a) {
    SquareMatrix m(a.rank_);
    for (int i = 0; i < a.rank_ * a.rank_; ++i) m.e_[i] = -a.e_[i];
    return m;
  }

  friend SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b) {
    a.check_match(b);
    const int r = a.rank_;
    SquareMatrix m(r);
    for (int i = 0; i < r; ++i) {
      for (int k = 0; k < r; ++k) {
        const S aik = a(i, k);
        for (int j = 0; j < r; ++j) m(i, j) += aik * b(k, j);
      }
    }
    return m;
  }

  void check_match(const SquareMatrix& o) const {
    if (rank_ != o.rank_)
      throw std::invalid_argument("matrix rank mismatch: " +
                                  std::to_string(rank_) + " vs " +
                                  std::to_string(o.rank_));
  }

 private:
  static void check_rank(int r) {
    if (r < 1 || r > kMaxRank)
      throw std::invalid_argument("matrix rank out of range: " +
                                  std::to_string(r));
  }

  int rank_;
  std::array<S, kMaxRank * kMaxRank> e_;
};

using RealMatrix = SquareMatrix<double>;
using CplxMatrix = SquareMatrix<Cplx>;

template <typename S>
SquareMatrix<S> adjoint(const SquareMatrix<S>& m) {
  const int r = m.rank();
  SquareMatrix<S> a(r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) a(i, j) = scalar_traits<S>::conj(m(j, i));
  return a;
}

template <typename S>
S trace(const SquareMatrix<S>& m) {
  S t{};
  for (int i = 0; i < m.rank(); ++i) t += m(i, i);
  return t;
}

/// Commutator [a,b] = ab - ba.
template <typename S>
SquareMatrix<S> comm(const SquareMatrix<S>& a, const SquareMatrix<S>& b) {
  return a * b - b * a;
}

/// Fiber inner product <a,b> = Re Tr(a b^dagger); the fiber metric is the
/// identity Gram matrix in the global frame.
template <typename S>
double inner_product(const SquareMatrix<S>& a, const SquareMatrix<S>& b) {
  a.check_match(b);
  double s = 0.0;
  const int r = a.rank();
  for (int i = 0; i < r * r; ++i)
    s += scalar_traits<S>::real(a.data()[i] * scalar_traits<S>::conj(b.data()[i]));
  return s;
}

template <typename S>
double norm2(const SquareMatrix<S>& m) {
  double s = 0.0;
  const int r = m.rank();
  for (int i = 0; i < r * r; ++i) s += scalar_traits<S>::abs2(m.data()[i]);
  return s;
}

template <typename S>
double fro_norm(const SquareMatrix<S>& m) {
  return std::sqrt(norm2(m));
}

template <typename S>
double max_abs(const SquareMatrix<S>& m) {
  double s = 0.0;
  const int r = m.rank();
  for (int i = 0; i < r * r; ++i)
    s = std::max(s, scalar_traits<S>::abs2(m.data()[i]));
  return std::sqrt(s);
}

/// Skew projection (m - m^dagger)/2; idempotent, fixes exactly the skew part.
template <typename S>
SquareMatrix<S> skew_project(const SquareMatrix<S>& m) {
  const int r = m.rank();
  SquareMatrix<S> out(r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      out(i, j) = (m(i, j) - scalar_traits<S>::conj(m(j, i))) * 0.5;
  return out;
}

template <typename S>
SquareMatrix<S> hermitian_project(const SquareMatrix<S>& m) {
  const int r = m.rank();
  SquareMatrix<S> out(r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      out(i, j) = (m(i, j) + scalar_traits<S>::conj(m(j, i))) * 0.5;
  return out;
}

/// m - (tr m / r) Id: the trace-free part F -> F^perp.
template <typename S>
SquareMatrix<S> trace_free_part(const SquareMatrix<S>& m) {
  const int r = m.rank();
  SquareMatrix<S> out = m;
  const S mean = trace(m) * (1.0 / r);
  for (int i = 0; i < r; ++i) out(i, i) -= mean;
  return out;
}

/// Max-entry defect of the skew condition m + m^dagger = 0.
template <typename S>
double skew_defect(const SquareMatrix<S>& m) {
  const int r = m.rank();
  double d = 0.0;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      d = std::max(d, std::sqrt(scalar_traits<S>::abs2(
                          m(i, j) + scalar_traits<S>::conj(m(j, i)))));
  return d;
}

/// Max-entry defect of the unitarity condition m^dagger m = Id.
template <typename S>
double unitary_defect(const SquareMatrix<S>& m) {
  SquareMatrix<S> g = adjoint(m) * m;
  for (int i = 0; i < m.rank(); ++i) g(i, i) -= S{1};
  return max_abs(g);
}

template <typename S>
bool all_finite(const SquareMatrix<S>& m) {
  const int r = m.rank();
  for (int i = 0; i < r * r; ++i) {
    const double re = scalar_traits<S>::real(m.data()[i]);
    const double im = scalar_traits<S>::imag(m.data()[i]);
    if (!std::isfinite(re) || !std::isfinite(im)) return false;
  }
  return true;
}

/// Skew (so(r) / u(r)) fiber value.  Wraps a matrix that satisfies the skew
/// invariant; construction projects roundoff drift away and rejects inputs
/// that are not close to skew.
template <typename S>
struct AlgebraElement {
  SquareMatrix<S> m;

  AlgebraElement() = default;
  explicit AlgebraElement(const SquareMatrix<S>& v, double tol = 1e-12)
      : m(skew_project(v)) {
    const double scale = std::max(1.0, max_abs(v));
    if (skew_defect(v) > 2.0 * tol * scale)
      throw std::invalid_argument("value is not skew within tolerance");
  }
};

/// Orthogonal / unitary fiber value.
template <typename S>
struct GroupElement {
  SquareMatrix<S> m;

  GroupElement() = default;
  explicit GroupElement(const SquareMatrix<S>& v, double tol = 1e-10) : m(v) {
    if (unitary_defect(v) > tol)
      throw std::invalid_argument("value is not unitary within tolerance");
  }
};

}  // namespace ymlab
