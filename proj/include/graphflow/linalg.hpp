#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace graphflow {

// Points, displacements and directions in R^d for d <= 2. Unused trailing
// components are kept at zero so that d = 1 code can use the same type.
using Vec2 = std::array<double, 2>;

inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator-(const Vec2& a) { return {-a[0], -a[1]}; }
inline Vec2 operator*(double s, const Vec2& a) { return {s * a[0], s * a[1]}; }
inline Vec2& operator+=(Vec2& a, const Vec2& b) {
  a[0] += b[0];
  a[1] += b[1];
  return a;
}
inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm_sq(const Vec2& a) { return dot(a, a); }
inline double norm(const Vec2& a) { return std::sqrt(norm_sq(a)); }

// Dense d x d matrix, d in {1, 2}, row-major in a fixed 2 x 2 buffer.
class SmallMatrix {
 public:
  SmallMatrix() = default;
  explicit SmallMatrix(int dim) : dim_(dim) {}

  static SmallMatrix identity(int dim) {
    SmallMatrix m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }
  static SmallMatrix diagonal(int dim, double a, double b = 0.0) {
    SmallMatrix m(dim);
    m(0, 0) = a;
    if (dim == 2) m(1, 1) = b;
    return m;
  }
  static SmallMatrix outer(int dim, const Vec2& u, const Vec2& v) {
    SmallMatrix m(dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m(i, j) = u[i] * v[j];
    return m;
  }

  int dim() const { return dim_; }
  double& operator()(int i, int j) { return a_[2 * i + j]; }
  double operator()(int i, int j) const { return a_[2 * i + j]; }

  SmallMatrix& operator+=(const SmallMatrix& o) {
    for (std::size_t i = 0; i < 4; ++i) a_[i] += o.a_[i];
    return *this;
  }
  SmallMatrix& operator*=(double s) {
    for (auto& x : a_) x *= s;
    return *this;
  }
  friend SmallMatrix operator+(SmallMatrix a, const SmallMatrix& b) { return a += b; }
  friend SmallMatrix operator-(SmallMatrix a, const SmallMatrix& b) {
    for (std::size_t i = 0; i < 4; ++i) a.a_[i] -= b.a_[i];
    return a;
  }
  friend SmallMatrix operator*(double s, SmallMatrix a) { return a *= s; }

  Vec2 apply(const Vec2& v) const {
    Vec2 r{0.0, 0.0};
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) r[i] += (*this)(i, j) * v[j];
    return r;
  }
  double quadratic_form(const Vec2& v) const { return dot(v, apply(v)); }

  double determinant() const { return dim_ == 1 ? a_[0] : a_[0] * a_[3] - a_[1] * a_[2]; }
  double trace() const { return dim_ == 1 ? a_[0] : a_[0] + a_[3]; }
  SmallMatrix inverse() const;

  double frobenius() const {
    double s = 0.0;
    for (double x : a_) s += x * x;
    return std::sqrt(s);
  }
  double asymmetry() const { return dim_ == 2 ? std::abs(a_[1] - a_[2]) : 0.0; }

  // Eigenvalues of the symmetric part, ascending.
  std::array<double, 2> symmetric_eigenvalues() const;

  // Cholesky succeeds with strictly positive pivots.
  bool is_positive_definite() const;

 private:
  int dim_ = 1;
  std::array<double, 4> a_{0.0, 0.0, 0.0, 0.0};
};

inline SmallMatrix SmallMatrix::inverse() const {
  SmallMatrix r(dim_);
  if (dim_ == 1) {
    r(0, 0) = 1.0 / a_[0];
    return r;
  }
  const double det = determinant();
  r(0, 0) = a_[3] / det;
  r(0, 1) = -a_[1] / det;
  r(1, 0) = -a_[2] / det;
  r(1, 1) = a_[0] / det;
  return r;
}

inline std::array<double, 2> SmallMatrix::symmetric_eigenvalues() const {
  if (dim_ == 1) return {a_[0], a_[0]};
  const double off = 0.5 * (a_[1] + a_[2]);
  const double mean = 0.5 * (a_[0] + a_[3]);
  const double half_gap = std::hypot(0.5 * (a_[0] - a_[3]), off);
  return {mean - half_gap, mean + half_gap};
}

inline bool SmallMatrix::is_positive_definite() const {
  if (!(a_[0] > 0.0)) return false;
  if (dim_ == 1) return true;
  const double l10 = a_[2] / std::sqrt(a_[0]);
  return a_[3] - l10 * l10 > 0.0;
}

}  // namespace graphflow
