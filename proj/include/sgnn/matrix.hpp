#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace sgnn {

// Dense row-major matrix of doubles. Everything the model needs fits in a
// handful of small GEMMs, so this stays deliberately minimal.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

  std::span<double> row(int r) { return {a.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)}; }
  std::span<const double> row(int r) const {
    return {a.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }

  size_t size() const { return a.size(); }
  void fill(double v) { a.assign(a.size(), v); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

  bool finite() const {
    for (double v : a)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double sq_norm() const {
    double s = 0;
    for (double v : a) s += v * v;
    return s;
  }
};

// C = A * B
inline Mat matmul(const Mat& A, const Mat& B) {
  assert(A.cols == B.rows);
  Mat C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i) {
    for (int k = 0; k < A.cols; ++k) {
      double aik = A(i, k);
      if (aik == 0.0) continue;
      const double* brow = &B.a[static_cast<size_t>(k) * B.cols];
      double* crow = &C.a[static_cast<size_t>(i) * C.cols];
      for (int j = 0; j < B.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return C;
}

// C = A * B^T
inline Mat matmul_nt(const Mat& A, const Mat& B) {
  assert(A.cols == B.cols);
  Mat C(A.rows, B.rows);
  for (int i = 0; i < A.rows; ++i) {
    const double* arow = &A.a[static_cast<size_t>(i) * A.cols];
    for (int j = 0; j < B.rows; ++j) {
      const double* brow = &B.a[static_cast<size_t>(j) * B.cols];
      double s = 0;
      for (int k = 0; k < A.cols; ++k) s += arow[k] * brow[k];
      C(i, j) = s;
    }
  }
  return C;
}

// C = A^T * B
inline Mat matmul_tn(const Mat& A, const Mat& B) {
  assert(A.rows == B.rows);
  Mat C(A.cols, B.cols);
  for (int k = 0; k < A.rows; ++k) {
    const double* arow = &A.a[static_cast<size_t>(k) * A.cols];
    const double* brow = &B.a[static_cast<size_t>(k) * B.cols];
    for (int i = 0; i < A.cols; ++i) {
      double aki = arow[i];
      if (aki == 0.0) continue;
      double* crow = &C.a[static_cast<size_t>(i) * C.cols];
      for (int j = 0; j < B.cols; ++j) crow[j] += aki * brow[j];
    }
  }
  return C;
}

inline void add_inplace(Mat& A, const Mat& B) {
  assert(A.same_shape(B));
  for (size_t i = 0; i < A.a.size(); ++i) A.a[i] += B.a[i];
}

inline void axpy_inplace(Mat& A, double c, const Mat& B) {
  assert(A.same_shape(B));
  for (size_t i = 0; i < A.a.size(); ++i) A.a[i] += c * B.a[i];
}

inline Mat hadamard(const Mat& A, const Mat& B) {
  assert(A.same_shape(B));
  Mat C(A.rows, A.cols);
  for (size_t i = 0; i < A.a.size(); ++i) C.a[i] = A.a[i] * B.a[i];
  return C;
}

// Adds a 1 x C row vector to every row of A.
inline void add_row_broadcast(Mat& A, const Mat& b) {
  assert(b.rows == 1 && b.cols == A.cols);
  for (int i = 0; i < A.rows; ++i) {
    double* arow = &A.a[static_cast<size_t>(i) * A.cols];
    for (int j = 0; j < A.cols; ++j) arow[j] += b.a[j];
  }
}

// Column sums as a 1 x C matrix.
inline Mat col_sums(const Mat& A) {
  Mat s(1, A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) s.a[j] += A(i, j);
  return s;
}

template <typename F>
inline Mat map(const Mat& A, F f) {
  Mat C(A.rows, A.cols);
  for (size_t i = 0; i < A.a.size(); ++i) C.a[i] = f(A.a[i]);
  return C;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace sgnn
