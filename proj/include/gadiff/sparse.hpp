#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gadiff/matrix.hpp"

namespace gadiff {

// Square sparse matrix in CSR form. The graphs here are undirected, so
// every instance is symmetric and CSR doubles as CSC.
struct SparseMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;  // size n+1
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  std::size_t nnz() const { return col.size(); }
};

// Y = S * X  (n x f), sparse-dense product.
inline void spmm(const SparseMatrix& s, const Matrix& x, Matrix& y) {
  if (s.n != x.rows()) throw std::invalid_argument("spmm: dimension mismatch");
  y = Matrix(s.n, x.cols());
  const std::size_t f = x.cols();
  for (std::size_t i = 0; i < s.n; ++i) {
    double* yi = y.row(i);
    for (std::size_t e = s.row_ptr[i]; e < s.row_ptr[i + 1]; ++e) {
      const double w = s.val[e];
      const double* xj = x.row(s.col[e]);
      for (std::size_t k = 0; k < f; ++k) yi[k] += w * xj[k];
    }
  }
}

inline Matrix spmm(const SparseMatrix& s, const Matrix& x) {
  Matrix y;
  spmm(s, x, y);
  return y;
}

inline Matrix to_dense(const SparseMatrix& s) {
  Matrix m(s.n, s.n);
  for (std::size_t i = 0; i < s.n; ++i)
    for (std::size_t e = s.row_ptr[i]; e < s.row_ptr[i + 1]; ++e) m(i, s.col[e]) += s.val[e];
  return m;
}

}  // namespace gadiff
