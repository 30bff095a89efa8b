#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gadiff/matrix.hpp"
#include "gadiff/rng.hpp"
#include "gadiff/sparse.hpp"

namespace gadiff {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    v.assign(n, 0.0);
  }
  static Tensor from_matrix(const Matrix& m) {
    Tensor t({m.rows(), m.cols()});
    t.v = m.data();
    return t;
  }
  Matrix as_matrix() const {
    if (shape.size() != 2) throw std::runtime_error("tensor is not 2-d");
    Matrix m(shape[0], shape[1]);
    m.data() = v;
    return m;
  }
  std::size_t numel() const { return v.size(); }
};

/// Named, shaped parameter tensors with per-parameter Adam state. Insertion
/// order is preserved so gradient vectors can be aligned by index.
class ParamStore {
 public:
  std::uint64_t seed = 0;

  std::size_t add(const std::string& name, std::vector<std::size_t> shape);
  bool has(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t index_of(const std::string& name) const;

  Tensor& at(const std::string& name) { return tensors_[index_of(name)]; }
  const Tensor& at(const std::string& name) const { return tensors_[index_of(name)]; }
  Tensor& at(std::size_t i) { return tensors_[i]; }
  const Tensor& at(std::size_t i) const { return tensors_[i]; }

  std::size_t count() const { return tensors_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  std::vector<Tensor> zero_grads() const;

  Tensor& adam_m(std::size_t i) { return adam_m_[i]; }
  Tensor& adam_v(std::size_t i) { return adam_v_[i]; }
  const Tensor& adam_m(std::size_t i) const { return adam_m_[i]; }
  const Tensor& adam_v(std::size_t i) const { return adam_v_[i]; }
  std::uint64_t& adam_step(std::size_t i) { return adam_step_[i]; }
  std::uint64_t adam_step(std::size_t i) const { return adam_step_[i]; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t> index_;
  std::vector<Tensor> tensors_;
  std::vector<Tensor> adam_m_, adam_v_;
  std::vector<std::uint64_t> adam_step_;
};

struct AdamResult {
  bool applied = true;
  std::size_t nonfinite_entries = 0;
};

/// Standard Adam with bias correction. If any gradient entry is non-finite
/// the whole step is skipped and the count reported.
AdamResult adam_step(ParamStore& params, const std::vector<Tensor>& grads, double lr,
                     double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// Uniform Glorot initialization in +-sqrt(6/(fan_in+fan_out)).
void glorot_init(Tensor& w, std::size_t fan_in, std::size_t fan_out, Rng& rng);

// ---- layer primitives (forward + hand-derived backward) ----

// Y = X W + 1 b^T
Matrix affine_forward(const Matrix& x, const Matrix& w, const std::vector<double>& b);
void affine_backward(const Matrix& x, const Matrix& w, const Matrix& dy, Matrix* dx, Matrix* dw,
                     std::vector<double>* db);

// Y = S (X W) + 1 b^T with S the (symmetric) propagation matrix; the
// sparse-dense order keeps propagation O(nnz * f_out).
Matrix gcn_forward(const SparseMatrix& s, const Matrix& x, const Matrix& w,
                   const std::vector<double>& b);
void gcn_backward(const SparseMatrix& s, const Matrix& x, const Matrix& w, const Matrix& dy,
                  Matrix* dx, Matrix* dw, std::vector<double>* db);

Matrix relu(const Matrix& x);
// dX from the pre-activation input
Matrix relu_backward(const Matrix& x_pre, const Matrix& dy);

Matrix silu(const Matrix& x);
Matrix silu_backward(const Matrix& x_pre, const Matrix& dy);

/// Inverted dropout: entries are 0 with probability `rate`, else
/// 1/(1-rate); the identity mask when not training.
Matrix dropout_mask(std::size_t rows, std::size_t cols, double rate, Rng& rng, bool training);

Matrix elementwise_mul(const Matrix& a, const Matrix& b);

/// Sinusoidal position embedding of an (arbitrary real) step value.
std::vector<double> time_embedding(double t, std::size_t dim);

// plain (not squared) Frobenius-norm loss: L = ||X - Xhat||_F
struct NormLoss {
  double value = 0.0;
  Matrix d_xhat;  // dL/dXhat
};
NormLoss frobenius_loss(const Matrix& x, const Matrix& xhat, bool squared = false);

}  // namespace gadiff
