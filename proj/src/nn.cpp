#include "gadiff/nn.hpp"

#include <cmath>

namespace gadiff {

std::size_t ParamStore::add(const std::string& name, std::vector<std::size_t> shape) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter: " + name);
  const std::size_t i = tensors_.size();
  names_.push_back(name);
  index_[name] = i;
  tensors_.emplace_back(shape);
  adam_m_.emplace_back(shape);
  adam_v_.emplace_back(shape);
  adam_step_.push_back(0);
  return i;
}

std::size_t ParamStore::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("unknown parameter: " + name);
  return it->second;
}

std::vector<Tensor> ParamStore::zero_grads() const {
  std::vector<Tensor> g;
  g.reserve(tensors_.size());
  for (const auto& t : tensors_) g.emplace_back(t.shape);
  return g;
}

AdamResult adam_step(ParamStore& params, const std::vector<Tensor>& grads, double lr, double beta1,
                     double beta2, double eps) {
  if (grads.size() != params.count()) throw std::invalid_argument("adam: gradient count mismatch");
  AdamResult res;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].numel() != params.at(i).numel())
      throw std::invalid_argument("adam: gradient shape mismatch for " + params.names()[i]);
    for (double g : grads[i].v)
      if (!std::isfinite(g)) ++res.nonfinite_entries;
  }
  if (res.nonfinite_entries > 0) {
    res.applied = false;
    return res;
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    auto& w = params.at(i).v;
    auto& m = params.adam_m(i).v;
    auto& v = params.adam_v(i).v;
    const std::uint64_t step = ++params.adam_step(i);
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    const auto& g = grads[i].v;
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
      v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      w[j] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
  return res;
}

void glorot_init(Tensor& w, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& x : w.v) x = rng.uniform(-bound, bound);
}

Matrix affine_forward(const Matrix& x, const Matrix& w, const std::vector<double>& b) {
  if (b.size() != w.cols()) throw std::invalid_argument("affine: bias size mismatch");
  Matrix y = matmul(x, w);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    double* yi = y.row(i);
    for (std::size_t j = 0; j < y.cols(); ++j) yi[j] += b[j];
  }
  return y;
}

void affine_backward(const Matrix& x, const Matrix& w, const Matrix& dy, Matrix* dx, Matrix* dw,
                     std::vector<double>* db) {
  if (dw) *dw = matmul_tn(x, dy);
  if (dx) *dx = matmul_nt(dy, w);
  if (db) {
    db->assign(dy.cols(), 0.0);
    for (std::size_t i = 0; i < dy.rows(); ++i)
      for (std::size_t j = 0; j < dy.cols(); ++j) (*db)[j] += dy(i, j);
  }
}

Matrix gcn_forward(const SparseMatrix& s, const Matrix& x, const Matrix& w,
                   const std::vector<double>& b) {
  Matrix y = spmm(s, matmul(x, w));
  for (std::size_t i = 0; i < y.rows(); ++i) {
    double* yi = y.row(i);
    for (std::size_t j = 0; j < y.cols(); ++j) yi[j] += b[j];
  }
  return y;
}

void gcn_backward(const SparseMatrix& s, const Matrix& x, const Matrix& w, const Matrix& dy,
                  Matrix* dx, Matrix* dw, std::vector<double>* db) {
  // Y = S(XW) + b, S symmetric: dP = S dY, dW = X^T dP, dX = dP W^T
  const Matrix dp = spmm(s, dy);
  if (dw) *dw = matmul_tn(x, dp);
  if (dx) *dx = matmul_nt(dp, w);
  if (db) {
    db->assign(dy.cols(), 0.0);
    for (std::size_t i = 0; i < dy.rows(); ++i)
      for (std::size_t j = 0; j < dy.cols(); ++j) (*db)[j] += dy(i, j);
  }
}

Matrix relu(const Matrix& x) {
  Matrix y = x;
  for (double& v : y.data())
    if (v < 0.0) v = 0.0;
  return y;
}

Matrix relu_backward(const Matrix& x_pre, const Matrix& dy) {
  Matrix dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (x_pre.data()[i] <= 0.0) dx.data()[i] = 0.0;
  return dx;
}

namespace {
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

Matrix silu(const Matrix& x) {
  Matrix y = x;
  for (double& v : y.data()) v = v * sigmoid(v);
  return y;
}

Matrix silu_backward(const Matrix& x_pre, const Matrix& dy) {
  Matrix dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const double x = x_pre.data()[i];
    const double s = sigmoid(x);
    dx.data()[i] *= s * (1.0 + x * (1.0 - s));
  }
  return dx;
}

Matrix dropout_mask(std::size_t rows, std::size_t cols, double rate, Rng& rng, bool training) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout rate must be in [0,1)");
  Matrix m(rows, cols, 1.0);
  if (!training || rate == 0.0) return m;
  const double keep = 1.0 / (1.0 - rate);
  for (double& v : m.data()) v = rng.uniform() < rate ? 0.0 : keep;
  return m;
}

Matrix elementwise_mul(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("elementwise_mul: shape mismatch");
  Matrix y = a;
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] *= b.data()[i];
  return y;
}

std::vector<double> time_embedding(double t, std::size_t dim) {
  if (dim % 2 != 0) throw std::invalid_argument("time embedding dim must be even");
  const std::size_t half = dim / 2;
  std::vector<double> e(dim);
  for (std::size_t i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) /
                                 static_cast<double>(half));
    e[i] = std::sin(t * freq);
    e[half + i] = std::cos(t * freq);
  }
  return e;
}

NormLoss frobenius_loss(const Matrix& x, const Matrix& xhat, bool squared) {
  if (!x.same_shape(xhat)) throw std::invalid_argument("frobenius_loss: shape mismatch");
  NormLoss out;
  out.d_xhat = Matrix(x.rows(), x.cols());
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = xhat.data()[i] - x.data()[i];
    out.d_xhat.data()[i] = diff;
    sq += diff * diff;
  }
  if (squared) {
    out.value = sq;
    for (double& v : out.d_xhat.data()) v *= 2.0;
    return out;
  }
  const double norm = std::sqrt(sq);
  out.value = norm;
  const double scale = norm > 0.0 ? 1.0 / norm : 0.0;  // subgradient 0 at the kink
  for (double& v : out.d_xhat.data()) v *= scale;
  return out;
}

}  // namespace gadiff
