#include "gadiff/denoiser.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gadiff {

void DenoiserConfig::validate() const {
  if (latent_dim < 1) throw std::invalid_argument("denoiser: latent_dim must be >= 1");
  if (depth < 2) throw std::invalid_argument("denoiser: depth must be >= 2");
  if (hidden < 2 || hidden % 2 != 0)
    throw std::invalid_argument("denoiser: hidden width must be even and >= 2");
}

namespace {
std::string wname(std::size_t i) { return "l" + std::to_string(i) + ".w"; }
std::string bname(std::size_t i) { return "l" + std::to_string(i) + ".b"; }
}  // namespace

DenoiserNet::DenoiserNet(const DenoiserConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(Rng(cfg_.seed).derive(0xd101));
  params_.seed = cfg_.seed;
  std::size_t in = cfg_.input_dim();
  for (std::size_t l = 0; l < cfg_.depth; ++l) {
    const std::size_t out = (l + 1 == cfg_.depth) ? cfg_.latent_dim : cfg_.hidden;
    const std::size_t wi = params_.add(wname(l), {in, out});
    glorot_init(params_.at(wi), in, out, rng);
    params_.add(bname(l), {out});
    in = out;
  }
}

DenoiserNet::DenoiserNet(const DenoiserConfig& cfg, ParamStore params)
    : cfg_(cfg), params_(std::move(params)) {
  cfg_.validate();
}

Matrix DenoiserNet::forward(const Matrix& z_t, const std::vector<double>& t,
                            const NoiseSchedule& sched, const std::vector<double>& c,
                            Cache* cache) const {
  const std::size_t n = z_t.rows(), k = cfg_.latent_dim;
  if (z_t.cols() != k) throw std::invalid_argument("denoiser: state width != latent_dim");
  if (t.size() != n) throw std::invalid_argument("denoiser: step vector size mismatch");
  if (cfg_.conditioned) {
    if (c.size() != k) throw std::invalid_argument("denoiser: conditioning width != latent_dim");
  } else if (!c.empty()) {
    throw std::invalid_argument("denoiser: conditioning given to unconditional net");
  }

  Matrix x(n, cfg_.input_dim());
  for (std::size_t i = 0; i < n; ++i) {
    const double sc = sched.input_scale(t[i]);
    for (std::size_t j = 0; j < k; ++j) x(i, j) = sc * z_t(i, j);
    if (cfg_.conditioned)
      for (std::size_t j = 0; j < k; ++j) x(i, k + j) = c[j];
  }

  if (cache) {
    cache->input = x;
    cache->pre.clear();
    cache->act.clear();
  }

  Matrix h = affine_forward(x, params_.at(wname(0)).as_matrix(), params_.at(bname(0)).v);
  {
    // shared frequencies; rows with equal steps reuse the same embedding
    const std::size_t half = cfg_.hidden / 2;
    std::vector<double> freq(half);
    for (std::size_t i = 0; i < half; ++i)
      freq[i] = std::exp(-std::log(10000.0) * static_cast<double>(i) /
                         static_cast<double>(half));
    std::vector<double> emb(cfg_.hidden);
    double emb_t = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < n; ++i) {
      if (t[i] != emb_t) {
        emb_t = t[i];
        for (std::size_t j = 0; j < half; ++j) {
          emb[j] = std::sin(emb_t * freq[j]);
          emb[half + j] = std::cos(emb_t * freq[j]);
        }
      }
      double* hi = h.row(i);
      for (std::size_t j = 0; j < cfg_.hidden; ++j) hi[j] += emb[j];
    }
  }

  for (std::size_t l = 0;; ++l) {
    if (cache) cache->pre.push_back(h);
    if (l + 1 == cfg_.depth) break;
    Matrix a = silu(h);
    if (cache) cache->act.push_back(a);
    h = affine_forward(a, params_.at(wname(l + 1)).as_matrix(), params_.at(bname(l + 1)).v);
  }
  if (cache) {
    // last entry of pre is the output (no activation)
    cache->valid = true;
  }
  return h;
}

Matrix DenoiserNet::forward(const Matrix& z_t, double t, const NoiseSchedule& sched,
                            const std::vector<double>& c) const {
  return forward(z_t, std::vector<double>(z_t.rows(), t), sched, c, nullptr);
}

std::vector<Tensor> DenoiserNet::backward(const Cache& cache, const Matrix& d_eps) const {
  if (!cache.valid) throw std::runtime_error("denoiser backward before forward");
  auto grads = params_.zero_grads();
  Matrix dh = d_eps;
  for (std::size_t l = cfg_.depth; l-- > 0;) {
    const Matrix& input = (l == 0) ? cache.input : cache.act[l - 1];
    Matrix dx, dw;
    std::vector<double> db;
    affine_backward(input, params_.at(wname(l)).as_matrix(), dh, l == 0 ? nullptr : &dx, &dw, &db);
    grads[params_.index_of(wname(l))].v = dw.data();
    grads[params_.index_of(bname(l))].v = db;
    if (l == 0) break;
    // through SiLU into the previous pre-activation (the time embedding is
    // an additive constant, so the gradient passes straight through)
    dh = silu_backward(cache.pre[l - 1], dx);
  }
  return grads;
}

}  // namespace gadiff
