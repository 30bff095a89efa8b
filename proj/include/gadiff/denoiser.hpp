#pragma once

#include <cstdint>
#include <vector>

#include "gadiff/nn.hpp"
#include "gadiff/schedule.hpp"

namespace gadiff {

struct DenoiserConfig {
  std::size_t latent_dim = 8;
  std::size_t hidden = 16;
  std::size_t depth = 4;  // affine layers
  bool conditioned = false;
  std::uint64_t seed = 42;

  std::size_t input_dim() const { return conditioned ? 2 * latent_dim : latent_dim; }
  void validate() const;
};

/// Noise-prediction MLP with SiLU activations. The first affine layer is
/// followed by an additive sinusoidal embedding of the (real-valued) step;
/// conditioning, when enabled, is the common feature concatenated to the
/// corrupted state at the input. The state is pre-scaled by
/// sched.input_scale(t) so that input magnitude stays O(1) across noise
/// levels; the output is the raw noise estimate.
class DenoiserNet {
 public:
  DenoiserNet(const DenoiserConfig& cfg);
  DenoiserNet(const DenoiserConfig& cfg, ParamStore params);

  const DenoiserConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  struct Cache {
    Matrix input;                // scaled state (+ conditioning columns)
    std::vector<Matrix> pre;     // pre-activations per layer
    std::vector<Matrix> act;     // post-SiLU activations (size depth-1)
    bool valid = false;
  };

  /// t is per-row (training draws an independent step per sample; sampling
  /// passes a constant vector). `c` must be empty iff unconditioned.
  Matrix forward(const Matrix& z_t, const std::vector<double>& t, const NoiseSchedule& sched,
                 const std::vector<double>& c, Cache* cache = nullptr) const;

  /// Convenience overload for a shared step value.
  Matrix forward(const Matrix& z_t, double t, const NoiseSchedule& sched,
                 const std::vector<double>& c) const;

  std::vector<Tensor> backward(const Cache& cache, const Matrix& d_eps) const;

 private:
  DenoiserConfig cfg_;
  ParamStore params_;
};

}  // namespace gadiff
