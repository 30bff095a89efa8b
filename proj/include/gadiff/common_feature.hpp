#pragma once

#include <cstdint>
#include <vector>

#include "gadiff/matrix.hpp"

namespace gadiff {

struct WeightResult {
  std::vector<double> w;             // probability vector over nodes
  std::size_t zero_norm_count = 0;   // cosines defined as 0 for zero-norm inputs
};

/// w = softmax(cos(zhat_v, c) / tau). tau must be positive; zero-norm rows
/// (or a zero-norm c) get cosine 0 and are counted.
WeightResult compute_weights(const Matrix& zhat, const std::vector<double>& c, double tau);

/// The conditioning vector c with its update trajectory. Starts as the
/// column mean of the latent embedding and is refined by cosine-weighted
/// averages of reconstructed embeddings; freezing makes it immutable.
class CommonFeature {
 public:
  CommonFeature() = default;

  static CommonFeature init_from(const Matrix& z, double tau = 1.0);

  const std::vector<double>& value() const { return c_; }
  double tau() const { return tau_; }
  bool frozen() const { return frozen_; }
  const std::vector<std::vector<double>>& history() const { return history_; }
  std::size_t zero_cosine_events() const { return zero_cos_events_; }

  /// c_next = sum_v w_v zhat_v with w from compute_weights. Throws if frozen.
  void update(const Matrix& zhat);

  /// Idempotent; after freezing, update() is rejected.
  void freeze() { frozen_ = true; }

  // for (de)serialization
  static CommonFeature restore(std::vector<double> c, double tau, bool frozen,
                               std::vector<std::vector<double>> history);

 private:
  std::vector<double> c_;
  double tau_ = 1.0;
  bool frozen_ = false;
  std::vector<std::vector<double>> history_;
  std::size_t zero_cos_events_ = 0;
};

}  // namespace gadiff
