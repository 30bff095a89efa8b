#include "gadiff/common_feature.hpp"

#include <cmath>
#include <stdexcept>

namespace gadiff {

WeightResult compute_weights(const Matrix& zhat, const std::vector<double>& c, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
  if (zhat.rows() == 0) throw std::invalid_argument("empty embedding");
  if (c.size() != zhat.cols()) throw std::invalid_argument("conditioning width mismatch");

  const std::size_t n = zhat.rows(), k = zhat.cols();
  double c_norm = 0.0;
  for (double x : c) c_norm += x * x;
  c_norm = std::sqrt(c_norm);

  WeightResult out;
  out.w.assign(n, 0.0);
  std::vector<double> logits(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double dot = 0.0, nrm = 0.0;
    const double* zi = zhat.row(i);
    for (std::size_t j = 0; j < k; ++j) {
      dot += zi[j] * c[j];
      nrm += zi[j] * zi[j];
    }
    nrm = std::sqrt(nrm);
    double cosv = 0.0;
    if (nrm == 0.0 || c_norm == 0.0) {
      ++out.zero_norm_count;
    } else {
      cosv = dot / (nrm * c_norm);
    }
    logits[i] = cosv / tau;
  }

  double mx = logits[0];
  for (double l : logits) mx = std::max(mx, l);
  double denom = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.w[i] = std::exp(logits[i] - mx);
    denom += out.w[i];
  }
  for (double& w : out.w) w /= denom;
  return out;
}

CommonFeature CommonFeature::init_from(const Matrix& z, double tau) {
  if (z.rows() == 0) throw std::invalid_argument("empty embedding");
  if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
  CommonFeature cf;
  cf.tau_ = tau;
  cf.c_ = column_means(z);
  cf.history_.push_back(cf.c_);
  return cf;
}

void CommonFeature::update(const Matrix& zhat) {
  if (frozen_) throw std::runtime_error("common feature is frozen");
  if (zhat.cols() != c_.size()) throw std::invalid_argument("embedding width mismatch");
  const WeightResult wr = compute_weights(zhat, c_, tau_);
  zero_cos_events_ += wr.zero_norm_count;
  std::vector<double> next(c_.size(), 0.0);
  for (std::size_t i = 0; i < zhat.rows(); ++i) {
    const double w = wr.w[i];
    const double* zi = zhat.row(i);
    for (std::size_t j = 0; j < c_.size(); ++j) next[j] += w * zi[j];
  }
  c_ = std::move(next);
  history_.push_back(c_);
}

CommonFeature CommonFeature::restore(std::vector<double> c, double tau, bool frozen,
                                     std::vector<std::vector<double>> history) {
  CommonFeature cf;
  cf.c_ = std::move(c);
  cf.tau_ = tau;
  cf.frozen_ = frozen;
  cf.history_ = std::move(history);
  return cf;
}

}  // namespace gadiff
