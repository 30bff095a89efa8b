#include "gadiff/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gadiff {

Kernel kernel_from_string(const std::string& s) {
  if (s == "edm_additive") return Kernel::EdmAdditive;
  if (s == "interp") return Kernel::Interp;
  throw std::invalid_argument("unknown kernel: " + s);
}

std::string to_string(Kernel k) {
  return k == Kernel::EdmAdditive ? "edm_additive" : "interp";
}

void NoiseSchedule::validate() const {
  if (t_steps < 1) throw std::invalid_argument("t_steps must be >= 1");
  if (sigma_max <= 0.0 || sigma_cap <= 0.0)
    throw std::invalid_argument("sigma bounds must be positive");
}

double NoiseSchedule::data_weight(double step) const {
  if (kernel == Kernel::EdmAdditive) return 1.0;
  return 1.0 - step / static_cast<double>(t_steps);
}

double NoiseSchedule::noise_weight(double step) const {
  if (kernel == Kernel::EdmAdditive) return sampler_sigma(step);
  return step / static_cast<double>(t_steps);
}

double NoiseSchedule::sampler_sigma(double step) const {
  const double u = step / static_cast<double>(t_steps);
  if (kernel == Kernel::EdmAdditive) return sigma_max * u;
  if (u >= 1.0) return sigma_cap;
  return std::min(u / (1.0 - u), sigma_cap);
}

double NoiseSchedule::scale_of_step(double step) const {
  if (kernel == Kernel::EdmAdditive) return 1.0;
  const double u = step / static_cast<double>(t_steps);
  return std::max(1.0 - u, 1.0 / (1.0 + sigma_cap));
}

double NoiseSchedule::step_of_sigma(double sigma) const {
  const double T = static_cast<double>(t_steps);
  double u;
  if (kernel == Kernel::EdmAdditive) {
    u = sigma / sigma_max;
  } else {
    u = sigma / (1.0 + sigma);
  }
  return std::clamp(u, 0.0, 1.0) * T;
}

double NoiseSchedule::input_scale(double step) const {
  if (kernel == Kernel::EdmAdditive) {
    const double s = sampler_sigma(step);
    return 1.0 / std::sqrt(1.0 + s * s);
  }
  const double u = std::min(step / static_cast<double>(t_steps), 1.0);
  return 1.0 / std::sqrt((1.0 - u) * (1.0 - u) + u * u);
}

ForwardNoise forward_noise(const Matrix& z0, double step, const NoiseSchedule& sched, Rng& rng) {
  sched.validate();
  if (step < 0.0 || step > static_cast<double>(sched.t_steps))
    throw std::invalid_argument("forward_noise: step out of range");
  ForwardNoise out;
  out.eps = Matrix(z0.rows(), z0.cols());
  for (double& e : out.eps.data()) e = rng.normal();
  out.z_t = Matrix(z0.rows(), z0.cols());
  if (sched.kernel == Kernel::EdmAdditive) {
    const double s = sched.sampler_sigma(step);
    for (std::size_t i = 0; i < z0.size(); ++i)
      out.z_t.data()[i] = z0.data()[i] + s * out.eps.data()[i];
  } else {
    const double u = step / static_cast<double>(sched.t_steps);
    for (std::size_t i = 0; i < z0.size(); ++i)
      out.z_t.data()[i] = (1.0 - u) * z0.data()[i] + u * out.eps.data()[i];
  }
  return out;
}

Matrix one_shot_estimate(const Matrix& z_t, double step, const Matrix& eps_hat,
                         const NoiseSchedule& sched) {
  if (!z_t.same_shape(eps_hat)) throw std::invalid_argument("one_shot_estimate: shape mismatch");
  Matrix z0(z_t.rows(), z_t.cols());
  if (sched.kernel == Kernel::EdmAdditive) {
    const double s = sched.sampler_sigma(step);
    for (std::size_t i = 0; i < z_t.size(); ++i)
      z0.data()[i] = z_t.data()[i] - s * eps_hat.data()[i];
  } else {
    const double u = std::min(step / static_cast<double>(sched.t_steps),
                              sched.sigma_cap / (1.0 + sched.sigma_cap));
    const double inv = 1.0 / (1.0 - u);
    for (std::size_t i = 0; i < z_t.size(); ++i)
      z0.data()[i] = (z_t.data()[i] - u * eps_hat.data()[i]) * inv;
  }
  return z0;
}

}  // namespace gadiff
