#pragma once

#include <cstdint>
#include <string>

#include "gadiff/matrix.hpp"
#include "gadiff/rng.hpp"

namespace gadiff {

/// Forward-corruption conventions. `EdmAdditive` is z_t = z_0 + sigma(t) eps
/// with sigma linear up to sigma_max. `Interp` mixes data and noise with
/// weights (1 - t/T, t/T), so t = T is pure noise.
enum class Kernel { EdmAdditive, Interp };

Kernel kernel_from_string(const std::string& s);
std::string to_string(Kernel k);

/// Discrete corruption ladder with T steps plus the step -> noise-level map
/// used by the reverse sampler. For the interp kernel the sampler works in
/// the de-scaled frame y = z / (1-u): y = z_0 + [u/(1-u)] eps, so
/// sampler_sigma is u/(1-u) (capped) and scale is 1-u.
struct NoiseSchedule {
  int t_steps = 500;
  Kernel kernel = Kernel::Interp;
  double sigma_max = 80.0;  // edm_additive top noise level
  double sigma_cap = 80.0;  // interp: cap of u/(1-u) near u = 1

  void validate() const;

  double data_weight(double step) const;   // interp: 1-u; additive: 1
  double noise_weight(double step) const;  // interp: u; additive: sigma(step)

  /// Noise level in the additive sampling frame; nondecreasing in step,
  /// zero at step 0.
  double sampler_sigma(double step) const;

  /// State = scale * (sampling-frame state). 1 for the additive kernel.
  double scale_of_step(double step) const;

  /// Inverse of sampler_sigma (clamped to [0, T]).
  double step_of_sigma(double sigma) const;

  /// Denoiser input normalization 1/sqrt(Var[z_t]) assuming unit-variance
  /// data, which keeps the MLP input magnitude O(1) at every noise level.
  double input_scale(double step) const;
};

struct ForwardNoise {
  Matrix z_t;
  Matrix eps;
};

/// Corrupts z0 at the given step, returning the noise for loss computation.
/// step 0 returns z0 exactly under both kernels.
ForwardNoise forward_noise(const Matrix& z0, double step, const NoiseSchedule& sched, Rng& rng);

/// Single-evaluation reconstruction estimate from a corrupted state and a
/// noise prediction (the t = step slice of the reverse process).
Matrix one_shot_estimate(const Matrix& z_t, double step, const Matrix& eps_hat,
                         const NoiseSchedule& sched);

}  // namespace gadiff
