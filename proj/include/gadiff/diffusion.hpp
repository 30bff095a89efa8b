#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gadiff/common_feature.hpp"
#include "gadiff/denoiser.hpp"
#include "gadiff/schedule.hpp"

namespace gadiff {

struct DmConfig {
  std::size_t hidden = 16;
  std::size_t depth = 4;
  std::size_t epochs = 800;
  double lr = 0.005;
  std::size_t patience = 50;   // early stop: epochs without min_delta improvement
  double min_delta = 1e-4;
  double tau = 1.0;            // common-feature temperature (unconditional run)
  std::uint64_t seed = 42;
};

/// One stochastic evaluation of the denoising score-matching objective:
/// each row draws an independent step in [1, T] and fresh noise; the loss
/// is the batch mean of ||eps_hat - eps||^2.
struct DmLossResult {
  double value = 0.0;
  Matrix d_eps_hat;          // dLoss/dEpsHat (for training)
  DenoiserNet::Cache cache;  // forward cache (for training)
};

DmLossResult dm_loss(const DenoiserNet& net, const Matrix& z0, const NoiseSchedule& sched,
                     Rng& rng, const std::vector<double>& c);

/// A trained denoiser plus the latent standardization it was trained under.
struct TrainedDenoiser {
  DenoiserNet net;
  NoiseSchedule sched;
  std::vector<double> lat_mu, lat_sd;  // per-dimension; applied before diffusion
  std::vector<double> epoch_loss;
  CommonFeature cf;  // populated by the unconditional trainer; copied to the conditional
};

Matrix standardize_rows(const Matrix& z, const std::vector<double>& mu,
                        const std::vector<double>& sd);
Matrix destandardize_rows(const Matrix& z, const std::vector<double>& mu,
                          const std::vector<double>& sd);
void latent_moments(const Matrix& z, std::vector<double>* mu, std::vector<double>* sd);

/// Full-batch Adam on dm_loss with patience-based early stopping. The
/// unconditional trainer interleaves one common-feature update per epoch,
/// using a single-evaluation reconstruction at the mid-schedule step.
TrainedDenoiser train_dm_uncond(const Matrix& z_raw, const NoiseSchedule& sched,
                                const DmConfig& cfg);

/// The conditional model shares the unconditional parameters: its weights
/// start from `uncond`'s with zero-initialized conditioning columns (so the
/// two nets coincide exactly before conditioning is learned) and are then
/// fine-tuned on the conditioned objective.
TrainedDenoiser train_dm_cond(const Matrix& z_raw, const NoiseSchedule& sched, const DmConfig& cfg,
                              const CommonFeature& cf, const DenoiserNet* warm_start = nullptr);

enum class SampleMode { Ode, Sde };
SampleMode sample_mode_from_string(const std::string& s);
std::string to_string(SampleMode m);

/// Noise estimate at (state, step); wraps a single net or a guided pair.
using EpsFn = std::function<Matrix(const Matrix& z, double t)>;

/// Integrates the reverse process from sampler_sigma(start_step) down to 0
/// over `steps` sub-steps on a Karras-spaced sigma ladder. Ode mode is
/// Heun's 2nd-order probability-flow integrator (deterministic); Sde mode is
/// Euler-Maruyama with drift -2 sigma' sigma grad log p and diffusion
/// sqrt(2 sigma' sigma), score taken as -eps_hat / sigma. For the interp
/// kernel the integration runs in the de-scaled frame (see NoiseSchedule).
Matrix reverse_sample(const Matrix& z_start, double start_step, const EpsFn& eps,
                      const NoiseSchedule& sched, int steps, std::uint64_t seed, SampleMode mode);

// checkpoint io; `cf` travels with both denoisers
void save_denoiser(const std::string& path, const TrainedDenoiser& dn);
TrainedDenoiser load_denoiser(const std::string& path);

}  // namespace gadiff
