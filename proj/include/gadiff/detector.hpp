#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gadiff/autoencoder.hpp"
#include "gadiff/diffusion.hpp"
#include "gadiff/graph.hpp"

namespace gadiff {

struct DetectConfig {
  double lambda = 1.0;    // guidance strength
  double t_detect = -1;   // corruption step; < 0 means T/5
  int sample_steps = 50;
  SampleMode mode = SampleMode::Ode;
  std::uint64_t seed = 42;
  int trials = 20;  // independent noise draws averaged into the score

  double resolve_t(int t_steps) const {
    return t_detect < 0 ? static_cast<double>(t_steps) / 5.0 : t_detect;
  }
  void validate(int t_steps) const;
};

/// Which noise estimate drives the reverse sampler. `Guided` combines both
/// denoisers; `Uncond`/`Cond` are the single-model ablation routes.
enum class EpsSource { Uncond, Cond, Guided };
EpsSource eps_source_from_string(const std::string& s);

struct ScoreReport {
  std::vector<double> scores;          // per-node anomaly score (trial mean)
  std::vector<std::uint32_t> ranking;  // node ids by descending score
  Matrix per_trial;                    // trials x n
};

/// eps_tilde = (1 + lambda) eps_uncond - lambda eps_cond.
Matrix guided_eps(const Matrix& z_t, double t, const std::vector<double>& c, double lambda,
                  const TrainedDenoiser& uncond, const TrainedDenoiser& cond);

/// Full inference pass: encode, corrupt to t_detect, reverse-sample with the
/// selected noise estimate, decode, and score each node by its weighted
/// reconstruction error, averaged over `trials` noise draws. t_detect = 0
/// short-circuits to plain autoencoder scoring (no corruption to undo).
ScoreReport detect(const AttributedGraph& g, const SparseMatrix& prop,
                   const GraphAutoencoder& ae, const TrainedDenoiser& uncond,
                   const TrainedDenoiser& cond, const DetectConfig& cfg,
                   EpsSource source = EpsSource::Guided);

/// Reconstruction scores straight from the autoencoder (no diffusion).
ScoreReport detect_ae_only(const AttributedGraph& g, const SparseMatrix& prop,
                           const GraphAutoencoder& ae);

std::vector<std::uint32_t> ranking_of(const std::vector<double>& scores);

struct AblationRow {
  std::string kind;  // "component" or "sweep"
  std::string label;
  double lambda = 0.0;
  double t_detect = 0.0;
  std::vector<double> scores;
};

/// Component rows (ae / diff / cond-diff / guided) plus lambda and t grids.
/// Pure compute; callers serialize the rows (the CLI writes ablation.csv).
std::vector<AblationRow> ablate(const AttributedGraph& g, const SparseMatrix& prop,
                                const GraphAutoencoder& ae, const TrainedDenoiser& uncond,
                                const TrainedDenoiser& cond, const DetectConfig& cfg,
                                const std::vector<double>& lambda_grid,
                                const std::vector<double>& t_grid);

}  // namespace gadiff
