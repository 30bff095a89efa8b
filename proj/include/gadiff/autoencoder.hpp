#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gadiff/graph.hpp"
#include "gadiff/nn.hpp"

namespace gadiff {

struct AeConfig {
  std::size_t latent_dim = 8;
  std::size_t hidden_dim = 0;  // 0 = 2 * latent_dim
  std::size_t epochs = 300;
  double dropout = 0.3;
  double lr = 0.01;
  double alpha = 0.8;         // feature/structure weight in the loss
  bool squared_norm = false;  // squared-Frobenius objective variant
  std::uint64_t seed = 42;

  std::size_t hidden() const { return hidden_dim == 0 ? 2 * latent_dim : hidden_dim; }
  void validate() const;
};

/// Per-node latent vectors plus provenance.
struct LatentEmbedding {
  Matrix z;  // n x k
  std::string source;
};

struct AeLoss {
  double value = 0.0;
  double feat_term = 0.0;
  double stru_term = 0.0;
  std::vector<double> per_node;  // alpha*||x_v-xhat_v|| + (1-alpha)*||a_v-ahat_v||
};

/// Weighted feature+structure reconstruction loss over dense inputs.
/// Intended for tests and small graphs; training uses a streaming variant
/// that never materializes Ahat.
AeLoss ae_loss(const Matrix& x, const SparseMatrix& a, const Matrix& xhat, const Matrix& ahat,
               double alpha, bool squared = false);

/// Two-layer GCN encoder, two-layer GCN feature decoder, one-layer GCN +
/// dot-product structure decoder. The structure path is skipped entirely
/// when alpha == 1.
class GraphAutoencoder {
 public:
  GraphAutoencoder(const AeConfig& cfg, std::size_t feat_dim);
  GraphAutoencoder(const AeConfig& cfg, std::size_t feat_dim, ParamStore params);

  const AeConfig& config() const { return cfg_; }
  std::size_t feat_dim() const { return d_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  /// z = GCN2(GCN1(X)); ReLU after layer 1 only. Dropout only when training.
  Matrix encode(const SparseMatrix& prop, const Matrix& x, bool training = false,
                Rng* rng = nullptr) const;

  Matrix decode_features(const SparseMatrix& prop, const Matrix& z, bool training = false,
                         Rng* rng = nullptr) const;

  /// Structure embedding z_s; the reconstructed adjacency is z_s z_s^T.
  Matrix decode_structure_embedding(const SparseMatrix& prop, const Matrix& z) const;

  /// Dense (Xhat, Ahat) pair. Ahat is empty when alpha == 1.
  std::pair<Matrix, Matrix> decode(const SparseMatrix& prop, const Matrix& z) const;

  struct TrainResult {
    std::vector<double> epoch_loss;
    LatentEmbedding embedding;  // evaluation-mode latents after training
  };

  /// Full-batch Adam for cfg.epochs epochs (no early stop).
  TrainResult train(const AttributedGraph& g, const SparseMatrix& prop);

  struct Step {
    double loss = 0.0;
    std::vector<Tensor> grads;  // aligned with params()
  };

  /// One loss evaluation with gradients for every parameter. Dropout masks
  /// come from `dropout_rng`; pass nullptr for a deterministic pass.
  Step loss_and_grads(const AttributedGraph& g, const SparseMatrix& prop,
                      Rng* dropout_rng = nullptr);

  /// Per-node reconstruction scores of a (possibly resampled) latent matrix.
  /// Structure terms are computed row-streamed, O(n*k) memory.
  AeLoss score_nodes(const AttributedGraph& g, const SparseMatrix& prop, const Matrix& z) const;

  void save(const std::string& path) const;
  static GraphAutoencoder load(const std::string& path);

  /// Counts structure-decoder row evaluations; stays 0 when alpha == 1.
  std::uint64_t structure_rows_computed() const { return stru_rows_; }

 private:
  AeConfig cfg_;
  std::size_t d_ = 0;
  ParamStore params_;
  mutable std::uint64_t stru_rows_ = 0;
};

}  // namespace gadiff
