#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gadiff/matrix.hpp"
#include "gadiff/sparse.hpp"

namespace gadiff {

/// Static attributed graph: node features, an undirected unweighted edge
/// list, and optional binary anomaly labels. Immutable after construction;
/// operations that "modify" a graph return a new one.
struct AttributedGraph {
  std::size_t n = 0;  // node count
  std::size_t d = 0;  // feature dimension
  Matrix features;    // n x d
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // u < v, sorted, unique
  std::vector<std::uint8_t> labels;                            // empty, or size n with 0/1

  bool has_labels() const { return !labels.empty(); }
  std::size_t num_outliers() const {
    std::size_t c = 0;
    for (auto l : labels) c += l;
    return c;
  }
};

struct LoadStats {
  std::size_t dropped_self_loops = 0;
  std::size_t dropped_duplicate_edges = 0;
  std::size_t constant_feature_dims = 0;
  bool standardized = false;
};

/// Reads `edges.tsv` (+`features.csv`, optional `labels.csv`) from a dataset
/// directory. Self-loops and duplicate/reversed duplicates are dropped and
/// counted in `stats`. By default features are standardized per dimension
/// (zero mean, unit variance over nodes); constant dimensions become zero.
AttributedGraph load_graph(const std::string& dir, bool standardize = true,
                           LoadStats* stats = nullptr);

/// Writes the same layout load_graph reads. Features are written as given.
void save_graph(const AttributedGraph& g, const std::string& dir);

void standardize_features(AttributedGraph& g, std::size_t* constant_dims = nullptr);

/// Plain 0/1 adjacency (zero diagonal) in CSR form.
SparseMatrix adjacency_csr(const AttributedGraph& g);

/// Symmetric GCN propagation matrix D~^{-1/2} (A+I) D~^{-1/2} where D~ is
/// the degree matrix of A+I. Isolated nodes end up with a single 1.0
/// self-loop entry.
SparseMatrix normalize_adjacency(const AttributedGraph& g);

/// Plants labeled outliers: `n_struct` dense cliques of `clique_size` nodes
/// each (structural), and `n_ctx` nodes whose feature row is replaced by the
/// most Euclidean-distant row among `swap_pool` sampled candidates
/// (contextual). Existing labels are overwritten. Deterministic per seed.
AttributedGraph inject_outliers(const AttributedGraph& g, std::size_t n_struct,
                                std::size_t n_ctx, std::size_t clique_size,
                                std::size_t swap_pool, std::uint64_t seed);

/// Synthetic base graph: a planted-partition graph whose communities carry
/// distinct Gaussian feature centroids. All labels zero.
struct SynthConfig {
  std::size_t nodes = 1000;
  std::size_t dim = 20;
  std::size_t communities = 5;
  double avg_degree = 8.0;
  double mix = 0.05;      // fraction of edge mass across communities
  double spread = 2.0;    // centroid scale
  double noise = 1.0;     // per-node feature noise
  std::uint64_t seed = 1;
};

AttributedGraph synth_graph(const SynthConfig& cfg);

/// Relabels nodes by `perm` (new_id = perm[old_id]); used by the
/// permutation-equivariance checks.
AttributedGraph permute_graph(const AttributedGraph& g, const std::vector<std::uint32_t>& perm);

}  // namespace gadiff
