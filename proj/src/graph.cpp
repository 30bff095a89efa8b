#include "gadiff/graph.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gadiff/rng.hpp"

namespace gadiff {

namespace fs = std::filesystem;

namespace {

std::vector<std::pair<std::uint32_t, std::uint32_t>> canonical_edges(
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges, std::size_t n,
    std::size_t* self_loops, std::size_t* duplicates) {
  std::size_t loops = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) throw std::runtime_error("edge endpoint out of range");
    if (u == v) {
      ++loops;
      continue;
    }
    if (u > v) std::swap(u, v);
    out.emplace_back(u, v);
  }
  std::sort(out.begin(), out.end());
  const std::size_t before = out.size();
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (self_loops) *self_loops = loops;
  if (duplicates) *duplicates = before - out.size();
  return out;
}

}  // namespace

AttributedGraph load_graph(const std::string& dir, bool standardize, LoadStats* stats) {
  const fs::path base(dir);
  const fs::path edges_path = base / "edges.tsv";
  const fs::path feat_path = base / "features.csv";
  const fs::path label_path = base / "labels.csv";

  if (!fs::exists(edges_path)) throw std::runtime_error("missing " + edges_path.string());
  if (!fs::exists(feat_path)) throw std::runtime_error("missing " + feat_path.string());

  AttributedGraph g;

  // features.csv fixes n and d
  {
    std::ifstream in(feat_path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<double> row;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
      if (!rows.empty() && row.size() != rows[0].size())
        throw std::runtime_error("ragged feature row at line " + std::to_string(rows.size() + 1));
      rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("empty features.csv");
    g.n = rows.size();
    g.d = rows[0].size();
    g.features = Matrix::from_rows(rows);
  }

  {
    std::ifstream in(edges_path);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::stringstream ss(line);
      long long u = -1, v = -1;
      ss >> u >> v;
      if (u < 0 || v < 0 || ss.fail())
        throw std::runtime_error("bad edge line " + std::to_string(lineno));
      edges.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
    }
    std::size_t loops = 0, dups = 0;
    g.edges = canonical_edges(std::move(edges), g.n, &loops, &dups);
    if (stats) {
      stats->dropped_self_loops = loops;
      stats->dropped_duplicate_edges = dups;
    }
  }

  if (fs::exists(label_path)) {
    std::ifstream in(label_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line != "0" && line != "1")
        throw std::runtime_error("label value outside {0,1}: '" + line + "'");
      g.labels.push_back(line == "1" ? 1 : 0);
    }
    if (g.labels.size() != g.n) throw std::runtime_error("labels.csv length != node count");
  }

  if (standardize) {
    std::size_t const_dims = 0;
    standardize_features(g, &const_dims);
    if (stats) {
      stats->standardized = true;
      stats->constant_feature_dims = const_dims;
    }
  }
  return g;
}

void save_graph(const AttributedGraph& g, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base(dir);
  {
    std::ofstream out(base / "edges.tsv");
    for (auto [u, v] : g.edges) out << u << '\t' << v << '\n';
  }
  {
    std::ofstream out(base / "features.csv");
    char buf[32];
    for (std::size_t i = 0; i < g.n; ++i) {
      for (std::size_t j = 0; j < g.d; ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", g.features(i, j));
        out << (j ? "," : "") << buf;
      }
      out << '\n';
    }
  }
  if (g.has_labels()) {
    std::ofstream out(base / "labels.csv");
    for (auto l : g.labels) out << int(l) << '\n';
  }
}

void standardize_features(AttributedGraph& g, std::size_t* constant_dims) {
  const auto mu = column_means(g.features);
  const auto sd = column_stddevs(g.features, mu);
  std::size_t n_const = 0;
  for (std::size_t j = 0; j < g.d; ++j) {
    if (sd[j] == 0.0) ++n_const;
    const double scale = sd[j] == 0.0 ? 0.0 : 1.0 / sd[j];
    for (std::size_t i = 0; i < g.n; ++i) g.features(i, j) = (g.features(i, j) - mu[j]) * scale;
  }
  if (constant_dims) *constant_dims = n_const;
}

SparseMatrix adjacency_csr(const AttributedGraph& g) {
  SparseMatrix s;
  s.n = g.n;
  std::vector<std::vector<std::uint32_t>> adj(g.n);
  for (auto [u, v] : g.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  s.row_ptr.assign(g.n + 1, 0);
  for (std::size_t i = 0; i < g.n; ++i) {
    std::sort(adj[i].begin(), adj[i].end());
    s.row_ptr[i + 1] = s.row_ptr[i] + adj[i].size();
  }
  s.col.reserve(s.row_ptr[g.n]);
  for (std::size_t i = 0; i < g.n; ++i)
    for (auto j : adj[i]) s.col.push_back(j);
  s.val.assign(s.col.size(), 1.0);
  return s;
}

SparseMatrix normalize_adjacency(const AttributedGraph& g) {
  SparseMatrix s;
  s.n = g.n;
  // A + I, then symmetric degree normalization
  std::vector<std::vector<std::uint32_t>> adj(g.n);
  for (std::size_t i = 0; i < g.n; ++i) adj[i].push_back(static_cast<std::uint32_t>(i));
  for (auto [u, v] : g.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<double> inv_sqrt_deg(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    std::sort(adj[i].begin(), adj[i].end());
    inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(adj[i].size()));
  }
  s.row_ptr.assign(g.n + 1, 0);
  for (std::size_t i = 0; i < g.n; ++i) s.row_ptr[i + 1] = s.row_ptr[i] + adj[i].size();
  s.col.reserve(s.row_ptr[g.n]);
  s.val.reserve(s.row_ptr[g.n]);
  for (std::size_t i = 0; i < g.n; ++i)
    for (auto j : adj[i]) {
      s.col.push_back(j);
      s.val.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    }
  return s;
}

AttributedGraph inject_outliers(const AttributedGraph& g, std::size_t n_struct,
                                std::size_t n_ctx, std::size_t clique_size,
                                std::size_t swap_pool, std::uint64_t seed) {
  if (n_struct > 0 && clique_size < 2) throw std::invalid_argument("clique_size must be >= 2");
  const std::size_t needed = n_struct * clique_size + n_ctx;
  if (needed > g.n) throw std::invalid_argument("outlier counts exceed node count");

  AttributedGraph out = g;
  out.labels.assign(g.n, 0);
  if (needed == 0) {
    out.labels = g.labels;  // all-zero counts: identity
    return out;
  }

  Rng rng(seed);

  // draw `needed` distinct nodes via partial Fisher-Yates
  std::vector<std::uint32_t> pool(g.n);
  for (std::size_t i = 0; i < g.n; ++i) pool[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = 0; i < needed; ++i) {
    const std::size_t j = i + rng.index(g.n - i);
    std::swap(pool[i], pool[j]);
  }

  std::set<std::pair<std::uint32_t, std::uint32_t>> edge_set(out.edges.begin(), out.edges.end());
  std::size_t next = 0;
  for (std::size_t c = 0; c < n_struct; ++c) {
    for (std::size_t a = 0; a < clique_size; ++a) {
      const std::uint32_t u = pool[next + a];
      out.labels[u] = 1;
      for (std::size_t b = a + 1; b < clique_size; ++b) {
        std::uint32_t x = u, y = pool[next + b];
        if (x > y) std::swap(x, y);
        edge_set.emplace(x, y);
      }
    }
    next += clique_size;
  }

  for (std::size_t c = 0; c < n_ctx; ++c) {
    const std::uint32_t u = pool[next++];
    out.labels[u] = 1;
    double best_dist = -1.0;
    std::uint32_t best = u;
    const std::size_t pool_sz = swap_pool == 0 ? 1 : swap_pool;
    for (std::size_t t = 0; t < pool_sz; ++t) {
      const std::uint32_t cand = static_cast<std::uint32_t>(rng.index(g.n));
      double dist = 0.0;
      for (std::size_t j = 0; j < g.d; ++j) {
        const double dx = g.features(u, j) - g.features(cand, j);
        dist += dx * dx;
      }
      if (dist > best_dist) {
        best_dist = dist;
        best = cand;
      }
    }
    for (std::size_t j = 0; j < g.d; ++j) out.features(u, j) = g.features(best, j);
  }

  out.edges.assign(edge_set.begin(), edge_set.end());
  return out;
}

AttributedGraph synth_graph(const SynthConfig& cfg) {
  if (cfg.nodes == 0 || cfg.dim == 0 || cfg.communities == 0)
    throw std::invalid_argument("synth_graph: zero-sized config");
  Rng rng(cfg.seed);
  AttributedGraph g;
  g.n = cfg.nodes;
  g.d = cfg.dim;
  g.features = Matrix(g.n, g.d);
  g.labels.assign(g.n, 0);

  const std::size_t k = cfg.communities;
  std::vector<std::size_t> comm(g.n);
  for (std::size_t i = 0; i < g.n; ++i) comm[i] = i % k;

  Matrix centroids(k, g.d);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < g.d; ++j) centroids(c, j) = cfg.spread * rng.normal();
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.d; ++j)
      g.features(i, j) = centroids(comm[i], j) + cfg.noise * rng.normal();

  // planted partition: per-pair Bernoulli with within/across rates chosen to
  // hit avg_degree with `mix` of the mass across communities
  const double n_in = static_cast<double>(g.n) / static_cast<double>(k) - 1.0;
  const double n_out = static_cast<double>(g.n) - 1.0 - n_in;
  const double p_in = std::min(1.0, cfg.avg_degree * (1.0 - cfg.mix) / std::max(1.0, n_in));
  const double p_out = std::min(1.0, cfg.avg_degree * cfg.mix / std::max(1.0, n_out));
  for (std::uint32_t u = 0; u + 1 < g.n; ++u)
    for (std::uint32_t v = u + 1; v < g.n; ++v) {
      const double p = comm[u] == comm[v] ? p_in : p_out;
      if (rng.uniform() < p) g.edges.emplace_back(u, v);
    }
  return g;
}

AttributedGraph permute_graph(const AttributedGraph& g, const std::vector<std::uint32_t>& perm) {
  if (perm.size() != g.n) throw std::invalid_argument("permutation size mismatch");
  AttributedGraph out;
  out.n = g.n;
  out.d = g.d;
  out.features = Matrix(g.n, g.d);
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.d; ++j) out.features(perm[i], j) = g.features(i, j);
  if (g.has_labels()) {
    out.labels.assign(g.n, 0);
    for (std::size_t i = 0; i < g.n; ++i) out.labels[perm[i]] = g.labels[i];
  }
  out.edges.reserve(g.edges.size());
  for (auto [u, v] : g.edges) {
    std::uint32_t a = perm[u], b = perm[v];
    if (a > b) std::swap(a, b);
    out.edges.emplace_back(a, b);
  }
  std::sort(out.edges.begin(), out.edges.end());
  return out;
}

}  // namespace gadiff
