#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gadiff/detector.hpp"
#include "gadiff/graph.hpp"
#include "gadiff/metrics.hpp"
#include "gadiff/run_config.hpp"

namespace gadiff {

// The command layer is plain functions over RunConfig so tests drive them
// directly; the binary only parses flags.

struct GenOptions {
  SynthConfig base;
  std::size_t n_struct = 3;
  std::size_t clique = 10;
  std::size_t n_ctx = 30;
  std::size_t swap_pool = 50;
  std::string out_dir;
};

struct GenSummary {
  std::size_t nodes = 0, edges = 0, dim = 0, outliers = 0;
  double ratio = 0.0;
};

GenSummary cmd_gen(const GenOptions& opt);

std::string cmd_train_ae(const RunConfig& cfg, const std::string& out_path);

/// kind: "uncond" trains the first model and refines the common feature;
/// "cond" consumes the frozen feature from `uncond_path`.
std::string cmd_train_dm(const RunConfig& cfg, const std::string& ae_path,
                         const std::string& kind, const std::string& uncond_path,
                         const std::string& out_path);

struct DetectOutput {
  std::string scores_path;
  ScoreReport report;
};

DetectOutput cmd_detect(const RunConfig& cfg, const std::string& ae_path,
                        const std::string& uncond_path, const std::string& cond_path,
                        const std::string& component, const std::string& out_dir);

/// Reads scores.csv, joins labels from the dataset directory, writes
/// key=value metrics plus a CSV row. Returns nullopt when no labels exist.
std::optional<MetricSummary> cmd_eval(const std::string& scores_path, const std::string& data_dir,
                                      const std::string& out_dir, const std::string& dataset,
                                      const std::string& method, std::uint64_t seed);

struct PipelineResult {
  std::vector<MetricSummary> per_seed;  // empty when the dataset is unlabeled
  std::vector<std::string> scores_paths;
  std::vector<std::pair<std::string, double>> stage_seconds;  // accumulated over seeds
};

/// gen-layout dataset -> AE -> unconditional DM (+ common feature) -> freeze
/// -> conditional DM -> detect -> metrics, checkpointed per stage under
/// run_dir/seed_<s>/ and resumable.
PipelineResult cmd_pipeline(const RunConfig& cfg, const std::string& run_dir, bool resume,
                            const std::string& component);

void cmd_ablate(const RunConfig& cfg, const std::string& run_dir,
                const std::vector<double>& lambda_grid, const std::vector<double>& t_grid);

struct BenchRow {
  std::size_t nodes = 0;
  double ae_alpha1_s = 0.0;   // AE epochs without the structure term
  double ae_struct_s = 0.0;   // structure-loss epochs (the n^2 term), timed separately
  double dm_train_s = 0.0;
  double sample_s = 0.0;      // one 50-step guided sampling pass
  double peak_rss_mb = 0.0;
  std::uint64_t alpha1_struct_rows = 0;  // must stay 0
};

struct BenchResult {
  std::vector<BenchRow> rows;
  double dm_fit_exponent = 0.0;  // slope of log(dm_train+sample) vs log(n)
};

BenchResult cmd_bench(const RunConfig& cfg, const std::vector<std::size_t>& sizes,
                      const std::string& out_dir);

// small shared helpers
void write_scores_csv(const std::string& path, const ScoreReport& rep);
std::vector<double> read_scores_csv(const std::string& path);
std::uint64_t file_content_hash(const std::string& path);

}  // namespace gadiff
