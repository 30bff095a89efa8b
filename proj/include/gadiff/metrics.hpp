#pragma once

#include <cstdint>
#include <vector>

namespace gadiff {

struct LabeledScores {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;  // 0/1, 1 = anomaly

  std::size_t n_pos() const {
    std::size_t c = 0;
    for (auto l : labels) c += l;
    return c;
  }
  void validate_two_class() const;
};

/// Probability that a random positive outranks a random negative; ties
/// count one half (Mann-Whitney formulation).
double roc_auc(const LabeledScores& ls);

/// Step-sum average precision over descending-score cut points, ties broken
/// by node id.
double average_precision(const LabeledScores& ls);

/// Fraction of all positives inside the top-k by score (ties by node id).
/// k = 0 defaults to the positive count.
double recall_at_k(const LabeledScores& ls, std::size_t k = 0);

/// Area under the precision-recall curve by trapezoidal integration over
/// distinct thresholds, anchored at (recall 0, precision 1).
double auprc(const LabeledScores& ls);

struct MetricSummary {
  double roc_auc = 0.0;
  double average_precision = 0.0;
  double recall_at_k = 0.0;
  double auprc = 0.0;
};

MetricSummary all_metrics(const LabeledScores& ls);

}  // namespace gadiff
