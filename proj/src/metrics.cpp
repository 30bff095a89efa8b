#include "gadiff/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace gadiff {

namespace {

// node ids ordered by (score desc, id asc)
std::vector<std::size_t> order_desc(const std::vector<double>& scores) {
  std::vector<std::size_t> idx(scores.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return idx;
}

}  // namespace

void LabeledScores::validate_two_class() const {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores/labels length mismatch");
  const std::size_t p = n_pos();
  if (p == 0 || p == labels.size())
    throw std::invalid_argument("ranking metrics need both classes present");
}

double roc_auc(const LabeledScores& ls) {
  ls.validate_two_class();
  const std::size_t n = ls.scores.size();
  // average rank per tied group, then the Mann-Whitney statistic
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return ls.scores[a] < ls.scores[b]; });
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && ls.scores[idx[j + 1]] == ls.scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);  // 1-based
    for (std::size_t t = i; t <= j; ++t)
      if (ls.labels[idx[t]]) pos_rank_sum += avg_rank;
    i = j + 1;
  }
  const double np = static_cast<double>(ls.n_pos());
  const double nn = static_cast<double>(n) - np;
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double average_precision(const LabeledScores& ls) {
  if (ls.scores.size() != ls.labels.size())
    throw std::invalid_argument("scores/labels length mismatch");
  const std::size_t np = ls.n_pos();
  if (np == 0) throw std::invalid_argument("average precision needs at least one positive");
  const auto idx = order_desc(ls.scores);
  double ap = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (ls.labels[idx[k]]) {
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  return ap / static_cast<double>(np);
}

double recall_at_k(const LabeledScores& ls, std::size_t k) {
  if (ls.scores.size() != ls.labels.size())
    throw std::invalid_argument("scores/labels length mismatch");
  const std::size_t np = ls.n_pos();
  if (np == 0) throw std::invalid_argument("recall@k needs at least one positive");
  if (k == 0) k = np;
  if (k > ls.scores.size()) throw std::invalid_argument("k out of range");
  const auto idx = order_desc(ls.scores);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += ls.labels[idx[i]];
  return static_cast<double>(hits) / static_cast<double>(np);
}

double auprc(const LabeledScores& ls) {
  if (ls.scores.size() != ls.labels.size())
    throw std::invalid_argument("scores/labels length mismatch");
  const std::size_t np = ls.n_pos();
  if (np == 0) throw std::invalid_argument("auprc needs at least one positive");
  const auto idx = order_desc(ls.scores);

  double area = 0.0;
  double prev_recall = 0.0, prev_precision = 1.0;  // curve anchor
  std::size_t hits = 0;
  std::size_t k = 0;
  while (k < idx.size()) {
    // advance over one distinct-threshold group
    std::size_t j = k;
    while (j + 1 < idx.size() && ls.scores[idx[j + 1]] == ls.scores[idx[k]]) ++j;
    for (std::size_t t = k; t <= j; ++t) hits += ls.labels[idx[t]];
    const double recall = static_cast<double>(hits) / static_cast<double>(np);
    const double precision = static_cast<double>(hits) / static_cast<double>(j + 1);
    area += (recall - prev_recall) * 0.5 * (precision + prev_precision);
    prev_recall = recall;
    prev_precision = precision;
    k = j + 1;
  }
  return area;
}

MetricSummary all_metrics(const LabeledScores& ls) {
  MetricSummary m;
  m.roc_auc = roc_auc(ls);
  m.average_precision = average_precision(ls);
  m.recall_at_k = recall_at_k(ls);
  m.auprc = auprc(ls);
  return m;
}

}  // namespace gadiff
