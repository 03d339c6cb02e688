#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace adrec::train {

/// Mann-Whitney AUC: probability a random positive outranks a random
/// negative, ties counted one half. Sort-based, O(n log n). Throws
/// input_error when only one class is present.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// L = -sum_i w_i (y_i ln yhat_i + (1 - y_i) ln(1 - yhat_i)).
double weighted_ce(const std::vector<double>& yhat, const std::vector<double>& y,
                   const std::vector<double>& w);

struct SplitMetrics {
  std::string split;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc_value = 0.0;
  bool auc_defined = false;
  int support_pos = 0;
  int support_neg = 0;
};

/// Per platform and merged; merged is the union of all samples and comes
/// last. A single-class split carries no AUC (flagged, not an error).
struct MetricsReport {
  std::vector<SplitMetrics> splits;

  const SplitMetrics* find(const std::string& name) const;
};

MetricsReport compute_metrics(const std::vector<double>& probs, const std::vector<int>& labels,
                              const std::vector<int>& platform_tags,
                              const std::vector<std::string>& platform_names,
                              double threshold = 0.5);

nlohmann::ordered_json metrics_to_json(const MetricsReport& report);
void metrics_to_csv(const MetricsReport& report, std::ostream& out);

}  // namespace adrec::train
