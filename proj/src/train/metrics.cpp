#include "adrec/train/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "adrec/error.hpp"

namespace adrec::train {

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw shape_error("auc: score/label length mismatch");
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += y ? 1 : 0;
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw input_error("auc: both classes must be present");

  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return scores[a] < scores[b]; });

  // Average ranks over tie groups; rank sum of positives gives the
  // Mann-Whitney statistic.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) rank_sum_pos += avg_rank;
    i = j;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

double weighted_ce(const std::vector<double>& yhat, const std::vector<double>& y,
                   const std::vector<double>& w) {
  if (yhat.size() != y.size() || y.size() != w.size())
    throw shape_error("weighted_ce: length mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < yhat.size(); ++i)
    loss -= w[i] * (y[i] * std::log(yhat[i]) + (1.0 - y[i]) * std::log(1.0 - yhat[i]));
  return loss;
}

const SplitMetrics* MetricsReport::find(const std::string& name) const {
  for (const auto& s : splits)
    if (s.split == name) return &s;
  return nullptr;
}

namespace {

SplitMetrics metrics_for(const std::string& name, const std::vector<double>& probs,
                         const std::vector<int>& labels, double threshold) {
  SplitMetrics m;
  m.split = name;
  int tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool predicted = probs[i] >= threshold;
    if (labels[i]) {
      ++m.support_pos;
      predicted ? ++tp : ++fn;
    } else {
      ++m.support_neg;
      predicted ? ++fp : ++tn;
    }
  }
  const double total = static_cast<double>(probs.size());
  m.accuracy = total > 0 ? (tp + tn) / total : 0.0;
  m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                      : 0.0;
  if (m.support_pos > 0 && m.support_neg > 0) {
    m.auc_value = auc(probs, labels);
    m.auc_defined = true;
  }
  return m;
}

}  // namespace

MetricsReport compute_metrics(const std::vector<double>& probs, const std::vector<int>& labels,
                              const std::vector<int>& platform_tags,
                              const std::vector<std::string>& platform_names, double threshold) {
  if (probs.size() != labels.size() || probs.size() != platform_tags.size())
    throw shape_error("compute_metrics: input length mismatch");
  MetricsReport report;
  for (std::size_t p = 0; p < platform_names.size(); ++p) {
    std::vector<double> ps;
    std::vector<int> ls;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (platform_tags[i] == static_cast<int>(p)) {
        ps.push_back(probs[i]);
        ls.push_back(labels[i]);
      }
    }
    report.splits.push_back(metrics_for(platform_names[p], ps, ls, threshold));
  }
  report.splits.push_back(metrics_for("merged", probs, labels, threshold));
  return report;
}

nlohmann::ordered_json metrics_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["splits"] = nlohmann::ordered_json::array();
  for (const auto& s : report.splits) {
    nlohmann::ordered_json js;
    js["split"] = s.split;
    js["accuracy"] = s.accuracy;
    js["precision"] = s.precision;
    js["recall"] = s.recall;
    js["f1"] = s.f1;
    if (s.auc_defined)
      js["auc"] = s.auc_value;
    else
      js["auc"] = nullptr;
    js["support_pos"] = s.support_pos;
    js["support_neg"] = s.support_neg;
    j["splits"].push_back(js);
  }
  return j;
}

void metrics_to_csv(const MetricsReport& report, std::ostream& out) {
  out << "split,accuracy,precision,recall,f1,auc,support_pos,support_neg\n";
  for (const auto& s : report.splits) {
    out << s.split << ',' << s.accuracy << ',' << s.precision << ',' << s.recall << ',' << s.f1
        << ',';
    if (s.auc_defined) out << s.auc_value;
    out << ',' << s.support_pos << ',' << s.support_neg << '\n';
  }
}

}  // namespace adrec::train
