#include "fairsvdd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "fairsvdd/errors.hpp"

namespace fairsvdd {

double threshold_from_count(const Eigen::VectorXd& scores, Eigen::Index k) {
  const Eigen::Index n = scores.size();
  if (n == 0) throw DataError("threshold_from_count: no scores");
  if (k < 0 || k > n) throw DataError("threshold_from_count: k out of range");

  std::vector<double> sorted(scores.data(), scores.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  if (k == 0) return sorted.front() + 1.0;
  if (k == n) return sorted.back() - 1.0;

  const double kth = sorted[static_cast<std::size_t>(k - 1)];
  const double next = sorted[static_cast<std::size_t>(k)];
  if (kth == next)
    throw DataError("threshold_from_count: scores ranked " + std::to_string(k) + " and " +
                    std::to_string(k + 1) + " are exactly equal (" + std::to_string(kth) +
                    "); no threshold yields exactly k positives, pick a tie policy explicitly");
  double t = 0.5 * (kth + next);
  if (!(t < kth)) t = next;  // rounding guard for adjacent doubles
  return t;
}

double p_rule(const Eigen::VectorXd& scores, const Eigen::VectorXi& z, double threshold) {
  if (scores.size() != z.size()) throw DataError("p_rule: length mismatch");
  long n0 = 0, n1 = 0, pos0 = 0, pos1 = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (z[i] == 1) {
      ++n1;
      if (scores[i] > threshold) ++pos1;
    } else {
      ++n0;
      if (scores[i] > threshold) ++pos0;
    }
  }
  if (n0 == 0 || n1 == 0) throw DataError("p_rule: a protected-status group is empty");
  const double r0 = static_cast<double>(pos0) / static_cast<double>(n0);
  const double r1 = static_cast<double>(pos1) / static_cast<double>(n1);
  if (r0 == 0.0 && r1 == 0.0) return 1.0;  // no positives anywhere counts as fair
  if (r0 == 0.0 || r1 == 0.0) return 0.0;  // positives in only one group, maximally unfair
  return std::min(r1 / r0, r0 / r1);
}

double wasserstein1(std::vector<double> samples_p, std::vector<double> samples_q) {
  if (samples_p.empty() || samples_q.empty())
    throw DataError("wasserstein1: empty sample set");
  std::sort(samples_p.begin(), samples_p.end());
  std::sort(samples_q.begin(), samples_q.end());
  const std::size_t n = samples_p.size(), m = samples_q.size();

  if (n == m) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += std::abs(samples_p[i] - samples_q[i]);
    return total / static_cast<double>(n);
  }

  // integral of |F_P^{-1}(u) - F_Q^{-1}(u)| over the piecewise-constant
  // quantile functions; segment boundaries compared in exact integer
  // arithmetic so the walk is symmetric in P and Q
  double cost = 0.0;
  double u_prev = 0.0;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    const std::uint64_t lhs = static_cast<std::uint64_t>(i + 1) * m;
    const std::uint64_t rhs = static_cast<std::uint64_t>(j + 1) * n;
    const double u_next = lhs <= rhs ? static_cast<double>(i + 1) / static_cast<double>(n)
                                     : static_cast<double>(j + 1) / static_cast<double>(m);
    cost += (u_next - u_prev) * std::abs(samples_p[i] - samples_q[j]);
    u_prev = u_next;
    if (lhs <= rhs) ++i;
    if (rhs <= lhs) ++j;
  }
  return cost;
}

double auc_score(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels) {
  const Eigen::Index n = scores.size();
  if (labels.size() != n) throw DataError("auc: length mismatch");
  long n1 = 0;
  for (Eigen::Index i = 0; i < n; ++i) n1 += labels[i] == 1 ? 1 : 0;
  const long n0 = n - n1;
  if (n1 == 0 || n0 == 0) throw DataError("auc: both classes must be present");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return scores[a] < scores[b]; });

  // average ranks over ties, then the Mann-Whitney statistic
  double positive_rank_sum = 0.0;
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t stop = start;
    while (stop + 1 < order.size() && scores[order[stop + 1]] == scores[order[start]]) ++stop;
    const double avg_rank = 0.5 * static_cast<double>(start + stop) + 1.0;
    for (std::size_t idx = start; idx <= stop; ++idx)
      if (labels[order[idx]] == 1) positive_rank_sum += avg_rank;
    start = stop + 1;
  }
  const double u = positive_rank_sum - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);
  return u / (static_cast<double>(n1) * static_cast<double>(n0));
}

FairnessReport evaluate(const Eigen::VectorXd& scores, const Eigen::VectorXi& z,
                        const std::optional<Eigen::VectorXi>& labels,
                        std::optional<Eigen::Index> k_anomalies,
                        std::optional<double> threshold) {
  if (scores.size() != z.size()) throw DataError("evaluate: scores/psv length mismatch");
  if (labels && labels->size() != scores.size())
    throw DataError("evaluate: scores/labels length mismatch");

  FairnessReport report;
  if (threshold) {
    report.threshold = *threshold;
  } else if (k_anomalies) {
    report.threshold = threshold_from_count(scores, *k_anomalies);
  } else if (labels) {
    report.threshold = threshold_from_count(scores, labels->sum());
  } else {
    throw ConfigError("evaluate: need labels, an anomaly count, or an explicit threshold");
  }

  report.p_rule = p_rule(scores, z, report.threshold);

  std::vector<double> group0, group1;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    (z[i] == 1 ? group1 : group0).push_back(scores[i]);
    const bool abnormal = scores[i] > report.threshold;
    if (z[i] == 1) {
      (abnormal ? report.counts.z1_abnormal : report.counts.z1_normal) += 1;
    } else {
      (abnormal ? report.counts.z0_abnormal : report.counts.z0_normal) += 1;
    }
  }
  report.wasserstein = wasserstein1(group0, group1);
  if (labels) report.auc = auc_score(scores, *labels);
  return report;
}

namespace {

nlohmann::json counts_to_json(const GroupCounts& counts) {
  return {{"z0", {{"normal", counts.z0_normal}, {"abnormal", counts.z0_abnormal}}},
          {"z1", {{"normal", counts.z1_normal}, {"abnormal", counts.z1_abnormal}}}};
}

}  // namespace

std::string report_to_json(const FairnessReport& report) {
  nlohmann::json doc{{"p_rule", report.p_rule},
                     {"wasserstein", report.wasserstein},
                     {"threshold", report.threshold},
                     {"counts", counts_to_json(report.counts)}};
  if (report.auc) {
    doc["auc"] = *report.auc;
  } else {
    doc["auc"] = nullptr;
  }
  return doc.dump(2) + "\n";
}

FairnessReport report_from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  FairnessReport report;
  report.p_rule = doc.at("p_rule").get<double>();
  report.wasserstein = doc.at("wasserstein").get<double>();
  report.threshold = doc.at("threshold").get<double>();
  if (!doc.at("auc").is_null()) report.auc = doc.at("auc").get<double>();
  const auto& counts = doc.at("counts");
  report.counts.z0_normal = counts.at("z0").at("normal").get<long>();
  report.counts.z0_abnormal = counts.at("z0").at("abnormal").get<long>();
  report.counts.z1_normal = counts.at("z1").at("normal").get<long>();
  report.counts.z1_abnormal = counts.at("z1").at("abnormal").get<long>();
  return report;
}

void save_report(const FairnessReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << report_to_json(report);
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace fairsvdd
