#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

namespace fairsvdd {

// Per-(psv, prediction) contingency counts for one evaluation.
struct GroupCounts {
  long z0_normal = 0;
  long z0_abnormal = 0;
  long z1_normal = 0;
  long z1_abnormal = 0;

  long total() const { return z0_normal + z0_abnormal + z1_normal + z1_abnormal; }
};

struct FairnessReport {
  double p_rule = 0.0;          // in [0, 1], 1 is perfectly fair
  double wasserstein = 0.0;     // >= 0, between per-group score distributions
  std::optional<double> auc;    // absent without labels
  double threshold = 0.0;
  GroupCounts counts;
};

// Threshold such that exactly the k largest scores satisfy s > t (midpoint of
// the k-th and (k+1)-th order statistics). Throws DataError when those two
// order statistics tie, since no threshold can then produce exactly k
// positives.
double threshold_from_count(const Eigen::VectorXd& scores, Eigen::Index k);

// min of the two ratios of per-group positive rates P(s > t | z). Both rates
// zero counts as perfectly fair (1.0); exactly one rate zero as maximally
// unfair (0.0). Both groups must be present.
double p_rule(const Eigen::VectorXd& scores, const Eigen::VectorXi& z, double threshold);

// Exact Wasserstein-1 distance between the empirical distributions of two
// nonempty samples: mean absolute difference of co-sorted values when sizes
// match, otherwise the closed-form integral of |inverse-CDF difference|.
double wasserstein1(std::vector<double> samples_p, std::vector<double> samples_q);

// Rank-based AUC (Mann-Whitney, ties counted 0.5) in O(n log n). Both classes
// must be present.
double auc_score(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels);

// Assembles the full report. The threshold comes from `threshold` when given,
// else from the k largest scores, else from the number of abnormal labels.
// The Wasserstein distance compares per-group scores over the whole
// evaluation set, normal and abnormal alike.
FairnessReport evaluate(const Eigen::VectorXd& scores, const Eigen::VectorXi& z,
                        const std::optional<Eigen::VectorXi>& labels,
                        std::optional<Eigen::Index> k_anomalies,
                        std::optional<double> threshold);

// JSON document with fixed field names: p_rule, wasserstein, auc, threshold,
// counts (see schemas/fairness_report.schema.json).
std::string report_to_json(const FairnessReport& report);
FairnessReport report_from_json(const std::string& text);
void save_report(const FairnessReport& report, const std::string& path);

}  // namespace fairsvdd
