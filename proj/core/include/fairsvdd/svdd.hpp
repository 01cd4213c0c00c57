#pragma once

#include <Eigen/Core>
#include <string>

#include "fairsvdd/dataset.hpp"
#include "fairsvdd/dense_net.hpp"
#include "fairsvdd/trace.hpp"
#include "fairsvdd/train_config.hpp"

namespace fairsvdd {

// One-class model: encoder plus the hypersphere center the encoder contracts
// toward. The center is frozen at initialization and never sees a gradient.
struct SvddModel {
  DenseNet encoder;
  Eigen::VectorXd center;
  TrainConfig config;
};

// Mean embedding of the training set under the initial encoder. If the mean's
// norm falls below 0.1, every coordinate with |c_i| < 0.1 is pushed out to
// +/-0.1 (sign-preserving, +0.1 for exact zeros) so the center cannot sit at
// the collapse point of a bias-free relu net.
Eigen::VectorXd init_center(const DenseNet& encoder, const Dataset& train);

// (1/m) * sum_i ||f(x_i) - c||^2 + weight_decay_term(encoder, alpha)
double svdd_loss(const DenseNet& encoder, const Eigen::MatrixXd& batch,
                 const Eigen::VectorXd& center, double alpha);

// Trains the encoder for config.pretrain_epochs epochs of minibatch Adam on
// svdd_loss. Per-epoch batch order is a full shuffle seeded with
// config.seed + epoch. The center comes from init_center on the freshly
// initialized encoder. Aborts with NumericError on a non-finite loss.
// Per-epoch mean losses land in `trace` when one is passed.
SvddModel train_svdd(const Dataset& train, const TrainConfig& config,
                     std::vector<TraceRow>* trace = nullptr);

// Anomaly scores s(x) = ||f(x) - c||^2, one per instance. Larger is more
// anomalous.
Eigen::VectorXd score(const SvddModel& model, const Dataset& data);

// Writes a CSV of embeddings with columns e_0..e_{k-1}, psv, label (label
// blank when the dataset carries none).
void export_embeddings(const SvddModel& model, const Dataset& data, const std::string& path);

// Scores CSV: columns score, psv, label (label blank when absent).
void export_scores(const Eigen::VectorXd& scores, const Dataset& data, const std::string& path);

}  // namespace fairsvdd
