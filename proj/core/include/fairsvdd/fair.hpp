#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "fairsvdd/dataset.hpp"
#include "fairsvdd/dense_net.hpp"
#include "fairsvdd/svdd.hpp"
#include "fairsvdd/trace.hpp"
#include "fairsvdd/train_config.hpp"

namespace fairsvdd {

// Protected-status classifier over embeddings. Input dim = embedding dim,
// output is a single logit per instance. Unlike the encoder it uses biases.
struct Discriminator {
  DenseNet net;
};

Discriminator make_discriminator(Eigen::Index embed_dim, const std::vector<int>& hidden,
                                 std::uint64_t seed);

struct FairSvddModel {
  SvddModel svdd;
  Discriminator discriminator;
  std::vector<TraceRow> trace;
};

// Overflow-safe sigmoid of the discriminator's logits, one probability per row.
Eigen::VectorXd disc_predict(const Discriminator& disc, const Eigen::MatrixXd& embeddings);

// Mean binary cross entropy between predicted probabilities and the binary
// protected-status vector.
double disc_loss(const Eigen::VectorXd& probs, const Eigen::VectorXi& z);

// Same loss evaluated in log-space from raw logits; this is the form the
// training loop uses. Logits are clamped to +/-40 inside the loss only.
double disc_loss_logits(const Eigen::VectorXd& logits, const Eigen::VectorXi& z);

// l_svdd - lambda * l_d
double adv_loss(double l_svdd, double l_d, double lambda);

// Three-phase alternating schedule:
//   1. K epochs of encoder-only svdd training (center frozen after init),
//   2. K epochs of discriminator training on frozen embeddings,
//   3. T epochs where every minibatch takes one discriminator step (encoder
//      frozen) followed by one encoder step on the adversarial loss
//      (discriminator frozen), on the same batch indices.
// Encoder-phase and discriminator-phase batch shuffles draw from independent
// seeded streams, so with lambda = 0 the encoder trajectory is bit-identical
// to train_svdd under a pretrain_epochs = K + T budget.
FairSvddModel train_fair_svdd(const Dataset& train, const TrainConfig& config);

}  // namespace fairsvdd
