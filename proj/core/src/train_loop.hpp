#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "fairsvdd/dense_net.hpp"
#include "fairsvdd/train_config.hpp"

namespace fairsvdd::detail {

// Encoder architecture: bias-free dense stack, relu activations. With batch
// normalization the embedding layer is normalized and relu'd as well, which
// pins the embedding scale; without it the final layer is linear.
DenseNet make_encoder(Eigen::Index input_dim, const TrainConfig& config);

// Seed streams derived from the run seed. Encoder epochs use seed + epoch
// directly (that contract is what makes a fair run with lambda = 0 replay a
// plain run bit-for-bit); everything else gets an independent stream.
inline std::uint64_t encoder_init_seed(std::uint64_t seed) { return mix_seed(seed, 1); }
inline std::uint64_t disc_init_seed(std::uint64_t seed) { return mix_seed(seed, 2); }
inline std::uint64_t encoder_epoch_seed(std::uint64_t seed, int epoch) {
  return seed + static_cast<std::uint64_t>(epoch);
}
inline std::uint64_t disc_epoch_seed(std::uint64_t seed, int epoch) {
  return mix_seed(seed, 3) + static_cast<std::uint64_t>(epoch);
}

std::vector<std::vector<Eigen::Index>> shuffled_batches(Eigen::Index n, int batch_size,
                                                        std::uint64_t seed);

// Adversarial state threaded through phase-3 epochs. Per-epoch mean losses
// are accumulated here for the training trace.
struct AdversarialContext {
  DenseNet* disc = nullptr;
  AdamState* disc_adam = nullptr;
  const Eigen::VectorXi* psv = nullptr;  // aligned with training rows
  double lambda = 0.0;
  double sum_l_d = 0.0;
  double sum_l_adv = 0.0;
  long batches = 0;
};

// One epoch of minibatch encoder updates on the svdd loss. With a context,
// each minibatch first takes a discriminator step (encoder frozen), then the
// encoder step descends the adversarial loss with the discriminator frozen,
// on the same batch rows. The encoder update arithmetic is shared between
// both modes, and the lambda = 0 path skips the discriminator term entirely.
// Returns the epoch's mean svdd loss (pre-update values).
double run_encoder_epoch(DenseNet& encoder, AdamState& encoder_adam, const Eigen::MatrixXd& data,
                         const Eigen::VectorXd& center, double alpha, int batch_size,
                         std::uint64_t epoch_seed, AdversarialContext* ctx);

// One epoch of discriminator updates against the frozen encoder's embeddings
// (batch statistics, no running-state updates on the encoder); returns the
// mean discriminator loss (pre-update values).
double run_disc_epoch(DenseNet& disc, AdamState& disc_adam, const DenseNet& frozen_encoder,
                      const Eigen::MatrixXd& data, const Eigen::VectorXi& psv, int batch_size,
                      std::uint64_t epoch_seed);

}  // namespace fairsvdd::detail
