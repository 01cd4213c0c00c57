#pragma once

#include <cstdint>
#include <vector>

namespace fairsvdd {

// All training hyperparameters. Defaults follow the reference setup: Adam at
// 1e-3, batch 128, weight decay 5e-6, trade-off weight 1.
struct TrainConfig {
  double learning_rate = 1e-3;
  // The discriminator gets its own optimizer and may run on a faster clock
  // than the encoder; the min-max game settles at confusion instead of
  // oscillating when the discriminator tracks the encoder closely.
  double disc_learning_rate = 1e-3;
  int batch_size = 128;
  double weight_decay = 5e-6;   // alpha, encoder weight matrices only
  double lambda_fair = 1.0;     // lambda, weight of the discriminator term
  int pretrain_epochs = 50;     // K: encoder-only epochs, also the discriminator warm-up budget
  int adversarial_epochs = 100; // T: alternating epochs
  std::uint64_t seed = 0;
  // Affine-free batch normalization on the encoder's hidden layers. It pins
  // the activation scale, which keeps residual distances informative instead
  // of shrinking toward zero with training time.
  bool batch_norm = true;

  // Encoder layer widths; the last entry is the embedding dimension.
  std::vector<int> encoder_hidden = {32, 16};
  // Discriminator hidden widths (a final 1-unit logit layer is appended).
  // Desk-scale default; the original 500-2000-500 stack is configurable.
  std::vector<int> disc_hidden = {32, 64, 32};

  void validate() const;  // throws ConfigError
};

}  // namespace fairsvdd
