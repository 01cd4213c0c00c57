#pragma once

// Post-hoc probe: how well can a freshly trained classifier recover the
// protected status from fixed embeddings? Higher held-out accuracy means the
// embeddings leak more group information.

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fairsvdd/dense_net.hpp"
#include "fairsvdd/rng.hpp"

namespace testsupport {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Trains a small relu MLP with logistic loss on 70% of the rows and returns
// accuracy on the held-out 30%.
inline double probe_psv_accuracy(const Eigen::MatrixXd& embeddings, const Eigen::VectorXi& psv,
                                 std::uint64_t seed, int epochs = 120, int batch_size = 64) {
  using namespace fairsvdd;
  const Eigen::Index n = embeddings.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  Rng rng(mix_seed(seed, 7001));
  rng.shuffle(order);
  const auto cut = static_cast<std::size_t>(0.7 * static_cast<double>(n));

  DenseNet probe = make_dense_net(embeddings.cols(), {16, 1}, /*use_bias=*/true,
                                  Activation::relu, Activation::identity, mix_seed(seed, 7002));
  AdamState adam = AdamState::init(probe, 1e-3);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    Rng epoch_rng(mix_seed(seed, 7100 + static_cast<std::uint64_t>(epoch)));
    std::vector<Eigen::Index> train_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
    epoch_rng.shuffle(train_rows);
    for (std::size_t start = 0; start < train_rows.size();
         start += static_cast<std::size_t>(batch_size)) {
      const std::size_t stop =
          std::min(train_rows.size(), start + static_cast<std::size_t>(batch_size));
      const auto rows = static_cast<Eigen::Index>(stop - start);
      Eigen::MatrixXd batch(rows, embeddings.cols());
      Eigen::VectorXi z(rows);
      for (Eigen::Index r = 0; r < rows; ++r) {
        batch.row(r) = embeddings.row(train_rows[start + static_cast<std::size_t>(r)]);
        z[r] = psv[train_rows[start + static_cast<std::size_t>(r)]];
      }
      ForwardTape tape;
      const Eigen::MatrixXd logits = forward(probe, batch, &tape);
      Eigen::MatrixXd grad(rows, 1);
      for (Eigen::Index r = 0; r < rows; ++r)
        grad(r, 0) = (sigmoid(logits(r, 0)) - static_cast<double>(z[r])) /
                     static_cast<double>(rows);
      BackwardResult back = backward(probe, tape, grad);
      adam_step(probe, back.grads, adam);
    }
  }

  long correct = 0;
  long held_out = 0;
  for (std::size_t i = cut; i < order.size(); ++i) {
    const Eigen::MatrixXd logit = forward(probe, embeddings.row(order[i]));
    const int predicted = sigmoid(logit(0, 0)) > 0.5 ? 1 : 0;
    correct += predicted == psv[order[i]] ? 1 : 0;
    ++held_out;
  }
  return static_cast<double>(correct) / static_cast<double>(held_out);
}

}  // namespace testsupport
