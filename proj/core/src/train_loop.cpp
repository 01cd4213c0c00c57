#include "train_loop.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "fairsvdd/errors.hpp"
#include "fairsvdd/rng.hpp"

namespace fairsvdd::detail {

DenseNet make_encoder(Eigen::Index input_dim, const TrainConfig& config) {
  const Activation final_act = config.batch_norm ? Activation::relu : Activation::identity;
  return make_dense_net(input_dim, config.encoder_hidden, /*use_bias=*/false, Activation::relu,
                        final_act, encoder_init_seed(config.seed), config.batch_norm);
}

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// max(x,0) + log1p(exp(-|x|))
double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

constexpr double kLogitClamp = 40.0;

// Mean cross entropy from raw logits plus its gradient d(loss)/d(logit).
// Logits are clamped inside the loss only.
double bce_from_logits(const Eigen::VectorXd& logits, const Eigen::VectorXi& z,
                       Eigen::VectorXd* grad) {
  const auto m = static_cast<double>(logits.size());
  double total = 0.0;
  if (grad) grad->resize(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double l = std::clamp(logits[i], -kLogitClamp, kLogitClamp);
    total += z[i] == 1 ? softplus(-l) : softplus(l);
    if (grad) (*grad)[i] = (stable_sigmoid(l) - static_cast<double>(z[i])) / m;
  }
  return total / m;
}

[[noreturn]] void abort_non_finite(const char* what, double value, std::uint64_t epoch_seed,
                                   long batch) {
  throw NumericError(std::string("non-finite ") + what + " (" + std::to_string(value) +
                     ") at batch " + std::to_string(batch) + ", epoch seed " +
                     std::to_string(epoch_seed) + "; training aborted");
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& data, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), data.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = data.row(rows[i]);
  return out;
}

Eigen::VectorXi gather_rows(const Eigen::VectorXi& values, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = values[rows[i]];
  return out;
}

// One discriminator update on a prepared batch; returns the pre-update loss.
double disc_step(DenseNet& disc, AdamState& disc_adam, const Eigen::MatrixXd& embeddings,
                 const Eigen::VectorXi& z) {
  ForwardTape tape;
  const Eigen::MatrixXd logits = forward_train(disc, embeddings, &tape);
  Eigen::VectorXd logit_grad;
  const double loss = bce_from_logits(logits.col(0), z, &logit_grad);
  BackwardResult back = backward(disc, tape, logit_grad);
  adam_step(disc, back.grads, disc_adam);
  return loss;
}

}  // namespace

std::vector<std::vector<Eigen::Index>> shuffled_batches(Eigen::Index n, int batch_size,
                                                        std::uint64_t seed) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<std::vector<Eigen::Index>> batches;
  for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return batches;
}

double run_encoder_epoch(DenseNet& encoder, AdamState& encoder_adam, const Eigen::MatrixXd& data,
                         const Eigen::VectorXd& center, double alpha, int batch_size,
                         std::uint64_t epoch_seed, AdversarialContext* ctx) {
  const auto batches = shuffled_batches(data.rows(), batch_size, epoch_seed);
  double epoch_loss = 0.0;
  long batch_index = 0;

  for (const auto& rows : batches) {
    const Eigen::MatrixXd batch = gather_rows(data, rows);
    const auto m = static_cast<double>(batch.rows());

    Eigen::VectorXi z;
    if (ctx) {
      z = gather_rows(*ctx->psv, rows);
      // discriminator trains first; the encoder is frozen, so its forward
      // runs on this batch's statistics without touching running state
#ifndef NDEBUG
      const std::uint64_t encoder_before = parameter_hash(encoder);
#endif
      const Eigen::MatrixXd frozen_emb = forward(encoder, batch, nullptr, BnMode::batch);
      const double l_d = disc_step(*ctx->disc, *ctx->disc_adam, frozen_emb, z);
      if (!std::isfinite(l_d)) abort_non_finite("discriminator loss", l_d, epoch_seed, batch_index);
      ctx->sum_l_d += l_d;
      assert(parameter_hash(encoder) == encoder_before);
    }

    // encoder step; identical arithmetic whether or not a context is present
    ForwardTape tape;
    const Eigen::MatrixXd embeddings = forward_train(encoder, batch, &tape);
    const double l_svdd =
        (embeddings.rowwise() - center.transpose()).squaredNorm() / m +
        weight_decay_term(encoder, alpha);
    if (!std::isfinite(l_svdd)) abort_non_finite("svdd loss", l_svdd, epoch_seed, batch_index);
    epoch_loss += l_svdd;

    Eigen::MatrixXd output_grad = (2.0 / m) * (embeddings.rowwise() - center.transpose());
    if (ctx && ctx->lambda != 0.0) {
#ifndef NDEBUG
      const std::uint64_t disc_before = parameter_hash(*ctx->disc);
#endif
      ForwardTape disc_tape;
      const Eigen::MatrixXd logits = forward(*ctx->disc, embeddings, &disc_tape);
      Eigen::VectorXd logit_grad;
      const double l_d_enc = bce_from_logits(logits.col(0), z, &logit_grad);
      const BackwardResult disc_back = backward(*ctx->disc, disc_tape, logit_grad);
      output_grad -= ctx->lambda * disc_back.input_grad;
      ctx->sum_l_adv += l_svdd - ctx->lambda * l_d_enc;
      assert(parameter_hash(*ctx->disc) == disc_before);
    } else if (ctx) {
      ctx->sum_l_adv += l_svdd;
    }

    BackwardResult back = backward(encoder, tape, output_grad);
    add_weight_decay_gradient(encoder, alpha, back.grads);
    adam_step(encoder, back.grads, encoder_adam);

    if (ctx) ++ctx->batches;
    ++batch_index;
  }
  return epoch_loss / static_cast<double>(batches.size());
}

double run_disc_epoch(DenseNet& disc, AdamState& disc_adam, const DenseNet& frozen_encoder,
                      const Eigen::MatrixXd& data, const Eigen::VectorXi& psv, int batch_size,
                      std::uint64_t epoch_seed) {
  const auto batches = shuffled_batches(data.rows(), batch_size, epoch_seed);
  double epoch_loss = 0.0;
  long batch_index = 0;
  for (const auto& rows : batches) {
    const Eigen::MatrixXd embeddings =
        forward(frozen_encoder, gather_rows(data, rows), nullptr, BnMode::batch);
    const double l_d = disc_step(disc, disc_adam, embeddings, gather_rows(psv, rows));
    if (!std::isfinite(l_d)) abort_non_finite("discriminator loss", l_d, epoch_seed, batch_index);
    epoch_loss += l_d;
    ++batch_index;
  }
  return epoch_loss / static_cast<double>(batches.size());
}

}  // namespace fairsvdd::detail
