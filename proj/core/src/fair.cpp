#include "fairsvdd/fair.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fairsvdd/errors.hpp"
#include "text_util.hpp"
#include "train_loop.hpp"

namespace fairsvdd {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

constexpr double kLogitClamp = 40.0;

}  // namespace

Discriminator make_discriminator(Eigen::Index embed_dim, const std::vector<int>& hidden,
                                 std::uint64_t seed) {
  std::vector<int> widths = hidden;
  widths.push_back(1);  // single logit
  return Discriminator{make_dense_net(embed_dim, widths, /*use_bias=*/true, Activation::relu,
                                      Activation::identity, seed)};
}

Eigen::VectorXd disc_predict(const Discriminator& disc, const Eigen::MatrixXd& embeddings) {
  const Eigen::MatrixXd logits = forward(disc.net, embeddings);
  Eigen::VectorXd probs(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) probs[i] = stable_sigmoid(logits(i, 0));
  return probs;
}

double disc_loss(const Eigen::VectorXd& probs, const Eigen::VectorXi& z) {
  if (probs.size() != z.size()) throw DataError("disc_loss: length mismatch");
  if (probs.size() == 0) throw DataError("disc_loss: empty input");
  // clamp consistent with the +/-40 logit clamp used during training
  const double floor = stable_sigmoid(-kLogitClamp);
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], floor, 1.0 - floor);
    total += z[i] == 1 ? -std::log(p) : -std::log1p(-p);
  }
  return total / static_cast<double>(probs.size());
}

double disc_loss_logits(const Eigen::VectorXd& logits, const Eigen::VectorXi& z) {
  if (logits.size() != z.size()) throw DataError("disc_loss_logits: length mismatch");
  if (logits.size() == 0) throw DataError("disc_loss_logits: empty input");
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double l = std::clamp(logits[i], -kLogitClamp, kLogitClamp);
    const double softplus_l = std::max(l, 0.0) + std::log1p(std::exp(-std::abs(l)));
    total += z[i] == 1 ? softplus_l - l : softplus_l;
  }
  return total / static_cast<double>(logits.size());
}

double adv_loss(double l_svdd, double l_d, double lambda) {
  if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
  return l_svdd - lambda * l_d;
}

FairSvddModel train_fair_svdd(const Dataset& train, const TrainConfig& config) {
  config.validate();
  train.validate();
  const auto [n0, n1] = train.group_sizes();
  if (n0 == 0 || n1 == 0)
    throw DataError("fair training needs both protected-status values in the training set");

  FairSvddModel model;
  model.svdd.config = config;
  model.svdd.encoder = detail::make_encoder(train.n_dims(), config);
  model.svdd.center = init_center(model.svdd.encoder, train);
  model.discriminator = make_discriminator(model.svdd.encoder.output_dim(), config.disc_hidden,
                                           detail::disc_init_seed(config.seed));

  AdamState encoder_adam = AdamState::init(model.svdd.encoder, config.learning_rate);
  AdamState disc_adam = AdamState::init(model.discriminator.net, config.disc_learning_rate);

  int global_epoch = 0;

  // phase 1: encoder only
  for (int epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
    const double l_svdd = detail::run_encoder_epoch(
        model.svdd.encoder, encoder_adam, train.features, model.svdd.center, config.weight_decay,
        config.batch_size, detail::encoder_epoch_seed(config.seed, epoch), nullptr);
    TraceRow row;
    row.epoch = global_epoch++;
    row.phase = TrainPhase::pretrain;
    row.l_svdd = l_svdd;
    model.trace.push_back(row);
  }

  // phase 2: discriminator against the frozen encoder
  for (int epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
    const double l_d = detail::run_disc_epoch(model.discriminator.net, disc_adam,
                                              model.svdd.encoder, train.features, train.psv,
                                              config.batch_size,
                                              detail::disc_epoch_seed(config.seed, epoch));
    TraceRow row;
    row.epoch = global_epoch++;
    row.phase = TrainPhase::disc_init;
    row.l_d = l_d;
    model.trace.push_back(row);
  }

  // phase 3: alternate per minibatch, discriminator first
  for (int epoch = 0; epoch < config.adversarial_epochs; ++epoch) {
    detail::AdversarialContext ctx;
    ctx.disc = &model.discriminator.net;
    ctx.disc_adam = &disc_adam;
    ctx.psv = &train.psv;
    ctx.lambda = config.lambda_fair;
    const double l_svdd = detail::run_encoder_epoch(
        model.svdd.encoder, encoder_adam, train.features, model.svdd.center, config.weight_decay,
        config.batch_size,
        detail::encoder_epoch_seed(config.seed, config.pretrain_epochs + epoch), &ctx);
    TraceRow row;
    row.epoch = global_epoch++;
    row.phase = TrainPhase::adversarial;
    row.l_svdd = l_svdd;
    row.l_d = ctx.sum_l_d / static_cast<double>(ctx.batches);
    row.l_adv = ctx.sum_l_adv / static_cast<double>(ctx.batches);
    model.trace.push_back(row);
  }

  return model;
}

}  // namespace fairsvdd
