#include "fairsvdd/svdd.hpp"

#include <cmath>
#include <fstream>

#include "fairsvdd/errors.hpp"
#include "text_util.hpp"
#include "train_loop.hpp"

namespace fairsvdd {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(disc_learning_rate > 0.0)) throw ConfigError("disc_learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (lambda_fair < 0.0) throw ConfigError("lambda must be >= 0");
  if (pretrain_epochs < 0) throw ConfigError("pretrain_epochs must be >= 0");
  if (adversarial_epochs < 0) throw ConfigError("adv_epochs must be >= 0");
  if (encoder_hidden.empty()) throw ConfigError("encoder needs at least one layer");
  for (int w : encoder_hidden)
    if (w < 1) throw ConfigError("encoder widths must be >= 1");
  for (int w : disc_hidden)
    if (w < 1) throw ConfigError("discriminator widths must be >= 1");
}

Eigen::VectorXd init_center(const DenseNet& encoder, const Dataset& train) {
  train.validate();
  // full-set batch statistics: the same normalization semantics training sees
  const Eigen::MatrixXd embeddings = forward(encoder, train.features, nullptr, BnMode::batch);
  Eigen::VectorXd center = embeddings.colwise().mean();
  // A center at the origin is the collapse fixed point of a bias-free relu
  // net; push near-zero coordinates out when the mean lands there.
  constexpr double kMinNorm = 0.1;
  if (center.norm() < kMinNorm) {
    for (Eigen::Index i = 0; i < center.size(); ++i) {
      if (std::abs(center[i]) < kMinNorm) center[i] = center[i] < 0.0 ? -kMinNorm : kMinNorm;
    }
  }
  return center;
}

double svdd_loss(const DenseNet& encoder, const Eigen::MatrixXd& batch,
                 const Eigen::VectorXd& center, double alpha) {
  if (center.size() != encoder.output_dim())
    throw DataError("svdd_loss: center dimension does not match encoder output");
  if (batch.rows() == 0) throw DataError("svdd_loss: empty batch");
  const Eigen::MatrixXd embeddings = forward(encoder, batch);
  return (embeddings.rowwise() - center.transpose()).squaredNorm() /
             static_cast<double>(batch.rows()) +
         weight_decay_term(encoder, alpha);
}

SvddModel train_svdd(const Dataset& train, const TrainConfig& config,
                     std::vector<TraceRow>* trace) {
  config.validate();
  train.validate();

  SvddModel model;
  model.config = config;
  model.encoder = detail::make_encoder(train.n_dims(), config);
  model.center = init_center(model.encoder, train);

  AdamState adam = AdamState::init(model.encoder, config.learning_rate);
  for (int epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
    const double mean_loss = detail::run_encoder_epoch(
        model.encoder, adam, train.features, model.center, config.weight_decay,
        config.batch_size, detail::encoder_epoch_seed(config.seed, epoch), nullptr);
    if (trace) {
      TraceRow row;
      row.epoch = epoch;
      row.phase = TrainPhase::pretrain;
      row.l_svdd = mean_loss;
      trace->push_back(row);
    }
  }
  return model;
}

Eigen::VectorXd score(const SvddModel& model, const Dataset& data) {
  const Eigen::MatrixXd embeddings = forward(model.encoder, data.features);
  return (embeddings.rowwise() - model.center.transpose()).rowwise().squaredNorm();
}

void export_embeddings(const SvddModel& model, const Dataset& data, const std::string& path) {
  const Eigen::MatrixXd embeddings =
      data.n_instances() > 0 ? forward(model.encoder, data.features)
                             : Eigen::MatrixXd(0, model.encoder.output_dim());

  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (Eigen::Index j = 0; j < embeddings.cols(); ++j) out << 'e' << j << ',';
  out << "psv,label\n";
  for (Eigen::Index i = 0; i < embeddings.rows(); ++i) {
    for (Eigen::Index j = 0; j < embeddings.cols(); ++j)
      out << detail::format_double(embeddings(i, j)) << ',';
    out << data.psv[i] << ',';
    if (data.labels) out << (*data.labels)[i];
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

void export_scores(const Eigen::VectorXd& scores, const Dataset& data, const std::string& path) {
  if (scores.size() != data.n_instances())
    throw DataError("export_scores: score count does not match dataset");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "score,psv,label\n";
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    out << detail::format_double(scores[i]) << ',' << data.psv[i] << ',';
    if (data.labels) out << (*data.labels)[i];
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace fairsvdd
