#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "fairsvdd/dataset.hpp"
#include "fairsvdd/errors.hpp"
#include "fairsvdd/svdd.hpp"
#include "fairsvdd/synth.hpp"
#include "oracles.hpp"
#include "tempdir.hpp"

using namespace fairsvdd;
using testsupport::TempDir;

namespace {

DenseNet identity_encoder(Eigen::Index dim) {
  DenseNet net;
  DenseLayer layer;
  layer.weight = Eigen::MatrixXd::Identity(dim, dim);
  layer.act = Activation::identity;
  net.layers.push_back(layer);
  return net;
}

Dataset dataset_from(const Eigen::MatrixXd& features) {
  Dataset d;
  d.features = features;
  d.psv = Eigen::VectorXi::Zero(features.rows());
  for (Eigen::Index i = 0; i + 1 < d.psv.size(); i += 2) d.psv[i] = 1;
  return d;
}

TrainConfig small_config() {
  TrainConfig config;
  config.encoder_hidden = {8, 4};
  config.disc_hidden = {8};
  config.pretrain_epochs = 5;
  config.adversarial_epochs = 5;
  config.batch_size = 32;
  return config;
}

}  // namespace

TEST_CASE("init_center: a single instance gives its own embedding") {
  const DenseNet enc = identity_encoder(2);
  Eigen::MatrixXd x(1, 2);
  x << 3.0, -2.0;
  const Eigen::VectorXd c = init_center(enc, dataset_from(x));
  CHECK(c[0] == 3.0);
  CHECK(c[1] == -2.0);
}

TEST_CASE("init_center: opposite embeddings trigger the anti-collapse nudge") {
  const DenseNet enc = identity_encoder(3);
  Eigen::MatrixXd x(2, 3);
  x << 1.0, -2.0, 0.5, -1.0, 2.0, -0.5;
  const Eigen::VectorXd c = init_center(enc, dataset_from(x));
  for (Eigen::Index i = 0; i < c.size(); ++i) CHECK(std::abs(c[i]) == 0.1);
}

TEST_CASE("init_center: matches an independent mean when no nudge applies") {
  DenseNet enc = make_dense_net(4, {6, 3}, false, Activation::relu, Activation::identity, 5);
  Rng rng(71);
  Eigen::MatrixXd x(100, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal(2.0, 1.0);
  const Dataset data = dataset_from(x);

  const Eigen::MatrixXd emb = oracles::naive_forward(enc, x);
  Eigen::VectorXd naive_mean = Eigen::VectorXd::Zero(3);
  for (Eigen::Index i = 0; i < emb.rows(); ++i) naive_mean += emb.row(i).transpose();
  naive_mean /= static_cast<double>(emb.rows());

  REQUIRE(naive_mean.norm() >= 0.1);  // nudge must not fire for this check
  const Eigen::VectorXd c = init_center(enc, data);
  CHECK((c - naive_mean).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("svdd_loss: zero at the center, simple arithmetic, decay included") {
  const DenseNet enc = identity_encoder(1);
  Eigen::VectorXd center(1);
  center << 0.0;
  Eigen::MatrixXd batch(2, 1);
  batch << 1.0, 3.0;
  CHECK(svdd_loss(enc, batch, center, 0.0) == doctest::Approx(5.0));

  Eigen::MatrixXd at_center(3, 1);
  at_center << 0.0, 0.0, 0.0;
  CHECK(svdd_loss(enc, at_center, center, 0.0) == 0.0);

  // alpha = 2 adds (2/2)*||I_1||^2 = 1
  CHECK(svdd_loss(enc, at_center, center, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("svdd_loss: matches recomputation from forward outputs") {
  DenseNet enc = make_dense_net(5, {7, 3}, false, Activation::relu, Activation::identity, 13);
  Rng rng(77);
  Eigen::MatrixXd batch(20, 5);
  for (Eigen::Index i = 0; i < batch.size(); ++i) batch.data()[i] = rng.normal();
  Eigen::VectorXd center(3);
  center << 0.3, -0.2, 0.9;
  const double alpha = 1e-4;

  const Eigen::MatrixXd emb = oracles::naive_forward(enc, batch);
  double mean_sq = 0.0;
  for (Eigen::Index i = 0; i < emb.rows(); ++i)
    mean_sq += (emb.row(i).transpose() - center).squaredNorm();
  mean_sq /= static_cast<double>(emb.rows());
  double decay = 0.0;
  for (const auto& layer : enc.layers) decay += layer.weight.squaredNorm();
  decay *= 0.5 * alpha;

  CHECK(svdd_loss(enc, batch, center, alpha) == doctest::Approx(mean_sq + decay).epsilon(1e-10));
}

TEST_CASE("train_svdd: loss at the final epoch beats the first epoch") {
  SynthSpec spec;
  spec.n_per_group = 500;  // n = 1000
  spec.seed = 3;
  auto [train, test] = synth_biased(spec);

  TrainConfig config = small_config();
  config.pretrain_epochs = 20;
  std::vector<TraceRow> trace;
  train_svdd(train, config, &trace);
  REQUIRE(trace.size() == 20);
  CHECK(*trace.back().l_svdd < *trace.front().l_svdd);
}

TEST_CASE("train_svdd: bitwise deterministic for a fixed config") {
  SynthSpec spec;
  spec.n_per_group = 100;
  auto [train, test] = synth_biased(spec);
  const TrainConfig config = small_config();

  const SvddModel a = train_svdd(train, config);
  const SvddModel b = train_svdd(train, config);
  CHECK(parameter_hash(a.encoder) == parameter_hash(b.encoder));
  CHECK((a.center - b.center).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("train_svdd: zero-epoch schedule returns the initialization") {
  SynthSpec spec;
  spec.n_per_group = 50;
  auto [train, test] = synth_biased(spec);

  TrainConfig config = small_config();
  config.pretrain_epochs = 0;
  const SvddModel untrained = train_svdd(train, config);
  // center recomputed on the returned encoder must match bit for bit
  const Eigen::VectorXd recomputed = init_center(untrained.encoder, train);
  CHECK((untrained.center - recomputed).cwiseAbs().maxCoeff() == 0.0);

  config.pretrain_epochs = 1;
  const SvddModel trained = train_svdd(train, config);
  CHECK(parameter_hash(untrained.encoder) != parameter_hash(trained.encoder));
}

TEST_CASE("train_svdd: the center is frozen across any training budget") {
  SynthSpec spec;
  spec.n_per_group = 80;
  auto [train, test] = synth_biased(spec);

  TrainConfig config = small_config();
  config.pretrain_epochs = 0;
  const Eigen::VectorXd center0 = train_svdd(train, config).center;
  config.pretrain_epochs = 15;
  const Eigen::VectorXd center15 = train_svdd(train, config).center;
  CHECK((center0 - center15).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient descent is non-increasing on the 1-layer identity configuration") {
  // 1-D data, alpha = 0, single identity-initialized layer, lr 1e-3
  DenseNet enc = identity_encoder(1);
  Eigen::VectorXd center(1);
  center << 1.0;
  Rng rng(83);
  Eigen::MatrixXd data(64, 1);
  for (Eigen::Index i = 0; i < data.size(); ++i) data.data()[i] = rng.normal(0.0, 1.0);

  AdamState adam = AdamState::init(enc, 1e-3);
  double previous = svdd_loss(enc, data, center, 0.0);
  for (int epoch = 0; epoch < 50; ++epoch) {
    ForwardTape tape;
    const Eigen::MatrixXd emb = forward(enc, data, &tape);
    const Eigen::MatrixXd grad =
        (2.0 / static_cast<double>(data.rows())) * (emb.rowwise() - center.transpose());
    BackwardResult back = backward(enc, tape, grad);
    adam_step(enc, back.grads, adam);
    const double current = svdd_loss(enc, data, center, 0.0);
    CHECK(current <= previous + 1e-12);
    previous = current;
  }
}

TEST_CASE("score: zero at the center and plain squared distance") {
  SvddModel model;
  model.encoder = identity_encoder(2);
  model.center = Eigen::VectorXd::Zero(2);

  Eigen::MatrixXd x(2, 2);
  x << 0.0, 0.0, 3.0, 4.0;
  const Eigen::VectorXd s = score(model, dataset_from(x));
  CHECK(s[0] == 0.0);
  CHECK(s[1] == doctest::Approx(25.0));
}

TEST_CASE("score: non-negative and invariant to instance order") {
  SynthSpec spec;
  spec.n_per_group = 60;
  auto [train, test] = synth_biased(spec);
  TrainConfig config = small_config();
  const SvddModel model = train_svdd(train, config);

  const Eigen::VectorXd s = score(model, test);
  CHECK(s.minCoeff() >= 0.0);

  std::vector<Eigen::Index> perm;
  for (Eigen::Index i = test.n_instances(); i-- > 0;) perm.push_back(i);
  const Dataset reversed = take_rows(test, perm);
  const Eigen::VectorXd s_rev = score(model, reversed);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    CHECK(s[i] == s_rev[s.size() - 1 - i]);
}

TEST_CASE("export_embeddings: shape, exact re-scoring round trip") {
  SynthSpec spec;
  spec.n_per_group = 40;
  spec.n_dims = 4;
  auto [train, test] = synth_biased(spec);
  TrainConfig config = small_config();
  config.encoder_hidden = {6, 2};
  const SvddModel model = train_svdd(train, config);

  TempDir dir("emb");
  export_embeddings(model, test, dir.file("emb.csv"));

  std::ifstream in(dir.file("emb.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header == "e0,e1,psv,label");

  const Eigen::VectorXd expected = score(model, test);
  std::string line;
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    Eigen::VectorXd emb(2);
    for (int j = 0; j < 2; ++j) {
      std::getline(ss, cell, ',');
      emb[j] = std::stod(cell);
    }
    const double recomputed = (emb - model.center).squaredNorm();
    CHECK(std::abs(recomputed - expected[row]) < 1e-10);
    ++row;
  }
  CHECK(row == test.n_instances());
}

TEST_CASE("export_embeddings: empty dataset writes a header-only file") {
  SvddModel model;
  model.encoder = identity_encoder(2);
  model.center = Eigen::VectorXd::Zero(2);

  Dataset empty;
  empty.features.resize(0, 2);
  empty.psv.resize(0);

  TempDir dir("empty");
  export_embeddings(model, empty, dir.file("emb.csv"));
  std::ifstream in(dir.file("emb.csv"));
  std::string header, extra;
  CHECK(std::getline(in, header));
  CHECK(header == "e0,e1,psv,label");
  CHECK_FALSE(std::getline(in, extra));
}

TEST_CASE("export_scores: score,psv,label schema with exact values") {
  SynthSpec spec;
  spec.n_per_group = 25;
  auto [train, test] = synth_biased(spec);
  TrainConfig config = small_config();
  const SvddModel model = train_svdd(train, config);
  const Eigen::VectorXd s = score(model, test);

  TempDir dir("scores");
  export_scores(s, test, dir.file("scores.csv"));
  std::ifstream in(dir.file("scores.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header == "score,psv,label");
  std::string line;
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    const double value = std::stod(line.substr(0, line.find(',')));
    CHECK(value == s[row]);  // 17 digits round-trip exactly
    ++row;
  }
  CHECK(row == test.n_instances());
}

TEST_CASE("train_svdd: empty dataset and invalid config are rejected") {
  Dataset empty;
  empty.features.resize(0, 3);
  empty.psv.resize(0);
  CHECK_THROWS_AS(train_svdd(empty, small_config()), DataError);

  SynthSpec spec;
  spec.n_per_group = 10;
  auto [train, test] = synth_biased(spec);
  TrainConfig bad = small_config();
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(train_svdd(train, bad), ConfigError);
}
