#include "fairsvdd/synth.hpp"

#include <cmath>
#include <vector>

#include "fairsvdd/errors.hpp"
#include "fairsvdd/rng.hpp"

namespace fairsvdd {

namespace {

// Axis 0 is the bias axis: a clean, low-noise group mean separation that a
// depth-1 stump can read off. Its variance share is deliberately tiny, so
// one-class contraction starves it of gradient and the group signal stays in
// the embeddings the way it does on real tabular data, while an adversary
// pointing straight at it can remove it cheaply. Axis 1 carries the anomaly
// displacement, orthogonal to every group effect. The remaining axes hold a
// shared backbone of Gaussian sub-clusters that keeps the normal manifold
// multi-modal (a small encoder cannot contract it to a point, so residual
// distances stay informative); group 1's sub-clusters are displaced in
// proportion to bias_strength, which skews its score distribution upward.
// Every group effect vanishes at bias_strength = 0.
constexpr double kSeparationPerBias = 2.0;   // axis-0 mean gap at full bias
constexpr double kBiasAxisSigma = 0.15;      // axis-0 noise, small vs the gap
constexpr int kSubClusters = 8;
constexpr double kSubCenterSpread = 3.0;     // backbone scale on axes >= 2
constexpr double kSubDisplacePerBias = 2.0;  // group-1 sub-cluster displacement
constexpr double kGroupDilationPerBias = 0.4;  // group-1 backbone dilation
constexpr double kLocalSigma = 0.7;          // noise on all other axes

struct SynthBackbone {
  // one row per sub-cluster; components on axes 0 and 1 are zero
  Eigen::MatrixXd centers;       // shared between groups
  Eigen::MatrixXd displacement;  // applied to group 1, scaled by bias
};

SynthBackbone make_backbone(const SynthSpec& spec, Rng& rng) {
  SynthBackbone backbone;
  backbone.centers = Eigen::MatrixXd::Zero(kSubClusters, spec.n_dims);
  backbone.displacement = Eigen::MatrixXd::Zero(kSubClusters, spec.n_dims);
  for (int c = 0; c < kSubClusters; ++c)
    for (Eigen::Index j = 2; j < spec.n_dims; ++j) {
      backbone.centers(c, j) = rng.normal(0.0, kSubCenterSpread);
      backbone.displacement(c, j) = rng.normal(0.0, kSubDisplacePerBias);
    }
  return backbone;
}

// Abnormal instances are pushed anomaly_shift away from their sub-cluster
// along a random direction inside the backbone subspace, so they sit off the
// normal manifold but along directions the data actually occupies (a
// displacement along a pure-noise axis would be invisible to any encoder
// that has learned to ignore that axis). The direction is independent of the
// protected status. With fewer than 3 dims there is no backbone; axis 1 is
// used instead.
void emit_instance(const SynthSpec& spec, const SynthBackbone& backbone, int z, bool abnormal,
                   Rng& rng, Eigen::MatrixXd& features, Eigen::VectorXi& psv,
                   Eigen::VectorXi& labels, Eigen::Index row) {
  const double bias = spec.bias_strength;
  const int cluster = static_cast<int>(rng.below(kSubClusters));

  Eigen::VectorXd anomaly_offset = Eigen::VectorXd::Zero(spec.n_dims);
  if (abnormal) {
    if (spec.n_dims >= 3) {
      Eigen::VectorXd direction = Eigen::VectorXd::Zero(spec.n_dims);
      for (Eigen::Index j = 2; j < spec.n_dims; ++j) direction[j] = rng.normal();
      anomaly_offset = spec.anomaly_shift * direction.normalized();
    } else {
      anomaly_offset[1] = spec.anomaly_shift;
    }
  }

  const double dilation = z == 1 ? 1.0 + kGroupDilationPerBias * bias : 1.0;
  for (Eigen::Index j = 0; j < spec.n_dims; ++j) {
    double mean = dilation * backbone.centers(cluster, j) + anomaly_offset[j];
    if (z == 1) mean += bias * backbone.displacement(cluster, j);
    if (j == 0) mean += (2 * z - 1) * 0.5 * kSeparationPerBias * bias;
    const double sigma = j == 0 ? kBiasAxisSigma : kLocalSigma;
    features(row, j) = rng.normal(mean, sigma);
  }
  psv[row] = z;
  labels[row] = abnormal ? 1 : 0;
}

Dataset shuffled(Dataset dataset, std::uint64_t seed) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(dataset.n_instances()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  Rng rng(seed);
  rng.shuffle(order);
  return take_rows(dataset, order);
}

}  // namespace

void SynthSpec::validate() const {
  if (n_per_group < 1) throw ConfigError("synth: n_per_group must be >= 1");
  if (n_dims < 2) throw ConfigError("synth: n_dims must be >= 2 (bias and anomaly axes)");
  if (bias_strength < 0.0 || bias_strength > 1.0)
    throw ConfigError("synth: bias_strength must be in [0,1]");
  if (anomaly_fraction < 0.0 || anomaly_fraction >= 1.0)
    throw ConfigError("synth: anomaly_fraction must be in [0,1)");
  if (!(anomaly_shift > 0.0)) throw ConfigError("synth: anomaly_shift must be > 0");
}

std::pair<Dataset, Dataset> synth_biased(const SynthSpec& spec) {
  spec.validate();
  const Eigen::Index per_group = spec.n_per_group;
  const Eigen::Index n = 2 * per_group;
  const auto n_anomalies = static_cast<Eigen::Index>(
      std::lround(spec.anomaly_fraction * static_cast<double>(per_group)));

  Dataset train, test;
  for (Dataset* d : {&train, &test}) {
    d->features.resize(n, spec.n_dims);
    d->psv.resize(n);
    d->labels = Eigen::VectorXi(n);
    d->feature_names.clear();
    for (Eigen::Index j = 0; j < spec.n_dims; ++j)
      d->feature_names.push_back("f" + std::to_string(j));
  }
  train.name = "synth-train";
  test.name = "synth-test";

  Rng rng(spec.seed);
  const SynthBackbone backbone = make_backbone(spec, rng);
  Eigen::Index row = 0;
  for (int z : {0, 1})
    for (Eigen::Index i = 0; i < per_group; ++i)
      emit_instance(spec, backbone, z, false, rng, train.features, train.psv, *train.labels,
                    row++);

  row = 0;
  for (int z : {0, 1})
    for (Eigen::Index i = 0; i < per_group; ++i)
      emit_instance(spec, backbone, z, i < n_anomalies, rng, test.features, test.psv,
                    *test.labels, row++);

  train = shuffled(std::move(train), mix_seed(spec.seed, 101));
  test = shuffled(std::move(test), mix_seed(spec.seed, 102));
  train.validate();
  test.validate();
  return {std::move(train), std::move(test)};
}

}  // namespace fairsvdd
