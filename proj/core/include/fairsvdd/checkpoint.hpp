#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>

#include "fairsvdd/dataset.hpp"
#include "fairsvdd/dense_net.hpp"
#include "fairsvdd/fair.hpp"
#include "fairsvdd/svdd.hpp"
#include "fairsvdd/train_config.hpp"

namespace fairsvdd {

// Self-describing model container, serialized as JSON (format documented in
// docs/file_formats.md, schemas/checkpoint.schema.json). Holds the encoder,
// the frozen center, the full config including the run seed, the fitted
// feature scaler when one was used, and the discriminator for fair models.
// Serialization is byte-deterministic, which the reproducibility contract of
// the CLI relies on.
struct Checkpoint {
  static constexpr int kVersion = 1;

  DenseNet encoder;
  Eigen::VectorXd center;
  TrainConfig config;
  std::optional<DenseNet> discriminator;
  std::optional<Scaler> scaler;

  SvddModel svdd_model() const { return SvddModel{encoder, center, config}; }

  static Checkpoint from_svdd(const SvddModel& model, std::optional<Scaler> scaler);
  static Checkpoint from_fair(const FairSvddModel& model, std::optional<Scaler> scaler);
};

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace fairsvdd
