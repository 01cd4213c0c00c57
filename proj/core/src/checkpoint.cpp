#include "fairsvdd/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fairsvdd/errors.hpp"

namespace fairsvdd {

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

json net_to_json(const DenseNet& net) {
  json layers = json::array();
  for (const auto& layer : net.layers) {
    json entry{{"activation", activation_name(layer.act)},
               {"rows", layer.weight.rows()},
               {"cols", layer.weight.cols()}};
    std::vector<double> weights;
    weights.reserve(static_cast<std::size_t>(layer.weight.size()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) weights.push_back(layer.weight(r, c));
    entry["weight"] = weights;
    if (layer.bias.size() > 0)
      entry["bias"] = std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size());
    if (layer.batch_norm) {
      entry["batch_norm"] = true;
      entry["running_mean"] = std::vector<double>(layer.running_mean.data(),
                                                  layer.running_mean.data() + layer.running_mean.size());
      entry["running_var"] = std::vector<double>(layer.running_var.data(),
                                                 layer.running_var.data() + layer.running_var.size());
    }
    layers.push_back(std::move(entry));
  }
  return {{"use_bias", net.use_bias}, {"layers", std::move(layers)}};
}

DenseNet net_from_json(const json& j) {
  DenseNet net;
  net.use_bias = j.at("use_bias").get<bool>();
  for (const auto& entry : j.at("layers")) {
    DenseLayer layer;
    layer.act = activation_from_name(entry.at("activation").get<std::string>());
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    const auto weights = entry.at("weight").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(weights.size()) != rows * cols)
      throw DataError("checkpoint: weight size does not match layer shape");
    layer.weight.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        layer.weight(r, c) = weights[static_cast<std::size_t>(r * cols + c)];
    if (entry.contains("bias")) {
      const auto bias = entry.at("bias").get<std::vector<double>>();
      layer.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(),
                                                     static_cast<Eigen::Index>(bias.size()));
    }
    if (entry.value("batch_norm", false)) {
      layer.batch_norm = true;
      const auto mean = entry.at("running_mean").get<std::vector<double>>();
      const auto var = entry.at("running_var").get<std::vector<double>>();
      layer.running_mean = Eigen::Map<const Eigen::VectorXd>(mean.data(),
                                                             static_cast<Eigen::Index>(mean.size()));
      layer.running_var = Eigen::Map<const Eigen::VectorXd>(var.data(),
                                                            static_cast<Eigen::Index>(var.size()));
    }
    net.layers.push_back(std::move(layer));
  }
  net.validate();
  return net;
}

json config_to_json(const TrainConfig& config) {
  return {{"learning_rate", config.learning_rate},
          {"disc_learning_rate", config.disc_learning_rate},
          {"batch_size", config.batch_size},
          {"weight_decay", config.weight_decay},
          {"lambda", config.lambda_fair},
          {"pretrain_epochs", config.pretrain_epochs},
          {"adversarial_epochs", config.adversarial_epochs},
          {"seed", config.seed},
          {"batch_norm", config.batch_norm},
          {"encoder_hidden", config.encoder_hidden},
          {"disc_hidden", config.disc_hidden}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig config;
  config.learning_rate = j.at("learning_rate").get<double>();
  config.disc_learning_rate = j.at("disc_learning_rate").get<double>();
  config.batch_size = j.at("batch_size").get<int>();
  config.weight_decay = j.at("weight_decay").get<double>();
  config.lambda_fair = j.at("lambda").get<double>();
  config.pretrain_epochs = j.at("pretrain_epochs").get<int>();
  config.adversarial_epochs = j.at("adversarial_epochs").get<int>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.batch_norm = j.at("batch_norm").get<bool>();
  config.encoder_hidden = j.at("encoder_hidden").get<std::vector<int>>();
  config.disc_hidden = j.at("disc_hidden").get<std::vector<int>>();
  return config;
}

}  // namespace

Checkpoint Checkpoint::from_svdd(const SvddModel& model, std::optional<Scaler> scaler) {
  Checkpoint checkpoint;
  checkpoint.encoder = model.encoder;
  checkpoint.center = model.center;
  checkpoint.config = model.config;
  checkpoint.scaler = std::move(scaler);
  return checkpoint;
}

Checkpoint Checkpoint::from_fair(const FairSvddModel& model, std::optional<Scaler> scaler) {
  Checkpoint checkpoint = from_svdd(model.svdd, std::move(scaler));
  checkpoint.discriminator = model.discriminator.net;
  return checkpoint;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  json doc{{"format", "fairsvdd-checkpoint"},
           {"version", Checkpoint::kVersion},
           {"config", config_to_json(checkpoint.config)},
           {"center", vector_to_json(checkpoint.center)},
           {"encoder", net_to_json(checkpoint.encoder)}};
  doc["discriminator"] =
      checkpoint.discriminator ? net_to_json(*checkpoint.discriminator) : json(nullptr);
  doc["scaler"] = checkpoint.scaler
                      ? json{{"mean", vector_to_json(checkpoint.scaler->mean)},
                             {"scale", vector_to_json(checkpoint.scaler->scale)}}
                      : json(nullptr);

  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& err) {
    throw DataError("checkpoint '" + path + "' is not valid JSON: " + err.what());
  }
  if (doc.value("format", "") != "fairsvdd-checkpoint")
    throw DataError("'" + path + "' is not a fairsvdd checkpoint");
  if (doc.at("version").get<int>() != Checkpoint::kVersion)
    throw DataError("checkpoint version " + doc.at("version").dump() + " not supported");

  Checkpoint checkpoint;
  checkpoint.config = config_from_json(doc.at("config"));
  checkpoint.center = vector_from_json(doc.at("center"));
  checkpoint.encoder = net_from_json(doc.at("encoder"));
  if (!doc.at("discriminator").is_null())
    checkpoint.discriminator = net_from_json(doc.at("discriminator"));
  if (!doc.at("scaler").is_null()) {
    Scaler scaler;
    scaler.mean = vector_from_json(doc.at("scaler").at("mean"));
    scaler.scale = vector_from_json(doc.at("scaler").at("scale"));
    checkpoint.scaler = std::move(scaler);
  }
  if (checkpoint.center.size() != checkpoint.encoder.output_dim())
    throw DataError("checkpoint: center dimension does not match encoder");
  return checkpoint;
}

}  // namespace fairsvdd
