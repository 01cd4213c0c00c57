#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairsvdd/checkpoint.hpp"
#include "fairsvdd/dataset.hpp"
#include "fairsvdd/errors.hpp"
#include "fairsvdd/fair.hpp"
#include "fairsvdd/metrics.hpp"
#include "fairsvdd/rng.hpp"
#include "fairsvdd/svdd.hpp"
#include "fairsvdd/synth.hpp"

namespace fs = std::filesystem;

namespace fairsvdd::cli {

namespace {

// seed streams for CLI-level randomness, distinct from the training streams
constexpr std::uint64_t kBalanceStream = 201;

std::string fmt(double value, int precision = 4) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, value);
  return buf;
}

// full-precision CSV field, round-trips the double exactly
std::string csv_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create out dir '" + out_dir + "': " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

// The resolved configuration of the subcommand that ran, in its own config
// format. Feeding the file back through --config reproduces the run.
void write_resolved_config(const CLI::App& cmd, const std::string& out_dir) {
  write_text(out_dir + "/run_config.ini", cmd.config_to_str(true, false));
}

struct DataOptions {
  std::string path;
  std::string psv_col = "psv";
  std::string label_col;
};

Dataset load_dataset(const DataOptions& opts) {
  return load_csv(opts.path, opts.psv_col,
                  opts.label_col.empty() ? std::nullopt
                                         : std::optional<std::string>(opts.label_col));
}

void add_data_options(CLI::App& cmd, DataOptions& opts, const char* path_flag,
                      const char* what, bool required = true) {
  auto* opt = cmd.add_option(path_flag, opts.path, std::string("path to the ") + what + " CSV");
  if (required) opt->required();
  cmd.add_option("--psv-col", opts.psv_col, "name of the protected-status column")
      ->capture_default_str();
  cmd.add_option("--label-col", opts.label_col,
                 "name of the normal/abnormal label column, if present");
}

void add_train_options(CLI::App& cmd, TrainConfig& config) {
  cmd.add_option("--lr", config.learning_rate, "Adam learning rate")->capture_default_str();
  cmd.add_option("--batch-size", config.batch_size, "minibatch size")->capture_default_str();
  cmd.add_option("--weight-decay", config.weight_decay, "encoder weight decay alpha")
      ->capture_default_str();
  cmd.add_option("--pretrain-epochs", config.pretrain_epochs,
                 "encoder pretraining epochs (also the discriminator warm-up budget)")
      ->capture_default_str();
  cmd.add_option("--adv-epochs", config.adversarial_epochs, "adversarial epochs")
      ->capture_default_str();
  cmd.add_option("--seed", config.seed, "run seed; fixes every random choice")
      ->capture_default_str();
  cmd.add_option("--enc-hidden", config.encoder_hidden,
                 "encoder layer widths, last one is the embedding dimension")
      ->delimiter(',')
      ->capture_default_str();
  cmd.add_option("--disc-hidden", config.disc_hidden, "discriminator hidden widths")
      ->delimiter(',')
      ->capture_default_str();
}

std::optional<Eigen::Index> anomaly_count(const Dataset& data, int k_flag) {
  if (k_flag >= 0) return static_cast<Eigen::Index>(k_flag);
  if (data.labels) return static_cast<Eigen::Index>(data.labels->sum());
  return std::nullopt;
}

FairnessReport evaluate_scores(const Eigen::VectorXd& scores, const Dataset& data, int k_flag,
                               double threshold_flag, bool has_threshold) {
  std::optional<double> threshold;
  if (has_threshold) threshold = threshold_flag;
  return evaluate(scores, data.psv, data.labels, anomaly_count(data, k_flag), threshold);
}

void print_report(const FairnessReport& report) {
  const bool satisfies = report.p_rule >= 0.8;
  std::cout << "p%-rule:       " << fmt(report.p_rule) << "  ("
            << (satisfies ? "satisfies" : "violates") << " the 80% rule)\n"
            << "wasserstein-1: " << fmt(report.wasserstein) << "\n"
            << "auc:           " << (report.auc ? fmt(*report.auc) : std::string("n/a"))
            << "\n"
            << "threshold:     " << fmt(report.threshold, 6) << "\n"
            << "counts: z0 normal=" << report.counts.z0_normal
            << " abnormal=" << report.counts.z0_abnormal
            << " | z1 normal=" << report.counts.z1_normal
            << " abnormal=" << report.counts.z1_abnormal << "\n";
}

// --- synth ------------------------------------------------------------

struct SynthOptions {
  SynthSpec spec;
  bool balanced = false;
  std::string out_dir = "out";
};

void run_synth(const SynthOptions& opts) {
  ensure_out_dir(opts.out_dir);
  auto [train, test] = synth_biased(opts.spec);
  if (opts.balanced) train = balance_by_psv(train, mix_seed(opts.spec.seed, kBalanceStream));

  save_csv(train, opts.out_dir + "/train.csv");
  save_csv(test, opts.out_dir + "/test.csv");

  const auto [train0, train1] = train.group_sizes();
  const auto [test0, test1] = test.group_sizes();
  std::cout << "wrote " << opts.out_dir << "/train.csv: " << train.n_instances()
            << " instances (z0=" << train0 << ", z1=" << train1 << ", all normal)\n";
  std::cout << "wrote " << opts.out_dir << "/test.csv: " << test.n_instances()
            << " instances (z0=" << test0 << ", z1=" << test1
            << ", anomalies=" << test.labels->sum() << ")\n";
}

// --- train ------------------------------------------------------------

struct TrainOptions {
  DataOptions data;
  TrainConfig config;
  bool fair = false;
  bool balanced = false;
  double lambda = 1.0;
  std::string out_dir = "out";
};

void run_train(const TrainOptions& opts) {
  ensure_out_dir(opts.out_dir);
  Dataset train = load_dataset(opts.data);
  if (train.labels && train.labels->sum() > 0)
    throw DataError("training set must contain only normal instances (label 0), found " +
                    std::to_string(train.labels->sum()) + " abnormal");
  if (opts.balanced) train = balance_by_psv(train, mix_seed(opts.config.seed, kBalanceStream));

  const Scaler scaler = Scaler::fit(train);
  const Dataset scaled = scaler.transform(train);

  TrainConfig config = opts.config;
  config.lambda_fair = opts.lambda;

  Checkpoint checkpoint;
  std::vector<TraceRow> trace;
  if (opts.fair) {
    FairSvddModel model = train_fair_svdd(scaled, config);
    trace = model.trace;
    checkpoint = Checkpoint::from_fair(model, scaler);
  } else {
    SvddModel model = train_svdd(scaled, config, &trace);
    checkpoint = Checkpoint::from_svdd(model, scaler);
  }

  save_checkpoint(checkpoint, opts.out_dir + "/checkpoint.json");
  save_trace_csv(trace, opts.out_dir + "/trace.csv");

  std::cout << "trained " << (opts.fair ? "fair" : "plain") << " model on "
            << scaled.n_instances() << " instances, " << trace.size() << " epochs\n";
  if (!trace.empty()) {
    const TraceRow& last = trace.back();
    std::cout << "final losses:";
    if (last.l_svdd) std::cout << " l_svdd=" << fmt(*last.l_svdd, 6);
    if (last.l_d) std::cout << " l_d=" << fmt(*last.l_d, 6);
    if (last.l_adv) std::cout << " l_adv=" << fmt(*last.l_adv, 6);
    std::cout << "\n";
  }
  std::cout << "wrote " << opts.out_dir << "/checkpoint.json and trace.csv\n";
}

// --- evaluate ---------------------------------------------------------

struct EvaluateOptions {
  std::string checkpoint_path;
  DataOptions data;
  int k_anomalies = -1;
  double threshold = 0.0;
  bool has_threshold = false;
  bool export_embeddings_flag = false;
  std::string out_dir = "out";
};

void run_evaluate(const EvaluateOptions& opts) {
  ensure_out_dir(opts.out_dir);
  const Checkpoint checkpoint = load_checkpoint(opts.checkpoint_path);
  const Dataset test = load_dataset(opts.data);
  const Dataset scaled = checkpoint.scaler ? checkpoint.scaler->transform(test) : test;
  const SvddModel model = checkpoint.svdd_model();

  const Eigen::VectorXd scores = score(model, scaled);
  const FairnessReport report =
      evaluate_scores(scores, test, opts.k_anomalies, opts.threshold, opts.has_threshold);

  save_report(report, opts.out_dir + "/report.json");
  export_scores(scores, test, opts.out_dir + "/scores.csv");
  if (opts.export_embeddings_flag)
    export_embeddings(model, scaled, opts.out_dir + "/embeddings.csv");

  std::cout << "evaluated " << test.n_instances() << " instances from " << opts.data.path << "\n";
  print_report(report);
  std::cout << "wrote " << opts.out_dir << "/report.json and scores.csv\n";
}

// --- sweep ------------------------------------------------------------

struct SweepOptions {
  DataOptions train_data;
  DataOptions test_data;
  TrainConfig config;
  std::vector<double> lambdas = {0.01, 0.1, 1.0, 10.0, 100.0};
  int k_anomalies = -1;
  bool balanced = false;
  std::string out_dir = "out";
};

void run_sweep(const SweepOptions& opts) {
  if (opts.lambdas.empty()) throw ConfigError("sweep: --lambdas must be nonempty");
  ensure_out_dir(opts.out_dir);
  Dataset train = load_dataset(opts.train_data);
  if (train.labels && train.labels->sum() > 0)
    throw DataError("training set must contain only normal instances (label 0)");
  if (opts.balanced) train = balance_by_psv(train, mix_seed(opts.config.seed, kBalanceStream));
  const Dataset test = load_dataset(opts.test_data);

  const Scaler scaler = Scaler::fit(train);
  const Dataset scaled_train = scaler.transform(train);
  const Dataset scaled_test = scaler.transform(test);

  const std::string table_path = opts.out_dir + "/sweep.csv";
  std::ofstream table(table_path);
  if (!table) throw IoError("cannot write '" + table_path + "'");
  table << "lambda,p_rule,wasserstein,auc\n";
  std::cout << "lambda      p_rule  wasserstein  auc\n";

  for (double lambda : opts.lambdas) {
    // every run re-trains from scratch with fresh streams off the same base seed
    TrainConfig config = opts.config;
    config.lambda_fair = lambda;
    try {
      const FairSvddModel model = train_fair_svdd(scaled_train, config);
      const Eigen::VectorXd scores = score(model.svdd, scaled_test);
      const FairnessReport report =
          evaluate_scores(scores, test, opts.k_anomalies, 0.0, false);
      table << csv_double(lambda) << ',' << csv_double(report.p_rule) << ','
            << csv_double(report.wasserstein) << ',';
      if (report.auc) table << csv_double(*report.auc);
      table << '\n';
      table.flush();
      std::cout << fmt(lambda, 4) << "  " << fmt(report.p_rule) << "  "
                << fmt(report.wasserstein) << "       "
                << (report.auc ? fmt(*report.auc) : std::string("n/a")) << "\n";
    } catch (const std::exception& err) {
      table << "# incomplete: run with lambda=" << csv_double(lambda)
            << " failed: " << err.what() << '\n';
      table.flush();
      throw;
    }
  }
  std::cout << "wrote " << table_path << "\n";
}

// --- overlap ----------------------------------------------------------

struct OverlapOptions {
  std::string checkpoint_a;
  std::string checkpoint_b;
  DataOptions data;
  int k_anomalies = -1;
  std::string out_dir = "out";
};

std::set<Eigen::Index> predicted_anomalies(const Eigen::VectorXd& scores, Eigen::Index k) {
  const double threshold = threshold_from_count(scores, k);
  std::set<Eigen::Index> predictions;
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    if (scores[i] > threshold) predictions.insert(i);
  return predictions;
}

std::pair<long, long> group_split(const std::set<Eigen::Index>& predictions,
                                  const Eigen::VectorXi& psv) {
  long z0 = 0, z1 = 0;
  for (Eigen::Index i : predictions) (psv[i] == 1 ? z1 : z0) += 1;
  return {z0, z1};
}

void run_overlap(const OverlapOptions& opts) {
  ensure_out_dir(opts.out_dir);
  const Checkpoint a = load_checkpoint(opts.checkpoint_a);
  const Checkpoint b = load_checkpoint(opts.checkpoint_b);
  const Dataset test = load_dataset(opts.data);

  const auto k = anomaly_count(test, opts.k_anomalies);
  if (!k) throw ConfigError("overlap: need --k-anomalies or a labeled test set");

  const Eigen::VectorXd scores_a =
      score(a.svdd_model(), a.scaler ? a.scaler->transform(test) : test);
  const Eigen::VectorXd scores_b =
      score(b.svdd_model(), b.scaler ? b.scaler->transform(test) : test);

  const auto set_a = predicted_anomalies(scores_a, *k);
  const auto set_b = predicted_anomalies(scores_b, *k);
  std::vector<Eigen::Index> shared;
  std::set_intersection(set_a.begin(), set_a.end(), set_b.begin(), set_b.end(),
                        std::back_inserter(shared));
  const double ratio = *k == 0 ? 1.0
                               : static_cast<double>(shared.size()) / static_cast<double>(*k);

  const auto [a0, a1] = group_split(set_a, test.psv);
  const auto [b0, b1] = group_split(set_b, test.psv);

  nlohmann::json doc{{"k", *k},
                     {"model_a", {{"z0", a0}, {"z1", a1}}},
                     {"model_b", {{"z0", b0}, {"z1", b1}}},
                     {"overlap_count", shared.size()},
                     {"overlap_ratio", ratio}};
  write_text(opts.out_dir + "/overlap.json", doc.dump(2) + "\n");

  std::cout << "              Z0 : Z1\n";
  std::cout << "model_a    " << a0 << " : " << a1 << "\n";
  std::cout << "model_b    " << b0 << " : " << b1 << "\n";
  std::cout << "overlap ratio: " << fmt(ratio, 2) << " (" << shared.size() << " of " << *k
            << " shared)\n";
  std::cout << "wrote " << opts.out_dir << "/overlap.json\n";
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Deep SVDD / Deep Fair SVDD anomaly detection"};
  app.require_subcommand(1);

  SynthOptions synth_opts;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic biased dataset pair");
  synth_cmd->set_config("--config", "", "read options from an INI file");
  synth_cmd->allow_config_extras(false);
  synth_cmd->add_option("--n-per-group", synth_opts.spec.n_per_group,
                        "normal instances per protected-status group")
      ->capture_default_str();
  synth_cmd->add_option("--dims", synth_opts.spec.n_dims, "feature dimensions (>= 2)")
      ->capture_default_str();
  synth_cmd->add_option("--bias", synth_opts.spec.bias_strength,
                        "how strongly features encode the protected status, in [0,1]")
      ->capture_default_str();
  synth_cmd->add_option("--anomaly-fraction", synth_opts.spec.anomaly_fraction,
                        "fraction of each test group that is abnormal")
      ->capture_default_str();
  synth_cmd->add_option("--anomaly-shift", synth_opts.spec.anomaly_shift,
                        "mean displacement of the abnormal cluster")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_opts.spec.seed, "generator seed")->capture_default_str();
  synth_cmd->add_flag("--balanced", synth_opts.balanced,
                      "equalize training group sizes by subsampling");
  synth_cmd->add_option("--out-dir", synth_opts.out_dir, "output directory")
      ->capture_default_str();

  TrainOptions train_opts;
  auto* train_cmd = app.add_subcommand("train", "train a plain or fair one-class model");
  train_cmd->set_config("--config", "", "read options from an INI file");
  train_cmd->allow_config_extras(false);
  add_data_options(*train_cmd, train_opts.data, "--train", "training");
  add_train_options(*train_cmd, train_opts.config);
  train_cmd->add_flag("--fair", train_opts.fair,
                      "train adversarially against a protected-status discriminator");
  train_cmd->add_option("--lambda", train_opts.lambda,
                        "trade-off weight of the discriminator loss")
      ->capture_default_str();
  train_cmd->add_flag("--balanced", train_opts.balanced,
                      "equalize training group sizes before fitting");
  train_cmd->add_option("--out-dir", train_opts.out_dir, "output directory")
      ->capture_default_str();

  EvaluateOptions eval_opts;
  auto* eval_cmd = app.add_subcommand("evaluate", "score a test set and report fairness metrics");
  eval_cmd->set_config("--config", "", "read options from an INI file");
  eval_cmd->allow_config_extras(false);
  eval_cmd->add_option("--checkpoint", eval_opts.checkpoint_path, "trained model checkpoint")
      ->required();
  add_data_options(*eval_cmd, eval_opts.data, "--test", "test");
  eval_cmd->add_option("--k-anomalies", eval_opts.k_anomalies,
                       "expected anomaly count; default: number of abnormal labels");
  auto* threshold_opt =
      eval_cmd->add_option("--threshold", eval_opts.threshold, "explicit score threshold");
  eval_cmd->add_flag("--export-embeddings", eval_opts.export_embeddings_flag,
                     "also write embeddings.csv for the test set");
  eval_cmd->add_option("--out-dir", eval_opts.out_dir, "output directory")
      ->capture_default_str();

  SweepOptions sweep_opts;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "re-train the fair model across lambda values");
  sweep_cmd->set_config("--config", "", "read options from an INI file");
  sweep_cmd->allow_config_extras(false);
  add_data_options(*sweep_cmd, sweep_opts.train_data, "--train", "training");
  sweep_cmd->add_option("--test", sweep_opts.test_data.path, "path to the test CSV")->required();
  add_train_options(*sweep_cmd, sweep_opts.config);
  sweep_cmd->add_option("--lambdas", sweep_opts.lambdas, "lambda values to sweep")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--k-anomalies", sweep_opts.k_anomalies,
                        "expected anomaly count; default: number of abnormal labels");
  sweep_cmd->add_flag("--balanced", sweep_opts.balanced,
                      "equalize training group sizes before fitting");
  sweep_cmd->add_option("--out-dir", sweep_opts.out_dir, "output directory")
      ->capture_default_str();

  OverlapOptions overlap_opts;
  auto* overlap_cmd =
      app.add_subcommand("overlap", "compare two models' anomaly predictions on one test set");
  overlap_cmd->set_config("--config", "", "read options from an INI file");
  overlap_cmd->allow_config_extras(false);
  overlap_cmd->add_option("--checkpoint-a", overlap_opts.checkpoint_a, "first checkpoint")
      ->required();
  overlap_cmd->add_option("--checkpoint-b", overlap_opts.checkpoint_b, "second checkpoint")
      ->required();
  add_data_options(*overlap_cmd, overlap_opts.data, "--test", "test");
  overlap_cmd->add_option("--k-anomalies", overlap_opts.k_anomalies,
                          "anomaly count; default: number of abnormal labels");
  overlap_cmd->add_option("--out-dir", overlap_opts.out_dir, "output directory")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (synth_cmd->parsed()) {
      run_synth(synth_opts);
      write_resolved_config(*synth_cmd, synth_opts.out_dir);
    } else if (train_cmd->parsed()) {
      run_train(train_opts);
      write_resolved_config(*train_cmd, train_opts.out_dir);
    } else if (eval_cmd->parsed()) {
      eval_opts.has_threshold = threshold_opt->count() > 0;
      run_evaluate(eval_opts);
      write_resolved_config(*eval_cmd, eval_opts.out_dir);
    } else if (sweep_cmd->parsed()) {
      run_sweep(sweep_opts);
      write_resolved_config(*sweep_cmd, sweep_opts.out_dir);
    } else if (overlap_cmd->parsed()) {
      run_overlap(overlap_opts);
      write_resolved_config(*overlap_cmd, overlap_opts.out_dir);
    }
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& err) {
    std::cerr << "numeric abort: " << err.what() << "\n";
    return kExitNumeric;
  } catch (const IoError& err) {
    std::cerr << "i/o error: " << err.what() << "\n";
    return kExitIo;
  } catch (const DataError& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return kExitData;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace fairsvdd::cli
