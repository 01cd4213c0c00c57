#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "fairsvdd/dataset.hpp"
#include "fairsvdd/errors.hpp"
#include "fairsvdd/synth.hpp"
#include "oracles.hpp"
#include "tempdir.hpp"

using namespace fairsvdd;
using testsupport::TempDir;

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// multiset of rows, for sub-multiset checks
std::multiset<std::string> row_multiset(const Dataset& d) {
  std::multiset<std::string> rows;
  for (Eigen::Index i = 0; i < d.n_instances(); ++i) {
    std::stringstream ss;
    ss << d.features.row(i) << '|' << d.psv[i];
    if (d.labels) ss << '|' << (*d.labels)[i];
    rows.insert(ss.str());
  }
  return rows;
}

Dataset tiny_dataset(const std::vector<int>& psv) {
  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(psv.size()), 2);
  d.psv.resize(static_cast<Eigen::Index>(psv.size()));
  for (std::size_t i = 0; i < psv.size(); ++i) {
    d.features(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
    d.features(static_cast<Eigen::Index>(i), 1) = 2.0 * static_cast<double>(i);
    d.psv[static_cast<Eigen::Index>(i)] = psv[i];
  }
  return d;
}

}  // namespace

TEST_CASE("load_csv: straightforward parse") {
  TempDir dir("load");
  write_file(dir.file("a.csv"), "x,y,race\n1.5,2,0\n3,4,1\n5,6.25,0\n");
  const Dataset d = load_csv(dir.file("a.csv"), "race");
  CHECK(d.n_instances() == 3);
  CHECK(d.n_dims() == 2);
  CHECK(d.psv[0] == 0);
  CHECK(d.psv[1] == 1);
  CHECK(d.psv[2] == 0);
  CHECK(d.features(0, 0) == 1.5);
  CHECK(d.features(2, 1) == 6.25);
  CHECK(d.feature_names == std::vector<std::string>{"x", "y"});
  CHECK_FALSE(d.labels.has_value());
}

TEST_CASE("load_csv: non-binary psv reports the offending row") {
  TempDir dir("badpsv");
  write_file(dir.file("a.csv"), "x,z\n1,0\n2,1\n3,0\n4,1\n5,2\n6,0\n");
  try {
    load_csv(dir.file("a.csv"), "z");
    FAIL("expected DataError");
  } catch (const DataError& err) {
    CHECK(std::string(err.what()).find("row 5") != std::string::npos);
  }
}

TEST_CASE("load_csv: missing file / missing column / bad cell") {
  TempDir dir("errors");
  CHECK_THROWS_AS(load_csv(dir.file("nope.csv"), "z"), DataError);

  write_file(dir.file("a.csv"), "x,z\n1,0\n");
  CHECK_THROWS_AS(load_csv(dir.file("a.csv"), "gender"), DataError);
  CHECK_THROWS_AS(load_csv(dir.file("a.csv"), "z", std::optional<std::string>("label")),
                  DataError);

  write_file(dir.file("b.csv"), "x,z\n1,0\nfoo,1\n");
  try {
    load_csv(dir.file("b.csv"), "z");
    FAIL("expected DataError");
  } catch (const DataError& err) {
    const std::string what = err.what();
    CHECK(what.find("row 2") != std::string::npos);
    CHECK(what.find("'x'") != std::string::npos);
  }

  // NaN/Inf are rejected rather than imputed
  write_file(dir.file("c.csv"), "x,z\nnan,0\n");
  CHECK_THROWS_AS(load_csv(dir.file("c.csv"), "z"), DataError);
  write_file(dir.file("d.csv"), "x,z\ninf,0\n");
  CHECK_THROWS_AS(load_csv(dir.file("d.csv"), "z"), DataError);
}

TEST_CASE("load_csv: tabular file with 11 feature columns plus psv and label") {
  TempDir dir("compas");
  std::stringstream content;
  for (int c = 0; c < 11; ++c) content << 'c' << c << ',';
  content << "race,two_year_recid\n";
  for (int r = 0; r < 7; ++r) {
    for (int c = 0; c < 11; ++c) content << r * 11 + c << ',';
    content << r % 2 << ',' << (r < 2 ? 1 : 0) << '\n';
  }
  write_file(dir.file("compas.csv"), content.str());
  const Dataset d =
      load_csv(dir.file("compas.csv"), "race", std::optional<std::string>("two_year_recid"));
  CHECK(d.n_dims() == 11);
  CHECK(d.n_instances() == 7);
  REQUIRE(d.labels.has_value());
  CHECK(d.labels->sum() == 2);
}

TEST_CASE("csv round-trip is exact") {
  SynthSpec spec;
  spec.n_per_group = 40;
  spec.n_dims = 3;
  spec.seed = 9;
  auto [train, test] = synth_biased(spec);

  TempDir dir("roundtrip");
  save_csv(test, dir.file("t.csv"));
  const Dataset re = load_csv(dir.file("t.csv"), test.psv_name,
                              std::optional<std::string>(test.label_name));
  CHECK(re.n_instances() == test.n_instances());
  CHECK((re.features - test.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK((re.psv - test.psv).cwiseAbs().maxCoeff() == 0);
  CHECK((*re.labels - *test.labels).cwiseAbs().maxCoeff() == 0);
  CHECK(re.feature_names == test.feature_names);
}

TEST_CASE("standardize: population-variance convention") {
  Dataset train;
  train.features.resize(3, 1);
  train.features << 1.0, 2.0, 3.0;
  train.psv = Eigen::VectorXi::Zero(3);
  train.psv[1] = 1;

  auto [scaled, scaler] = standardize(train, {});
  CHECK(scaled[0].features(0, 0) == doctest::Approx(-1.2247).epsilon(1e-4));
  CHECK(scaled[0].features(1, 0) == doctest::Approx(0.0));
  CHECK(scaled[0].features(2, 0) == doctest::Approx(1.2247).epsilon(1e-4));
  CHECK(scaler.mean[0] == doctest::Approx(2.0));
}

TEST_CASE("standardize: constant columns map to zero, train stats apply to others") {
  Dataset train;
  train.features.resize(3, 2);
  train.features << 5.0, 1.0, 5.0, 2.0, 5.0, 3.0;
  train.psv = Eigen::VectorXi::Zero(3);
  train.psv[0] = 1;

  Dataset test = train;
  test.features << 7.0, 10.0, 5.0, 20.0, 5.0, 30.0;

  auto [scaled, scaler] = standardize(train, {test});
  // constant train column: everything (train and test) goes to 0
  CHECK(scaled[0].features.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(scaled[1].features.col(0).cwiseAbs().maxCoeff() == 0.0);
  // test column scaled with train's mean/variance, not its own
  const double sigma = std::sqrt(2.0 / 3.0);
  CHECK(scaled[1].features(0, 1) == doctest::Approx((10.0 - 2.0) / sigma));
  CHECK(scaled[1].features(2, 1) == doctest::Approx((30.0 - 2.0) / sigma));
}

TEST_CASE("balance_by_psv: table-style reduction 1480/1210 -> 1210/1210") {
  std::vector<int> psv(1480, 0);
  psv.insert(psv.end(), 1210, 1);
  const Dataset d = tiny_dataset(psv);
  const Dataset balanced = balance_by_psv(d, 3);
  const auto [n0, n1] = balanced.group_sizes();
  CHECK(n0 == 1210);
  CHECK(n1 == 1210);

  // output is a sub-multiset of the input
  const auto input_rows = row_multiset(d);
  for (const auto& row : row_multiset(balanced)) CHECK(input_rows.count(row) >= 1);
}

TEST_CASE("balance_by_psv: already balanced input is returned unchanged") {
  const Dataset d = tiny_dataset({0, 1, 0, 1});
  const Dataset balanced = balance_by_psv(d, 11);
  CHECK(row_multiset(balanced) == row_multiset(d));
}

TEST_CASE("balance_by_psv: deterministic subset for a fixed seed") {
  std::vector<int> psv(10, 0);
  psv.insert(psv.end(), 4, 1);
  const Dataset d = tiny_dataset(psv);
  const Dataset a = balance_by_psv(d, 42);
  const Dataset b = balance_by_psv(d, 42);
  CHECK((a.features - b.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK(row_multiset(a) == row_multiset(b));
  const auto [n0, n1] = a.group_sizes();
  CHECK(n0 == 4);
  CHECK(n1 == 4);
}

TEST_CASE("balance_by_psv: single-group input is an error") {
  const Dataset d = tiny_dataset({0, 0, 0});
  CHECK_THROWS_AS(balance_by_psv(d, 1), DataError);
}

TEST_CASE("synth: train is normal-only and generation is bit-reproducible") {
  SynthSpec spec;
  spec.n_per_group = 50;
  spec.seed = 123;
  auto [train1, test1] = synth_biased(spec);
  auto [train2, test2] = synth_biased(spec);

  CHECK(train1.labels->sum() == 0);
  CHECK(test1.labels->sum() ==
        2 * static_cast<long>(std::lround(spec.anomaly_fraction * spec.n_per_group)));
  CHECK((train1.features - train2.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK((test1.features - test2.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK((train1.psv - train2.psv).cwiseAbs().maxCoeff() == 0);

  // byte-identical on disk too
  TempDir dir("synthdet");
  save_csv(train1, dir.file("a.csv"));
  save_csv(train2, dir.file("b.csv"));
  CHECK(read_file(dir.file("a.csv")) == read_file(dir.file("b.csv")));
}

TEST_CASE("synth: zero bias gives statistically indistinguishable group means") {
  SynthSpec spec;
  spec.n_per_group = 500;
  spec.bias_strength = 0.0;
  spec.seed = 7;
  auto [train, test] = synth_biased(spec);

  // per-dimension Welch test, Bonferroni-corrected family level 0.01;
  // z_{1 - 0.005/10} = 3.29
  for (Eigen::Index j = 0; j < train.n_dims(); ++j) {
    std::vector<double> g0, g1;
    for (Eigen::Index i = 0; i < train.n_instances(); ++i)
      (train.psv[i] == 1 ? g1 : g0).push_back(train.features(i, j));
    CHECK(std::abs(oracles::welch_t(g0, g1)) < 3.29);
  }
}

TEST_CASE("synth: full bias makes the protected status stump-predictable") {
  SynthSpec spec;
  spec.n_per_group = 1000;
  spec.bias_strength = 1.0;
  spec.seed = 7;
  auto [train, test] = synth_biased(spec);

  std::vector<double> axis0;
  std::vector<int> z;
  for (Eigen::Index i = 0; i < train.n_instances(); ++i) {
    axis0.push_back(train.features(i, 0));
    z.push_back(train.psv[i]);
  }
  CHECK(oracles::stump_accuracy(axis0, z) >= 0.95);
}

TEST_CASE("synth: degenerate specs are rejected") {
  SynthSpec spec;
  spec.n_per_group = 0;
  CHECK_THROWS_AS(synth_biased(spec), ConfigError);
  spec.n_per_group = 10;
  spec.n_dims = 1;
  CHECK_THROWS_AS(synth_biased(spec), ConfigError);
  spec.n_dims = 5;
  spec.bias_strength = 1.5;
  CHECK_THROWS_AS(synth_biased(spec), ConfigError);
}

TEST_CASE("split_dataset: deterministic partition of the full dataset") {
  const Dataset d = tiny_dataset({0, 1, 0, 1, 0, 1, 0, 1, 0, 1});
  auto [a1, b1] = split_dataset(d, 0.7, 5);
  auto [a2, b2] = split_dataset(d, 0.7, 5);
  CHECK(a1.n_instances() == 7);
  CHECK(b1.n_instances() == 3);
  CHECK((a1.features - a2.features).cwiseAbs().maxCoeff() == 0.0);

  auto combined = row_multiset(a1);
  for (const auto& row : row_multiset(b1)) combined.insert(row);
  CHECK(combined == row_multiset(d));
}

TEST_CASE("dataset validation catches bad shapes and values") {
  Dataset d = tiny_dataset({0, 1});
  CHECK_NOTHROW(d.validate());

  Dataset bad_psv = d;
  bad_psv.psv[0] = 2;
  CHECK_THROWS_AS(bad_psv.validate(), DataError);

  Dataset nonfinite = d;
  nonfinite.features(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(nonfinite.validate(), DataError);

  Dataset empty;
  empty.features.resize(0, 2);
  empty.psv.resize(0);
  CHECK_THROWS_AS(empty.validate(), DataError);
}
