#pragma once

#include <cstdint>
#include <utility>

#include "fairsvdd/dataset.hpp"

namespace fairsvdd {

// Controls for the synthetic biased-data generator. The two protected-status
// groups are Gaussian clusters whose mean separation along feature axis 0
// grows with bias_strength; group 1 additionally widens with bias_strength so
// anomaly scores pick up a group signature. Abnormal test instances are
// displaced along feature axis 1, orthogonal to the bias axis.
struct SynthSpec {
  int n_per_group = 1000;
  int n_dims = 10;
  double bias_strength = 0.8;    // in [0, 1]; 0 means groups are identically distributed
  double anomaly_fraction = 0.1; // test set only, in [0, 1)
  double anomaly_shift = 4.0;    // mean displacement of the abnormal cluster, > 0
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

// Generates (train, test). Train holds only normal instances (labels all 0);
// test mixes normal and abnormal instances at anomaly_fraction, split evenly
// across the two groups. Bit-reproducible for a fixed spec.
std::pair<Dataset, Dataset> synth_biased(const SynthSpec& spec);

}  // namespace fairsvdd
