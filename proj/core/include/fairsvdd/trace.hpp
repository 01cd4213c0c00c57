#pragma once

#include <optional>
#include <string>
#include <vector>

namespace fairsvdd {

enum class TrainPhase { pretrain, disc_init, adversarial };
const char* phase_name(TrainPhase phase);

// Per-epoch mean losses. Only the losses a phase actually computes are
// recorded; absent entries serialize as blanks.
struct TraceRow {
  int epoch = 0;  // global epoch index across all phases
  TrainPhase phase = TrainPhase::pretrain;
  std::optional<double> l_svdd;
  std::optional<double> l_d;
  std::optional<double> l_adv;
};

// Trace CSV: epoch, phase, l_svdd, l_d, l_adv.
void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

}  // namespace fairsvdd
