#include "fairsvdd/trace.hpp"

#include <fstream>

#include "fairsvdd/errors.hpp"
#include "text_util.hpp"

namespace fairsvdd {

const char* phase_name(TrainPhase phase) {
  switch (phase) {
    case TrainPhase::pretrain: return "pretrain";
    case TrainPhase::disc_init: return "disc_init";
    case TrainPhase::adversarial: return "adversarial";
  }
  return "unknown";
}

void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "epoch,phase,l_svdd,l_d,l_adv\n";
  for (const auto& row : trace) {
    out << row.epoch << ',' << phase_name(row.phase) << ',';
    if (row.l_svdd) out << detail::format_double(*row.l_svdd);
    out << ',';
    if (row.l_d) out << detail::format_double(*row.l_d);
    out << ',';
    if (row.l_adv) out << detail::format_double(*row.l_adv);
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace fairsvdd
