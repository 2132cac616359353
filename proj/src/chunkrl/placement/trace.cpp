#include "chunkrl/placement/trace.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "chunkrl/core/errors.hpp"

namespace chunkrl::placement {

const char* component_name(Component c) {
  switch (c) {
  case Component::Simulator:
    return "simulator";
  case Component::Generation:
    return "generation";
  case Component::Training:
    return "training";
  }
  return "?";
}

void EpochTrace::add(const SlotRange& slots, Component component,
                     const std::string& activity, double t_start, double t_end) {
  for (int slot = slots.begin; slot <= slots.end; ++slot)
    intervals.push_back(TraceInterval{slot, component, activity, t_start, t_end});
}

double throughput(const EpochTrace& trace) {
  if (trace.frames <= 0 || trace.intervals.empty())
    throw EmptyTrace("throughput of an empty epoch");
  double span = trace.epoch_end;
  if (span <= 0.0)
    throw EmptyTrace("epoch has no time span");
  return static_cast<double>(trace.frames) / span;
}

void validate_trace(const EpochTrace& trace) {
  std::map<int, std::vector<std::pair<double, double>>> by_slot;
  for (const TraceInterval& iv : trace.intervals)
    by_slot[iv.slot].emplace_back(iv.t_start, iv.t_end);
  for (auto& [slot, spans] : by_slot) {
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i) {
      if (spans[i].first < spans[i - 1].second - 1e-12)
        throw Error("overlapping intervals on slot " + std::to_string(slot));
    }
  }
}

std::string export_trace(const EpochTrace& trace) {
  std::ostringstream out;
  out.precision(17);
  for (const TraceInterval& iv : trace.intervals) {
    out << "{\"slot\":" << iv.slot << ",\"component\":\"" << component_name(iv.component)
        << "\",\"activity\":\"" << iv.activity << "\",\"t_start\":" << iv.t_start
        << ",\"t_end\":" << iv.t_end << "}\n";
  }
  return out.str();
}

} // namespace chunkrl::placement
