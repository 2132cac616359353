#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chunkrl/placement/plan.hpp"

namespace chunkrl::placement {

enum class Component { Simulator, Generation, Training };
const char* component_name(Component c);

struct TraceInterval {
  int slot = 0;
  Component component = Component::Simulator;
  std::string activity; // "reset", "sim_step", "generate", "offload", ...
  double t_start = 0.0;
  double t_end = 0.0;
};

/// Per-slot timeline of one epoch plus the frame counter. Intervals on one
/// slot must never overlap; validate_trace checks it.
struct EpochTrace {
  std::vector<TraceInterval> intervals;
  std::int64_t frames = 0;
  double rollout_end = 0.0;
  double epoch_end = 0.0;

  void add(const SlotRange& slots, Component component, const std::string& activity,
           double t_start, double t_end);
};

/// frames / (rollout + training makespan). Throws EmptyTrace for a trace
/// with no frames or no time span.
double throughput(const EpochTrace& trace);

/// Throws Error if any two intervals on one slot overlap.
void validate_trace(const EpochTrace& trace);

/// Structured event log, one line per interval:
/// {"slot":..,"component":..,"activity":..,"t_start":..,"t_end":..}
std::string export_trace(const EpochTrace& trace);

} // namespace chunkrl::placement
