#include "chunkrl/placement/plan.hpp"

#include <charconv>

#include "chunkrl/core/errors.hpp"

namespace chunkrl::placement {

SlotRange SlotRange::parse(const std::string& text) {
  SlotRange r;
  auto dash = text.find('-');
  auto parse_int = [&](std::string_view s) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw InvalidPlan("bad slot range: " + text);
    return value;
  };
  if (dash == std::string::npos) {
    r.begin = r.end = parse_int(text);
  } else {
    r.begin = parse_int(std::string_view(text).substr(0, dash));
    r.end = parse_int(std::string_view(text).substr(dash + 1));
  }
  if (r.end < r.begin)
    throw InvalidPlan("bad slot range: " + text);
  return r;
}

std::string SlotRange::to_string() const {
  if (begin == end)
    return std::to_string(begin);
  return std::to_string(begin) + "-" + std::to_string(end);
}

const char* placement_mode_name(PlacementMode mode) {
  switch (mode) {
  case PlacementMode::Colocated:
    return "colocated";
  case PlacementMode::Disaggregated:
    return "disaggregated";
  case PlacementMode::Hybrid:
    return "hybrid";
  }
  return "?";
}

void validate_plan(const PlacementPlan& plan) {
  if (plan.num_slots < 1)
    throw InvalidPlan("cluster needs at least one slot");
  for (const SlotRange& r : {plan.env_slots, plan.rollout_slots, plan.actor_slots}) {
    if (r.begin < 0 || r.end >= plan.num_slots)
      throw InvalidPlan("slot range " + r.to_string() + " outside cluster of " +
                        std::to_string(plan.num_slots) + " slots");
  }
  if (plan.pipeline_stage_num < 1)
    throw InvalidPlan("pipeline_stage_num must be >= 1");
}

PlacementMode derive_mode(const PlacementPlan& plan) {
  validate_plan(plan);
  if (plan.env_slots == plan.rollout_slots && plan.rollout_slots == plan.actor_slots)
    return PlacementMode::Colocated;
  bool disjoint = !plan.env_slots.overlaps(plan.rollout_slots) &&
                  !plan.env_slots.overlaps(plan.actor_slots) &&
                  !plan.rollout_slots.overlaps(plan.actor_slots);
  return disjoint ? PlacementMode::Disaggregated : PlacementMode::Hybrid;
}

} // namespace chunkrl::placement
