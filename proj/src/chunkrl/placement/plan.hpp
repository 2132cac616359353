#pragma once

#include <string>

namespace chunkrl::placement {

/// Inclusive slot range with the "0-7" config syntax.
struct SlotRange {
  int begin = 0;
  int end = 0;

  static SlotRange parse(const std::string& text);
  std::string to_string() const;
  int count() const { return end - begin + 1; }
  bool contains(int slot) const { return slot >= begin && slot <= end; }
  bool overlaps(const SlotRange& o) const { return begin <= o.end && o.begin <= end; }
  bool operator==(const SlotRange&) const = default;
};

enum class PlacementMode { Colocated, Disaggregated, Hybrid };
const char* placement_mode_name(PlacementMode mode);

/// Component -> slot assignment plus offload flags and pipeline depth. The
/// mode is derived from the ranges, never declared.
struct PlacementPlan {
  int num_slots = 8;
  SlotRange env_slots{0, 7};
  SlotRange rollout_slots{0, 7};
  SlotRange actor_slots{0, 7};
  bool env_offload = false;
  bool rollout_offload = false;
  bool actor_offload = false;
  int pipeline_stage_num = 1; // k

  bool operator==(const PlacementPlan&) const = default;
};

/// Throws InvalidPlan for out-of-range slots, empty ranges or k < 1.
void validate_plan(const PlacementPlan& plan);

/// Colocated iff all three ranges are identical; disaggregated iff they are
/// pairwise disjoint; hybrid otherwise.
PlacementMode derive_mode(const PlacementPlan& plan);

} // namespace chunkrl::placement
