#pragma once

#include <string>
#include <vector>

#include "chunkrl/harness/config.hpp"

namespace chunkrl::harness {

struct EpochMetrics {
  int epoch = 0;
  double success_rate = 0.0; // success_once over completed episodes
  std::int64_t episodes = 0;
  std::int64_t frames = 0;
  double loss = 0.0;
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_frac = 0.0;
  double approx_kl = 0.0;
  double grad_norm = 0.0;
  bool skipped = false; // GRPO epochs where the filter retained nothing
  int groups_retained = 0;
  int groups_total = 0;
};

/// One line-delimited JSON record per epoch.
std::string metrics_line(const EpochMetrics& m);

/// Run manifest: config hash, seed, code version; enough to reproduce the
/// run bit-exactly on the virtual backend.
std::string manifest_json(const RunConfig& config, const std::string& command);

/// Minimal static SVG line chart (success rate vs epoch and friends).
std::string svg_line_chart(const std::string& title, const std::vector<double>& ys,
                           double y_min = 0.0, double y_max = 1.0);

/// Static SVG bar chart (throughput per configuration).
std::string svg_bar_chart(const std::string& title,
                          const std::vector<std::pair<std::string, double>>& bars);

void write_file(const std::string& path, const std::string& content);

extern const char* kCodeVersion;

} // namespace chunkrl::harness
