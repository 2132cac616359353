#include "chunkrl/harness/metrics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chunkrl/core/errors.hpp"

namespace chunkrl::harness {

const char* kCodeVersion = "chunkrl 0.1.0";

using nlohmann::json;

std::string metrics_line(const EpochMetrics& m) {
  json j{{"epoch", m.epoch},
         {"success_rate", m.success_rate},
         {"episodes", m.episodes},
         {"frames", m.frames},
         {"loss", m.loss},
         {"surrogate", m.surrogate},
         {"value_loss", m.value_loss},
         {"entropy", m.entropy},
         {"clip_frac", m.clip_frac},
         {"approx_kl", m.approx_kl},
         {"grad_norm", m.grad_norm},
         {"skipped", m.skipped},
         {"groups_retained", m.groups_retained},
         {"groups_total", m.groups_total}};
  return j.dump();
}

std::string manifest_json(const RunConfig& config, const std::string& command) {
  json j{{"config_hash", config_hash(config)},
         {"seed", config.seed},
         {"code_version", kCodeVersion},
         {"command", command},
         {"config", serialize_config(config)}};
  return j.dump(2);
}

std::string svg_line_chart(const std::string& title, const std::vector<double>& ys,
                           double y_min, double y_max) {
  const int w = 640, h = 360, pad = 40;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\">\n";
  out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title
      << "</text>\n";
  out << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << w - 2 * pad
      << "\" height=\"" << h - 2 * pad << "\" fill=\"none\" stroke=\"black\"/>\n";
  if (ys.size() > 1 && y_max > y_min) {
    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < ys.size(); ++i) {
      double x = pad + (w - 2.0 * pad) * static_cast<double>(i) / (ys.size() - 1);
      double yv = std::clamp(ys[i], y_min, y_max);
      double y = h - pad - (h - 2.0 * pad) * (yv - y_min) / (y_max - y_min);
      out << x << "," << y << " ";
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string svg_bar_chart(const std::string& title,
                          const std::vector<std::pair<std::string, double>>& bars) {
  const int w = 640, h = 360, pad = 40;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\">\n";
  out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title
      << "</text>\n";
  double max_v = 0.0;
  for (const auto& [name, v] : bars)
    max_v = std::max(max_v, v);
  if (max_v > 0.0 && !bars.empty()) {
    double bw = (w - 2.0 * pad) / bars.size();
    for (std::size_t i = 0; i < bars.size(); ++i) {
      double bh = (h - 2.0 * pad) * bars[i].second / max_v;
      double x = pad + i * bw;
      out << "<rect x=\"" << x + bw * 0.1 << "\" y=\"" << h - pad - bh << "\" width=\""
          << bw * 0.8 << "\" height=\"" << bh << "\" fill=\"steelblue\"/>\n";
      out << "<text x=\"" << x + bw / 2 << "\" y=\"" << h - pad + 14
          << "\" text-anchor=\"middle\" font-size=\"10\">" << bars[i].first << "</text>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path())
    std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out)
    throw Error("cannot write: " + path);
  out << content;
}

} // namespace chunkrl::harness
