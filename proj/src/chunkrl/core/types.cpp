#include "chunkrl/core/types.hpp"

#include <cinttypes>
#include <cstdio>
#include <sstream>

namespace chunkrl {

std::string dump_slab(const TrajectorySlab& slab) {
  std::ostringstream out;
  out << "# env_id episode_uid step tokens[" << slab.tokens_per_action
      << "] reward terminated truncated valid\n";
  char buf[64];
  for (int e = 0; e < slab.num_envs; ++e) {
    std::int64_t step = 0;
    for (const auto& rec : slab.records[static_cast<std::size_t>(e)]) {
      for (int j = 0; j < slab.chunk_length; ++j, ++step) {
        out << e << ' ' << rec.episode_uid[static_cast<std::size_t>(j)] << ' ' << step;
        for (int tok : rec.chunk.actions[static_cast<std::size_t>(j)].tokens)
          out << ' ' << tok;
        std::snprintf(buf, sizeof(buf), " %.17g", rec.rewards[static_cast<std::size_t>(j)]);
        out << buf << ' ' << (rec.terminated[static_cast<std::size_t>(j)] ? 1 : 0) << ' '
            << (rec.truncated[static_cast<std::size_t>(j)] ? 1 : 0) << ' '
            << (rec.valid[static_cast<std::size_t>(j)] ? 1 : 0) << '\n';
      }
    }
  }
  return out.str();
}

} // namespace chunkrl
