#include "eventvo/lifetime.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace eventvo {

std::map<int, FeatureLifetime> feature_lifetimes(const TrackTable& tracks) {
  std::map<int, FeatureLifetime> out;
  std::set<int> closed;  // ids whose first run already ended
  std::map<int, int> last_seen;
  for (const auto& [frame, observations] : tracks) {
    for (const auto& [id, px] : observations) {
      (void)px;
      if (closed.count(id)) continue;
      auto it = out.find(id);
      if (it == out.end()) {
        out[id] = {frame, 1};
      } else if (last_seen[id] == frame - 1) {
        ++it->second.lifetime;
      } else {
        closed.insert(id);
        continue;
      }
      last_seen[id] = frame;
    }
  }
  return out;
}

LifetimeStats lifetime_stats(const std::vector<int>& lifetimes,
                             int min_lifetime) {
  LifetimeStats stats;
  double sum = 0.0;
  for (int l : lifetimes) {
    if (l < min_lifetime) continue;
    ++stats.count;
    sum += l;
    ++stats.histogram[l];
  }
  if (stats.count == 0) return stats;
  stats.empty = false;
  stats.mean = sum / static_cast<double>(stats.count);
  double sq = 0.0;
  for (const auto& [l, n] : stats.histogram) {
    sq += static_cast<double>(n) * (l - stats.mean) * (l - stats.mean);
  }
  stats.stddev = std::sqrt(sq / static_cast<double>(stats.count));
  return stats;
}

LifetimeStats compute_lifetime_stats(const TrackTable& tracks,
                                     int min_lifetime,
                                     std::optional<int> max_birth_frame) {
  std::vector<int> lifetimes;
  for (const auto& [id, life] : feature_lifetimes(tracks)) {
    (void)id;
    if (max_birth_frame && life.birth_frame > *max_birth_frame) continue;
    lifetimes.push_back(life.lifetime);
  }
  return lifetime_stats(lifetimes, min_lifetime);
}

std::string format_lifetime_table(const LifetimeStats& stats,
                                  const std::string& label) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%-16s %-20s %s\n", "", "Average lifetime",
                "Standard variance");
  out += buf;
  if (stats.empty) {
    std::snprintf(buf, sizeof(buf), "%-16s %-20s %s\n", label.c_str(), "n/a",
                  "n/a");
  } else {
    char mean[64], sd[64];
    std::snprintf(mean, sizeof(mean), "%.3f frames", stats.mean);
    std::snprintf(sd, sizeof(sd), "%.3f frames", stats.stddev);
    std::snprintf(buf, sizeof(buf), "%-16s %-20s %s\n", label.c_str(), mean, sd);
  }
  out += buf;
  return out;
}

}  // namespace eventvo
