#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eventvo/event_io.hpp"

namespace eventvo {

struct FeatureLifetime {
  int birth_frame = 0;
  int lifetime = 0;  // consecutive frames from first appearance
};

// First contiguous run of every feature id in the table.
std::map<int, FeatureLifetime> feature_lifetimes(const TrackTable& tracks);

struct LifetimeStats {
  bool empty = true;  // no feature survived the filter
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::map<int, std::size_t> histogram;  // lifetime -> features
};

LifetimeStats lifetime_stats(const std::vector<int>& lifetimes,
                             int min_lifetime);

// Features born after max_birth_frame are excluded when it is set, so that
// runs truncated by the end of the sequence can be left out.
LifetimeStats compute_lifetime_stats(
    const TrackTable& tracks, int min_lifetime,
    std::optional<int> max_birth_frame = std::nullopt);

// Two-row summary in the "Average lifetime / Standard variance" layout.
std::string format_lifetime_table(const LifetimeStats& stats,
                                  const std::string& label);

}  // namespace eventvo
