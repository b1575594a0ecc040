#include "eventvo/harris.hpp"

#include <algorithm>

namespace eventvo {

Image harris_response(const Image& img, const HarrisOptions& options) {
  Image gx, gy;
  sobel(img, gx, gy);
  const Image sxx = gaussian_blur(gx * gx, options.window_sigma);
  const Image syy = gaussian_blur(gy * gy, options.window_sigma);
  const Image sxy = gaussian_blur(gx * gy, options.window_sigma);
  const Image trace = sxx + syy;
  return sxx * syy - sxy * sxy - options.k * trace * trace;
}

std::vector<Corner> detect_harris(const Image& img, int max_features,
                                  double min_distance,
                                  const HarrisOptions& options) {
  std::vector<Corner> out;
  if (max_features <= 0 || img.size() == 0) return out;
  const Image response = harris_response(img, options);

  const int rows = static_cast<int>(img.rows());
  const int cols = static_cast<int>(img.cols());
  double peak = 0.0;
  for (int y = options.border; y < rows - options.border; ++y) {
    for (int x = options.border; x < cols - options.border; ++x) {
      peak = std::max(peak, response(y, x));
    }
  }
  if (!(peak > 0.0)) return out;

  struct Candidate {
    double response;
    int index;  // row-major
  };
  std::vector<Candidate> candidates;
  const double floor = options.quality * peak;
  for (int y = options.border; y < rows - options.border; ++y) {
    for (int x = options.border; x < cols - options.border; ++x) {
      const double r = response(y, x);
      if (r > 0.0 && r >= floor) candidates.push_back({r, y * cols + x});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.response != b.response) return a.response > b.response;
              return a.index < b.index;
            });

  const double d2 = min_distance * min_distance;
  for (const Candidate& c : candidates) {
    const Eigen::Vector2d p(c.index % cols, c.index / cols);
    const bool suppressed =
        std::any_of(out.begin(), out.end(), [&](const Corner& kept) {
          return (kept.position - p).squaredNorm() <= d2;
        });
    if (suppressed) continue;
    out.push_back({p, c.response});
    if (static_cast<int>(out.size()) >= max_features) break;
  }
  return out;
}

}  // namespace eventvo
