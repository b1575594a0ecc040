#pragma once

#include <vector>

#include <Eigen/Core>

#include "eventvo/image.hpp"

namespace eventvo {

struct HarrisOptions {
  double k = 0.04;
  double window_sigma = 1.0;
  // Candidates below quality * (strongest response) are discarded.
  double quality = 0.01;
  int border = 3;
};

struct Corner {
  Eigen::Vector2d position;  // (u, v), integer pixel centres
  double response = 0.0;
};

// det(M) - k tr(M)^2 where M is the Gaussian-windowed structure tensor of
// 3x3 Sobel gradients.
Image harris_response(const Image& img, const HarrisOptions& options = {});

// Greedy suppression in (response desc, row-major) order: a candidate is
// dropped when an accepted corner lies within min_distance pixels.
std::vector<Corner> detect_harris(const Image& img, int max_features,
                                  double min_distance,
                                  const HarrisOptions& options = {});

}  // namespace eventvo
