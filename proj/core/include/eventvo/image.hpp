#pragma once

#include <filesystem>

#include <Eigen/Core>

namespace eventvo {

// Row-major float image indexed (row = y, col = x).
using Image = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Bilinear read; samples outside the image are zero.
double sample_bilinear(const Image& img, double x, double y);
// Distributes `weight` over the four neighbours of (x, y); outside taps drop.
void splat_bilinear(Image& img, double x, double y, double weight);

// Separable Gaussian blur with clamped borders. sigma <= 0 returns a copy.
Image gaussian_blur(const Image& img, double sigma);

// 3x3 Sobel derivatives with replicated borders.
void sobel(const Image& img, Image& gx, Image& gy);

// Trace of the intensity-weighted covariance of pixel coordinates. Lower
// means the mass is more concentrated. Returns 0 for an empty image.
double spatial_variance(const Image& img);

// Binary 8-bit PGM, linearly scaled so the maximum maps to 255.
void write_pgm(const std::filesystem::path& path, const Image& img);

}  // namespace eventvo
