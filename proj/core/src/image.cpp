#include "eventvo/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "eventvo/error.hpp"

namespace eventvo {

double sample_bilinear(const Image& img, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const double ax = x - fx;
  const double ay = y - fy;
  auto at = [&](int xx, int yy) -> double {
    if (xx < 0 || yy < 0 || xx >= img.cols() || yy >= img.rows()) return 0.0;
    return img(yy, xx);
  };
  return (1.0 - ay) * ((1.0 - ax) * at(x0, y0) + ax * at(x0 + 1, y0)) +
         ay * ((1.0 - ax) * at(x0, y0 + 1) + ax * at(x0 + 1, y0 + 1));
}

void splat_bilinear(Image& img, double x, double y, double weight) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const double ax = x - fx;
  const double ay = y - fy;
  auto add = [&](int xx, int yy, double w) {
    if (xx < 0 || yy < 0 || xx >= img.cols() || yy >= img.rows()) return;
    img(yy, xx) += w;
  };
  add(x0, y0, weight * (1.0 - ax) * (1.0 - ay));
  add(x0 + 1, y0, weight * ax * (1.0 - ay));
  add(x0, y0 + 1, weight * (1.0 - ax) * ay);
  add(x0 + 1, y0 + 1, weight * ax * ay);
}

Image gaussian_blur(const Image& img, double sigma) {
  if (sigma <= 0.0 || img.size() == 0) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  const int rows = static_cast<int>(img.rows());
  const int cols = static_cast<int>(img.cols());
  Image tmp(rows, cols);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int xx = std::clamp(x + i, 0, cols - 1);
        acc += kernel[i + radius] * img(y, xx);
      }
      tmp(y, x) = acc;
    }
  }
  Image out(rows, cols);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int yy = std::clamp(y + i, 0, rows - 1);
        acc += kernel[i + radius] * tmp(yy, x);
      }
      out(y, x) = acc;
    }
  }
  return out;
}

void sobel(const Image& img, Image& gx, Image& gy) {
  const int rows = static_cast<int>(img.rows());
  const int cols = static_cast<int>(img.cols());
  gx.setZero(rows, cols);
  gy.setZero(rows, cols);
  auto at = [&](int x, int y) {
    return img(std::clamp(y, 0, rows - 1), std::clamp(x, 0, cols - 1));
  };
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      gx(y, x) = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)) -
                 (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
      gy(y, x) = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)) -
                 (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
    }
  }
}

double spatial_variance(const Image& img) {
  double w = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
  for (Eigen::Index y = 0; y < img.rows(); ++y) {
    for (Eigen::Index x = 0; x < img.cols(); ++x) {
      const double v = img(y, x);
      if (v == 0.0) continue;
      w += v;
      sx += v * x;
      sy += v * y;
      sxx += v * x * x;
      syy += v * y * y;
    }
  }
  if (w <= 0.0) return 0.0;
  const double mx = sx / w;
  const double my = sy / w;
  return (sxx / w - mx * mx) + (syy / w - my * my);
}

void write_pgm(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "image", "cannot write " + path.string());
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  const double peak = img.size() > 0 ? img.maxCoeff() : 0.0;
  const double scale = peak > 0.0 ? 255.0 / peak : 0.0;
  for (Eigen::Index y = 0; y < img.rows(); ++y) {
    for (Eigen::Index x = 0; x < img.cols(); ++x) {
      const double v = std::clamp(img(y, x) * scale, 0.0, 255.0);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v))));
    }
  }
}

}  // namespace eventvo
