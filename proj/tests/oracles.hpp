#pragma once

#include <cmath>
#include <vector>

#include "vstain/image.hpp"

// Straight loop implementations used as references for the library metrics.
namespace vstain::oracle {

inline double mae(const ImageD& p, const ImageD& g) {
  double s = 0.0;
  for (Eigen::Index r = 0; r < p.rows(); ++r)
    for (Eigen::Index c = 0; c < p.cols(); ++c) s += std::abs(p(r, c) - g(r, c));
  return s / static_cast<double>(p.size());
}

inline double mse(const ImageD& p, const ImageD& g) {
  double s = 0.0;
  for (Eigen::Index r = 0; r < p.rows(); ++r)
    for (Eigen::Index c = 0; c < p.cols(); ++c) s += (p(r, c) - g(r, c)) * (p(r, c) - g(r, c));
  return s / static_cast<double>(p.size());
}

inline double ed(const ImageD& p, const ImageD& g) { return std::sqrt(mse(p, g) * static_cast<double>(p.size())); }

inline double pcc(const ImageD& p, const ImageD& g) {
  const double n = static_cast<double>(p.size());
  double mp = 0.0, mg = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    mp += p.data()[i];
    mg += g.data()[i];
  }
  mp /= n;
  mg /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double a = p.data()[i] - mp, b = g.data()[i] - mg;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double cosine_distance(const ImageD& p, const ImageD& g) {
  double dot = 0.0, pp = 0.0, gg = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    dot += p.data()[i] * g.data()[i];
    pp += p.data()[i] * p.data()[i];
    gg += g.data()[i] * g.data()[i];
  }
  return 1.0 - dot / std::sqrt(pp * gg);
}

/// Gaussian-weighted SSIM averaged over every window fully inside the image.
inline double ssim(const ImageD& x, const ImageD& y, int win = 11, double sigma = 1.5, double c1 = 1e-4,
                   double c2 = 9e-4) {
  std::vector<double> w(static_cast<std::size_t>(win * win));
  double wsum = 0.0;
  const double c = (win - 1) / 2.0;
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) {
      const double v = std::exp(-((i - c) * (i - c) + (j - c) * (j - c)) / (2 * sigma * sigma));
      w[static_cast<std::size_t>(i * win + j)] = v;
      wsum += v;
    }
  for (double& v : w) v /= wsum;
  double total = 0.0;
  int count = 0;
  for (Eigen::Index r0 = 0; r0 + win <= x.rows(); ++r0)
    for (Eigen::Index c0 = 0; c0 + win <= x.cols(); ++c0) {
      double mx = 0, my = 0, exx = 0, eyy = 0, exy = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          const double k = w[static_cast<std::size_t>(i * win + j)];
          const double a = x(r0 + i, c0 + j), b = y(r0 + i, c0 + j);
          mx += k * a;
          my += k * b;
          exx += k * a * a;
          eyy += k * b * b;
          exy += k * a * b;
        }
      const double vx = exx - mx * mx, vy = eyy - my * my, cxy = exy - mx * my;
      total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return total / count;
}

}  // namespace vstain::oracle
