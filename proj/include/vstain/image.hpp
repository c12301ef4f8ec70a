#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "vstain/random.hpp"

namespace vstain {

/// Single-channel raster, row-major. Every pipeline image is one of these.
template <typename Scalar>
using Image = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ImageF = Image<float>;
using ImageD = Image<double>;

enum class Modality { BF, PC, DIC };
enum class Organelle { Nucleus, Mitochondria, Tubulin, Actin };

inline constexpr std::array<Organelle, 4> kOrganelles = {
    Organelle::Nucleus, Organelle::Mitochondria, Organelle::Tubulin, Organelle::Actin};

inline constexpr std::string_view to_string(Organelle o) {
  switch (o) {
    case Organelle::Nucleus: return "nucleus";
    case Organelle::Mitochondria: return "mitochondria";
    case Organelle::Tubulin: return "tubulin";
    case Organelle::Actin: return "actin";
  }
  return "?";
}

inline constexpr std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::BF: return "BF";
    case Modality::PC: return "PC";
    case Modality::DIC: return "DIC";
  }
  return "?";
}

inline std::optional<Organelle> parse_organelle(std::string_view s) {
  for (auto o : kOrganelles)
    if (s == to_string(o)) return o;
  return std::nullopt;
}

inline std::optional<Modality> parse_modality(std::string_view s) {
  for (auto m : {Modality::BF, Modality::PC, Modality::DIC})
    if (s == to_string(m)) return m;
  return std::nullopt;
}

inline constexpr std::size_t index_of(Organelle o) { return static_cast<std::size_t>(o); }

struct SampleMeta {
  std::string study_id;
  Modality modality = Modality::BF;
};

/// Mirror an integer coordinate into [0, n) without repeating the edge
/// sample (-1 -> 1, n -> n-2). Works for arbitrarily distant coordinates.
inline Eigen::Index reflect_index(Eigen::Index i, Eigen::Index n) {
  if (n == 1) return 0;
  const Eigen::Index period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i >= n ? period - i : i;
}

/// Affine map of [min, max] onto [0, 1]. A constant image maps to zeros.
template <typename Derived>
Image<typename Derived::Scalar> normalize_min_max(const Eigen::MatrixBase<Derived>& img) {
  using Scalar = typename Derived::Scalar;
  if (img.size() == 0) throw std::invalid_argument("normalize_min_max: empty image");
  const double lo = static_cast<double>(img.minCoeff());
  const double hi = static_cast<double>(img.maxCoeff());
  if (!(hi > lo)) return Image<Scalar>::Zero(img.rows(), img.cols());
  const double scale = 1.0 / (hi - lo);
  return img.unaryExpr([=](Scalar v) {
    return static_cast<Scalar>(std::clamp((static_cast<double>(v) - lo) * scale, 0.0, 1.0));
  });
}

enum class FlipAxis { Horizontal, Vertical };

/// Horizontal mirrors columns, Vertical mirrors rows.
template <typename Derived>
Image<typename Derived::Scalar> flip(const Eigen::MatrixBase<Derived>& img, FlipAxis axis) {
  if (axis == FlipAxis::Horizontal) return img.rowwise().reverse();
  return img.colwise().reverse();
}

/// Bilinear sample at a real-valued (row, col) with reflect border handling.
template <typename Derived>
double sample_bilinear_reflect(const Eigen::MatrixBase<Derived>& img, double row, double col) {
  const double r0f = std::floor(row);
  const double c0f = std::floor(col);
  const double fr = row - r0f;
  const double fc = col - c0f;
  const auto r0 = static_cast<Eigen::Index>(r0f);
  const auto c0 = static_cast<Eigen::Index>(c0f);
  const Eigen::Index h = img.rows(), w = img.cols();
  const Eigen::Index ra = reflect_index(r0, h), rb = reflect_index(r0 + 1, h);
  const Eigen::Index ca = reflect_index(c0, w), cb = reflect_index(c0 + 1, w);
  const double v00 = img(ra, ca), v01 = img(ra, cb), v10 = img(rb, ca), v11 = img(rb, cb);
  return (1.0 - fr) * ((1.0 - fc) * v00 + fc * v01) + fr * ((1.0 - fc) * v10 + fc * v11);
}

/// Smooth random warp: a coarse lattice of uniform displacements in
/// [-magnitude, magnitude] (one node every grid_spacing pixels) is bilinearly
/// upsampled to a dense field, and the image is resampled with bilinear
/// interpolation and reflect borders. Deterministic in seed.
template <typename Derived>
Image<typename Derived::Scalar> elastic_transform(const Eigen::MatrixBase<Derived>& img,
                                                  std::uint64_t seed, int grid_spacing,
                                                  double magnitude) {
  using Scalar = typename Derived::Scalar;
  if (grid_spacing < 4) throw std::invalid_argument("elastic_transform: grid_spacing must be >= 4");
  if (!(magnitude >= 0.0)) throw std::invalid_argument("elastic_transform: magnitude must be >= 0");
  const Eigen::Index h = img.rows(), w = img.cols();
  const Eigen::Index nodes_r = (h - 1) / grid_spacing + 2;
  const Eigen::Index nodes_c = (w - 1) / grid_spacing + 2;
  ImageD lattice_dr(nodes_r, nodes_c), lattice_dc(nodes_r, nodes_c);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < nodes_r; ++i) {
    for (Eigen::Index j = 0; j < nodes_c; ++j) {
      lattice_dr(i, j) = rng.uniform(-magnitude, magnitude);
      lattice_dc(i, j) = rng.uniform(-magnitude, magnitude);
    }
  }
  Image<Scalar> out(h, w);
  const double inv = 1.0 / grid_spacing;
  for (Eigen::Index r = 0; r < h; ++r) {
    const double gr = static_cast<double>(r) * inv;
    const auto i0 = static_cast<Eigen::Index>(gr);
    const double tr = gr - static_cast<double>(i0);
    for (Eigen::Index c = 0; c < w; ++c) {
      const double gc = static_cast<double>(c) * inv;
      const auto j0 = static_cast<Eigen::Index>(gc);
      const double tc = gc - static_cast<double>(j0);
      auto lerp2 = [&](const ImageD& f) {
        return (1.0 - tr) * ((1.0 - tc) * f(i0, j0) + tc * f(i0, j0 + 1)) +
               tr * ((1.0 - tc) * f(i0 + 1, j0) + tc * f(i0 + 1, j0 + 1));
      };
      const double src_r = static_cast<double>(r) + lerp2(lattice_dr);
      const double src_c = static_cast<double>(c) + lerp2(lattice_dc);
      out(r, c) = static_cast<Scalar>(sample_bilinear_reflect(img, src_r, src_c));
    }
  }
  return out;
}

/// Extends an image to (height, width) >= its own size by mirroring across
/// the bottom and right edges. The original occupies the top-left corner.
template <typename Derived>
Image<typename Derived::Scalar> reflect_pad(const Eigen::MatrixBase<Derived>& img,
                                            Eigen::Index height, Eigen::Index width) {
  if (height < img.rows() || width < img.cols())
    throw std::invalid_argument("reflect_pad: target smaller than image");
  Image<typename Derived::Scalar> out(height, width);
  for (Eigen::Index r = 0; r < height; ++r) {
    const Eigen::Index sr = reflect_index(r, img.rows());
    for (Eigen::Index c = 0; c < width; ++c) out(r, c) = img(sr, reflect_index(c, img.cols()));
  }
  return out;
}

/// Bilinear resize with pixel-center alignment and clamped borders.
template <typename Derived>
Image<typename Derived::Scalar> resize_bilinear(const Eigen::MatrixBase<Derived>& img,
                                                Eigen::Index height, Eigen::Index width) {
  using Scalar = typename Derived::Scalar;
  if (height < 1 || width < 1 || img.size() == 0)
    throw std::invalid_argument("resize_bilinear: empty size");
  const double sr = static_cast<double>(img.rows()) / static_cast<double>(height);
  const double sc = static_cast<double>(img.cols()) / static_cast<double>(width);
  const double max_r = static_cast<double>(img.rows() - 1);
  const double max_c = static_cast<double>(img.cols() - 1);
  Image<Scalar> out(height, width);
  for (Eigen::Index r = 0; r < height; ++r) {
    const double y = std::clamp((static_cast<double>(r) + 0.5) * sr - 0.5, 0.0, max_r);
    const auto y0 = static_cast<Eigen::Index>(y);
    const Eigen::Index y1 = std::min<Eigen::Index>(y0 + 1, img.rows() - 1);
    const double fy = y - static_cast<double>(y0);
    for (Eigen::Index c = 0; c < width; ++c) {
      const double x = std::clamp((static_cast<double>(c) + 0.5) * sc - 0.5, 0.0, max_c);
      const auto x0 = static_cast<Eigen::Index>(x);
      const Eigen::Index x1 = std::min<Eigen::Index>(x0 + 1, img.cols() - 1);
      const double fx = x - static_cast<double>(x0);
      const double top = (1.0 - fx) * img(y0, x0) + fx * img(y0, x1);
      const double bottom = (1.0 - fx) * img(y1, x0) + fx * img(y1, x1);
      out(r, c) = static_cast<Scalar>((1.0 - fy) * top + fy * bottom);
    }
  }
  return out;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& img) {
  return img.allFinite();
}

}  // namespace vstain
