#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "vstain/image.hpp"

namespace vstain {

struct PatchPosition {
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  friend bool operator==(const PatchPosition&, const PatchPosition&) = default;
};

struct PatchGrid {
  Eigen::Index patch_size = 0;
  Eigen::Index stride = 0;
  Eigen::Index image_height = 0;
  Eigen::Index image_width = 0;
  std::vector<PatchPosition> positions;  // row-major order
};

/// Thrown by plan_grid when an image dimension is below the patch size.
/// Callers reflect-pad (see predict_image) and retry.
class ImageSmallerThanPatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Anchors 0, stride, 2*stride, ... along one axis, plus (extent - patch)
/// when the stride sequence does not end there.
inline std::vector<Eigen::Index> axis_anchors(Eigen::Index extent, Eigen::Index patch,
                                              Eigen::Index stride) {
  std::vector<Eigen::Index> anchors;
  for (Eigen::Index a = 0; a + patch <= extent; a += stride) anchors.push_back(a);
  if (anchors.back() != extent - patch) anchors.push_back(extent - patch);
  return anchors;
}

inline PatchGrid plan_grid(Eigen::Index height, Eigen::Index width, Eigen::Index patch_size,
                           Eigen::Index stride) {
  if (patch_size < 1) throw std::invalid_argument("plan_grid: patch_size must be >= 1");
  if (stride < 1 || stride > patch_size)
    throw std::invalid_argument("plan_grid: stride must be in [1, patch_size]");
  if (height < patch_size || width < patch_size)
    throw ImageSmallerThanPatch("plan_grid: image smaller than patch; reflect-pad first");
  PatchGrid grid{patch_size, stride, height, width, {}};
  const auto rows = axis_anchors(height, patch_size, stride);
  const auto cols = axis_anchors(width, patch_size, stride);
  grid.positions.reserve(rows.size() * cols.size());
  for (auto r : rows)
    for (auto c : cols) grid.positions.push_back({r, c});
  return grid;
}

/// Separable Hann taper, floored so that every weight is strictly positive.
struct WindowMap {
  Eigen::Index patch_size = 0;
  ImageD weights;
};

inline Eigen::VectorXd hann_profile(Eigen::Index n) {
  Eigen::VectorXd w(n);
  const double denom = static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < n; ++i)
    w(i) = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom));
  return w;
}

inline WindowMap hann_window(Eigen::Index patch_size, double floor_epsilon = 1e-3) {
  if (patch_size < 2) throw std::invalid_argument("hann_window: patch_size must be >= 2");
  if (!(floor_epsilon > 0.0 && floor_epsilon < 1.0))
    throw std::invalid_argument("hann_window: floor_epsilon must be in (0, 1)");
  const Eigen::VectorXd w = hann_profile(patch_size);
  ImageD weights = (w * w.transpose()).cwiseMax(floor_epsilon);
  return {patch_size, std::move(weights)};
}

template <typename Derived>
std::vector<Image<typename Derived::Scalar>> extract(const Eigen::MatrixBase<Derived>& img,
                                                     const PatchGrid& grid) {
  if (img.rows() != grid.image_height || img.cols() != grid.image_width)
    throw std::invalid_argument("extract: grid was planned for a different image size");
  std::vector<Image<typename Derived::Scalar>> patches;
  patches.reserve(grid.positions.size());
  for (const auto& p : grid.positions)
    patches.emplace_back(img.block(p.row, p.col, grid.patch_size, grid.patch_size));
  return patches;
}

/// Window-weighted average of overlapping patches. Accumulates in double and
/// casts the quotient back to the patch scalar type.
template <typename Scalar>
Image<Scalar> assemble(const std::vector<Image<Scalar>>& patches, const PatchGrid& grid,
                       const WindowMap& window) {
  if (grid.positions.empty()) throw std::invalid_argument("assemble: empty grid");
  if (patches.size() != grid.positions.size())
    throw std::invalid_argument("assemble: patch count does not match grid");
  if (window.patch_size != grid.patch_size)
    throw std::invalid_argument("assemble: window size does not match grid");
  ImageD value = ImageD::Zero(grid.image_height, grid.image_width);
  ImageD weight = ImageD::Zero(grid.image_height, grid.image_width);
  const Eigen::Index n = grid.patch_size;
  for (std::size_t k = 0; k < patches.size(); ++k) {
    if (patches[k].rows() != n || patches[k].cols() != n)
      throw std::invalid_argument("assemble: patch has wrong dimensions");
    const auto& pos = grid.positions[k];
    value.block(pos.row, pos.col, n, n).array() +=
        window.weights.array() * patches[k].template cast<double>().array();
    weight.block(pos.row, pos.col, n, n) += window.weights;
  }
  if (!(weight.minCoeff() > 0.0)) throw std::logic_error("assemble: uncovered pixel");
  return (value.array() / weight.array()).template cast<Scalar>();
}

}  // namespace vstain
