#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "vstain/image.hpp"

namespace vstain {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Named dense tensor with a flat row-major coefficient vector.
template <typename Scalar>
struct Tensor {
  std::string name;
  std::vector<int> shape;
  Vector<Scalar> values;

  std::int64_t numel() const {
    return std::accumulate(shape.begin(), shape.end(), std::int64_t{1},
                           [](std::int64_t a, int b) { return a * b; });
  }
};

/// Ordered collection of named tensors. Used for parameters, their
/// gradients, and optimizer moments alike.
template <typename Scalar>
class ParamSet {
 public:
  Tensor<Scalar>& add(std::string name, std::vector<int> shape) {
    if (index_.contains(name)) throw std::logic_error("duplicate tensor " + name);
    Tensor<Scalar> t{std::move(name), std::move(shape), {}};
    t.values = Vector<Scalar>::Zero(t.numel());
    index_.emplace(t.name, tensors_.size());
    tensors_.push_back(std::move(t));
    return tensors_.back();
  }

  const Tensor<Scalar>& at(const std::string& name) const { return tensors_.at(lookup(name)); }
  Tensor<Scalar>& at(const std::string& name) { return tensors_.at(lookup(name)); }
  bool contains(const std::string& name) const { return index_.contains(name); }

  const std::vector<Tensor<Scalar>>& tensors() const { return tensors_; }
  std::vector<Tensor<Scalar>>& tensors() { return tensors_; }
  std::size_t size() const { return tensors_.size(); }

  std::int64_t parameter_count() const {
    std::int64_t n = 0;
    for (const auto& t : tensors_) n += t.values.size();
    return n;
  }

  /// Same names and shapes, all coefficients zero.
  ParamSet zeros_like() const {
    ParamSet out;
    for (const auto& t : tensors_) out.add(t.name, t.shape);
    return out;
  }

  void set_zero() {
    for (auto& t : tensors_) t.values.setZero();
  }

  template <typename Other>
  ParamSet<Other> cast() const {
    ParamSet<Other> out;
    for (const auto& t : tensors_) out.add(t.name, t.shape).values = t.values.template cast<Other>();
    return out;
  }

  ParamSet& operator+=(const ParamSet& other) {
    check_compatible(other);
    for (std::size_t i = 0; i < tensors_.size(); ++i) tensors_[i].values += other.tensors_[i].values;
    return *this;
  }

  ParamSet& operator*=(Scalar s) {
    for (auto& t : tensors_) t.values *= s;
    return *this;
  }

  bool all_finite() const {
    for (const auto& t : tensors_)
      if (!t.values.allFinite()) return false;
    return true;
  }

  void check_compatible(const ParamSet& other) const {
    if (other.tensors_.size() != tensors_.size())
      throw std::invalid_argument("parameter sets differ in tensor count");
    for (std::size_t i = 0; i < tensors_.size(); ++i)
      if (other.tensors_[i].name != tensors_[i].name || other.tensors_[i].shape != tensors_[i].shape)
        throw std::invalid_argument("parameter sets differ at " + tensors_[i].name);
  }

  friend bool operator==(const ParamSet& a, const ParamSet& b) {
    if (a.tensors_.size() != b.tensors_.size()) return false;
    for (std::size_t i = 0; i < a.tensors_.size(); ++i) {
      const auto& x = a.tensors_[i];
      const auto& y = b.tensors_[i];
      if (x.name != y.name || x.shape != y.shape || x.values != y.values) return false;
    }
    return true;
  }

 private:
  std::size_t lookup(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("no tensor named " + name);
    return it->second;
  }

  std::vector<Tensor<Scalar>> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Stack of same-sized channels; data is channels x (height*width).
template <typename Scalar>
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  Matrix<Scalar> data;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w) : channels(c), height(h), width(w), data(c, Eigen::Index{h} * w) {}
  FeatureMap(int c, int h, int w, Matrix<Scalar> d)
      : channels(c), height(h), width(w), data(std::move(d)) {}

  Eigen::Index pixels() const { return Eigen::Index{height} * width; }
};

namespace ops {

/// Unfolds k x k neighbourhoods (reflect padding k/2) into columns:
/// (C*k*k) x (Ho*Wo), row index (c*k + ki)*k + kj.
template <typename Scalar>
Matrix<Scalar> im2col(const FeatureMap<Scalar>& x, int k, int stride) {
  const int pad = k / 2;
  const int ho = (x.height + 2 * pad - k) / stride + 1;
  const int wo = (x.width + 2 * pad - k) / stride + 1;
  Matrix<Scalar> cols(Eigen::Index{x.channels} * k * k, Eigen::Index{ho} * wo);
  std::vector<Eigen::Index> src_col(wo);
  std::vector<Eigen::Index> src_row(ho);
  for (int ki = 0; ki < k; ++ki) {
    for (int r = 0; r < ho; ++r) src_row[r] = reflect_index(r * stride + ki - pad, x.height);
    for (int kj = 0; kj < k; ++kj) {
      for (int j = 0; j < wo; ++j) src_col[j] = reflect_index(j * stride + kj - pad, x.width);
      for (int c = 0; c < x.channels; ++c) {
        Scalar* dst = cols.row((Eigen::Index{c} * k + ki) * k + kj).data();
        const Scalar* plane = x.data.row(c).data();
        for (int r = 0; r < ho; ++r) {
          const Scalar* src = plane + src_row[r] * x.width;
          Scalar* out = dst + Eigen::Index{r} * wo;
          for (int j = 0; j < wo; ++j) out[j] = src[src_col[j]];
        }
      }
    }
  }
  return cols;
}

/// Adjoint of im2col: scatters column gradients back onto the input grid.
template <typename Scalar>
FeatureMap<Scalar> col2im(const Matrix<Scalar>& cols, int channels, int height, int width, int k,
                          int stride) {
  const int pad = k / 2;
  const int ho = (height + 2 * pad - k) / stride + 1;
  const int wo = (width + 2 * pad - k) / stride + 1;
  FeatureMap<Scalar> out(channels, height, width);
  out.data.setZero();
  std::vector<Eigen::Index> src_col(wo);
  std::vector<Eigen::Index> src_row(ho);
  for (int ki = 0; ki < k; ++ki) {
    for (int r = 0; r < ho; ++r) src_row[r] = reflect_index(r * stride + ki - pad, height);
    for (int kj = 0; kj < k; ++kj) {
      for (int j = 0; j < wo; ++j) src_col[j] = reflect_index(j * stride + kj - pad, width);
      for (int c = 0; c < channels; ++c) {
        const Scalar* src = cols.row((Eigen::Index{c} * k + ki) * k + kj).data();
        Scalar* plane = out.data.row(c).data();
        for (int r = 0; r < ho; ++r) {
          Scalar* dst = plane + src_row[r] * width;
          const Scalar* in = src + Eigen::Index{r} * wo;
          for (int j = 0; j < wo; ++j) dst[src_col[j]] += in[j];
        }
      }
    }
  }
  return out;
}

template <typename Scalar>
FeatureMap<Scalar> upsample_nearest2(const FeatureMap<Scalar>& x) {
  FeatureMap<Scalar> out(x.channels, x.height * 2, x.width * 2);
  for (int c = 0; c < x.channels; ++c) {
    const Scalar* src = x.data.row(c).data();
    Scalar* dst = out.data.row(c).data();
    for (int r = 0; r < out.height; ++r)
      for (int j = 0; j < out.width; ++j)
        dst[Eigen::Index{r} * out.width + j] = src[Eigen::Index{r / 2} * x.width + j / 2];
  }
  return out;
}

/// Adjoint of upsample_nearest2: sums each 2x2 block.
template <typename Scalar>
Matrix<Scalar> upsample_nearest2_adjoint(const Matrix<Scalar>& grad, int channels, int height,
                                         int width) {
  Matrix<Scalar> out = Matrix<Scalar>::Zero(channels, Eigen::Index{height} * width);
  const int uw = width * 2;
  for (int c = 0; c < channels; ++c) {
    const Scalar* src = grad.row(c).data();
    Scalar* dst = out.row(c).data();
    for (int r = 0; r < height * 2; ++r)
      for (int j = 0; j < uw; ++j) dst[Eigen::Index{r / 2} * width + j / 2] += src[Eigen::Index{r} * uw + j];
  }
  return out;
}

}  // namespace ops
}  // namespace vstain
