#pragma once

#include <cmath>
#include <stdexcept>

#include "vstain/image.hpp"

namespace vstain {

/// Coefficients of the combined loss
///   alpha*MSE + beta*(1 - SSIM) + lambda*(1 - PCC) + omega*CD.
struct ObjectiveWeights {
  double alpha = 1.0;
  double beta = 0.2;
  double lambda = 0.1;
  double omega = 0.1;

  void validate() const {
    for (double w : {alpha, beta, lambda, omega})
      if (!std::isfinite(w) || w < 0.0)
        throw std::invalid_argument("objective weights must be finite and >= 0");
  }
  friend bool operator==(const ObjectiveWeights&, const ObjectiveWeights&) = default;
};

/// Local-statistics SSIM with a Gaussian window evaluated at every valid
/// window center (no padding).
struct SsimConfig {
  int window_size = 11;
  double gaussian_sigma = 1.5;
  double c1 = 1e-4;  // (0.01 * data_range)^2
  double c2 = 9e-4;  // (0.03 * data_range)^2
  double data_range = 1.0;

  static SsimConfig for_range(double data_range, int window_size = 11, double sigma = 1.5) {
    return {window_size, sigma, (0.01 * data_range) * (0.01 * data_range),
            (0.03 * data_range) * (0.03 * data_range), data_range};
  }

  void validate() const {
    if (window_size < 3 || window_size % 2 == 0)
      throw std::invalid_argument("SSIM window_size must be odd and >= 3");
    if (!(gaussian_sigma > 0.0)) throw std::invalid_argument("SSIM sigma must be > 0");
    if (!(c1 > 0.0) || !(c2 > 0.0)) throw std::invalid_argument("SSIM c1, c2 must be > 0");
  }
};

/// A loss term's value and its gradient with respect to the prediction.
struct TermValue {
  double value = 0.0;
  ImageD grad;
};

struct LossReport {
  double mse = 0.0;
  double ssim = 0.0;
  double pcc = 0.0;
  double cd = 0.0;
  double combined = 0.0;
  ImageD grad;  // d(combined)/dP
};

using ImageRef = Eigen::Ref<const ImageD>;

// Double-precision cores. All check dimensions and throw std::invalid_argument.
namespace detail {
TermValue mse_impl(ImageRef p, ImageRef gt);
TermValue ssim_impl(ImageRef p, ImageRef gt, const SsimConfig& cfg, bool with_grad);
TermValue pcc_impl(ImageRef p, ImageRef gt, bool with_grad);
TermValue cosine_distance_impl(ImageRef p, ImageRef gt, bool with_grad);
LossReport combined_impl(ImageRef p, ImageRef gt, const ObjectiveWeights& w,
                         const SsimConfig& cfg);
}  // namespace detail

template <typename A, typename B>
TermValue mse(const Eigen::MatrixBase<A>& p, const Eigen::MatrixBase<B>& gt) {
  return detail::mse_impl(p.template cast<double>(), gt.template cast<double>());
}

template <typename A, typename B>
TermValue ssim(const Eigen::MatrixBase<A>& p, const Eigen::MatrixBase<B>& gt,
               const SsimConfig& cfg = {}) {
  return detail::ssim_impl(p.template cast<double>(), gt.template cast<double>(), cfg, true);
}

template <typename A, typename B>
TermValue pcc(const Eigen::MatrixBase<A>& p, const Eigen::MatrixBase<B>& gt) {
  return detail::pcc_impl(p.template cast<double>(), gt.template cast<double>(), true);
}

template <typename A, typename B>
TermValue cosine_distance(const Eigen::MatrixBase<A>& p, const Eigen::MatrixBase<B>& gt) {
  return detail::cosine_distance_impl(p.template cast<double>(), gt.template cast<double>(), true);
}

/// Value-only variants (no gradient image is allocated).
template <typename A, typename B>
double ssim_value(const Eigen::MatrixBase<A>& p, const Eigen::MatrixBase<B>& gt,
                  const SsimConfig& cfg = {}) {
  return detail::ssim_impl(p.template cast<double>(), gt.template cast<double>(), cfg, false)
      .value;
}

template <typename A, typename B>
double pcc_value(const Eigen::MatrixBase<A>& p, const Eigen::MatrixBase<B>& gt) {
  return detail::pcc_impl(p.template cast<double>(), gt.template cast<double>(), false).value;
}

template <typename A, typename B>
double cosine_distance_value(const Eigen::MatrixBase<A>& p, const Eigen::MatrixBase<B>& gt) {
  return detail::cosine_distance_impl(p.template cast<double>(), gt.template cast<double>(), false)
      .value;
}

template <typename A, typename B>
LossReport combined(const Eigen::MatrixBase<A>& p, const Eigen::MatrixBase<B>& gt,
                    const ObjectiveWeights& w = {}, const SsimConfig& cfg = {}) {
  return detail::combined_impl(p.template cast<double>(), gt.template cast<double>(), w, cfg);
}

/// Normalized 1-D Gaussian taps of length window_size.
Eigen::VectorXd gaussian_taps(int window_size, double sigma);

}  // namespace vstain
