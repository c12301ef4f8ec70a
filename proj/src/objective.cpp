#include "vstain/objective.hpp"

#include <algorithm>
#include <cmath>

namespace vstain {

namespace {

void require_same_shape(ImageRef p, ImageRef gt, const char* who) {
  if (p.rows() != gt.rows() || p.cols() != gt.cols())
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  if (p.size() == 0) throw std::invalid_argument(std::string(who) + ": empty image");
}

// Valid-mode separable correlation: (H, W) -> (H - K + 1, W - K + 1).
ImageD filter_valid(const ImageD& x, const Eigen::VectorXd& taps) {
  const Eigen::Index k = taps.size();
  const Eigen::Index oh = x.rows() - k + 1, ow = x.cols() - k + 1;
  ImageD horiz = ImageD::Zero(x.rows(), ow);
  for (Eigen::Index j = 0; j < k; ++j) horiz += taps(j) * x.middleCols(j, ow);
  ImageD out = ImageD::Zero(oh, ow);
  for (Eigen::Index i = 0; i < k; ++i) out += taps(i) * horiz.middleRows(i, oh);
  return out;
}

// Adjoint of filter_valid: (H - K + 1, W - K + 1) -> (H, W).
ImageD filter_valid_adjoint(const ImageD& g, const Eigen::VectorXd& taps, Eigen::Index h,
                            Eigen::Index w) {
  const Eigen::Index k = taps.size();
  const Eigen::Index oh = g.rows(), ow = g.cols();
  ImageD horiz = ImageD::Zero(h, ow);
  for (Eigen::Index i = 0; i < k; ++i) horiz.middleRows(i, oh) += taps(i) * g;
  ImageD out = ImageD::Zero(h, w);
  for (Eigen::Index j = 0; j < k; ++j) out.middleCols(j, ow) += taps(j) * horiz;
  return out;
}

}  // namespace

Eigen::VectorXd gaussian_taps(int window_size, double sigma) {
  Eigen::VectorXd taps(window_size);
  const double center = (window_size - 1) / 2.0;
  for (int i = 0; i < window_size; ++i) {
    const double d = i - center;
    taps(i) = std::exp(-(d * d) / (2.0 * sigma * sigma));
  }
  return taps / taps.sum();
}

namespace detail {

TermValue mse_impl(ImageRef p, ImageRef gt) {
  require_same_shape(p, gt, "mse");
  const double n = static_cast<double>(p.size());
  ImageD diff = p - gt;
  const double value = diff.squaredNorm() / n;
  return {value, (2.0 / n) * diff};
}

TermValue ssim_impl(ImageRef p, ImageRef gt, const SsimConfig& cfg, bool with_grad) {
  require_same_shape(p, gt, "ssim");
  cfg.validate();
  if (p.rows() < cfg.window_size || p.cols() < cfg.window_size)
    throw std::invalid_argument("ssim: image smaller than window");
  const Eigen::VectorXd taps = gaussian_taps(cfg.window_size, cfg.gaussian_sigma);
  const ImageD x = p, y = gt;
  const ImageD mx = filter_valid(x, taps);
  const ImageD my = filter_valid(y, taps);
  const ImageD exx = filter_valid(x.cwiseProduct(x), taps);
  const ImageD eyy = filter_valid(y.cwiseProduct(y), taps);
  const ImageD exy = filter_valid(x.cwiseProduct(y), taps);

  const auto mxa = mx.array(), mya = my.array();
  const Eigen::ArrayXXd sxx = exx.array() - mxa * mxa;
  const Eigen::ArrayXXd syy = eyy.array() - mya * mya;
  const Eigen::ArrayXXd sxy = exy.array() - mxa * mya;
  const Eigen::ArrayXXd a1 = 2.0 * mxa * mya + cfg.c1;
  const Eigen::ArrayXXd a2 = 2.0 * sxy + cfg.c2;
  const Eigen::ArrayXXd b1 = mxa * mxa + mya * mya + cfg.c1;
  const Eigen::ArrayXXd b2 = sxx + syy + cfg.c2;
  const Eigen::ArrayXXd denom = b1 * b2;
  const Eigen::ArrayXXd s = (a1 * a2) / denom;
  const double count = static_cast<double>(s.size());
  TermValue out{std::clamp(s.mean(), -1.0, 1.0), {}};
  if (!with_grad) return out;

  // Local partials w.r.t. the filtered moments (mean, E[x^2], E[xy]) of P.
  const ImageD d_mean = ((2.0 * mya * (a2 - a1)) / denom - 2.0 * mxa * s * (1.0 / b1 - 1.0 / b2)) / count;
  const ImageD d_exx = (-s / b2) / count;
  const ImageD d_exy = (2.0 * a1 / denom) / count;
  const Eigen::Index h = x.rows(), w = x.cols();
  out.grad = filter_valid_adjoint(d_mean, taps, h, w).array() +
             2.0 * x.array() * filter_valid_adjoint(d_exx, taps, h, w).array() +
             y.array() * filter_valid_adjoint(d_exy, taps, h, w).array();
  return out;
}

TermValue pcc_impl(ImageRef p, ImageRef gt, bool with_grad) {
  require_same_shape(p, gt, "pcc");
  if (p.size() < 2) throw std::invalid_argument("pcc: need at least 2 pixels");
  const Eigen::ArrayXXd dp = p.array() - p.mean();
  const Eigen::ArrayXXd dg = gt.array() - gt.mean();
  const double sxx = (dp * dp).sum();
  const double syy = (dg * dg).sum();
  const double sxy = (dp * dg).sum();
  TermValue out{0.0, {}};
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    if (with_grad) out.grad = ImageD::Zero(p.rows(), p.cols());
    return out;
  }
  const double norm = std::sqrt(sxx * syy);
  const double r = sxy / norm;
  out.value = std::clamp(r, -1.0, 1.0);
  if (with_grad) out.grad = dg / norm - (r / sxx) * dp;
  return out;
}

TermValue cosine_distance_impl(ImageRef p, ImageRef gt, bool with_grad) {
  require_same_shape(p, gt, "cosine_distance");
  const double np = p.norm();
  const double ng = gt.norm();
  TermValue out{1.0, {}};
  if (!(np > 0.0) || !(ng > 0.0)) {
    if (with_grad) out.grad = ImageD::Zero(p.rows(), p.cols());
    return out;
  }
  const double dot = p.cwiseProduct(gt).sum();
  const double cosine = dot / (np * ng);
  out.value = std::clamp(1.0 - cosine, 0.0, 2.0);
  if (with_grad) out.grad = -(gt / (np * ng) - (cosine / (np * np)) * p);
  return out;
}

LossReport combined_impl(ImageRef p, ImageRef gt, const ObjectiveWeights& w,
                         const SsimConfig& cfg) {
  w.validate();
  TermValue m = mse_impl(p, gt);
  TermValue s = ssim_impl(p, gt, cfg, w.beta != 0.0);
  TermValue r = pcc_impl(p, gt, w.lambda != 0.0);
  TermValue c = cosine_distance_impl(p, gt, w.omega != 0.0);
  LossReport report;
  report.mse = m.value;
  report.ssim = s.value;
  report.pcc = r.value;
  report.cd = c.value;
  report.combined = w.alpha * m.value + w.beta * (1.0 - s.value) + w.lambda * (1.0 - r.value) +
                    w.omega * c.value;
  report.grad = w.alpha * m.grad;
  if (w.beta != 0.0) report.grad -= w.beta * s.grad;
  if (w.lambda != 0.0) report.grad -= w.lambda * r.grad;
  if (w.omega != 0.0) report.grad += w.omega * c.grad;
  return report;
}

}  // namespace detail
}  // namespace vstain
