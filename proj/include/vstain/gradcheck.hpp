#pragma once

#include <algorithm>
#include <cmath>
#include <string_view>

#include "vstain/model.hpp"
#include "vstain/objective.hpp"
#include "vstain/random.hpp"

namespace vstain {

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every
/// coefficient of x. f takes the perturbed image by const reference.
template <typename F>
ImageD central_difference(F&& f, ImageD x, double step = 1e-6) {
  ImageD grad(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double saved = x.data()[i];
    x.data()[i] = saved + step;
    const double up = f(static_cast<const ImageD&>(x));
    x.data()[i] = saved - step;
    const double down = f(static_cast<const ImageD&>(x));
    x.data()[i] = saved;
    grad.data()[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

/// Worst per-coefficient |a - n| / max(|a|, |n|, floor), where floor is
/// relative_floor times the largest coefficient magnitude. Coefficients far
/// below the gradient's scale are compared on that scale instead, since
/// central differences cannot resolve them below roundoff.
template <typename A, typename B>
double max_relative_error(const Eigen::DenseBase<A>& analytic, const Eigen::DenseBase<B>& numeric,
                          double relative_floor = 1e-3) {
  double largest = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i)
    largest = std::max({largest, std::abs(double(analytic.derived().data()[i])),
                        std::abs(double(numeric.derived().data()[i]))});
  const double floor = relative_floor * largest;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double a = analytic.derived().data()[i];
    const double n = numeric.derived().data()[i];
    const double scale = std::max({std::abs(a), std::abs(n), floor});
    if (scale > 0.0) worst = std::max(worst, std::abs(a - n) / scale);
  }
  return worst;
}

enum class LossTerm { Mse, Ssim, Pcc, CosineDistance, Combined };

inline constexpr std::string_view to_string(LossTerm t) {
  switch (t) {
    case LossTerm::Mse: return "mse";
    case LossTerm::Ssim: return "ssim";
    case LossTerm::Pcc: return "pcc";
    case LossTerm::CosineDistance: return "cd";
    case LossTerm::Combined: return "combined";
  }
  return "?";
}

/// Value and analytic gradient of one loss term, in its loss orientation.
inline TermValue evaluate_term(LossTerm term, const ImageD& p, const ImageD& gt,
                               const ObjectiveWeights& weights, const SsimConfig& cfg) {
  switch (term) {
    case LossTerm::Mse: return mse(p, gt);
    case LossTerm::Ssim: return ssim(p, gt, cfg);
    case LossTerm::Pcc: return pcc(p, gt);
    case LossTerm::CosineDistance: return cosine_distance(p, gt);
    case LossTerm::Combined: {
      LossReport r = combined(p, gt, weights, cfg);
      return {r.combined, std::move(r.grad)};
    }
  }
  throw std::invalid_argument("unknown loss term");
}

/// Worst relative error between a term's analytic gradient and central
/// finite differences at p.
inline double grad_check(LossTerm term, const ImageD& p, const ImageD& gt, double step = 1e-6,
                         const ObjectiveWeights& weights = {}, const SsimConfig& cfg = {}) {
  const TermValue analytic = evaluate_term(term, p, gt, weights, cfg);
  const ImageD numeric = central_difference(
      [&](const ImageD& x) { return evaluate_term(term, x, gt, weights, cfg).value; }, p, step);
  return max_relative_error(analytic.grad, numeric);
}

/// Setup of the end-to-end check: a tiny double-precision model scored by
/// the combined objective against a random target.
struct ModelGradCheckOptions {
  ModelConfig model{1, 2, 0.01, Strategy::SeparatePerOrganelle, Organelle::Nucleus, 7};
  Organelle organelle = Organelle::Nucleus;
  int size = 8;
  std::uint64_t seed = 11;
  double step = 1e-6;
  ObjectiveWeights weights;
  SsimConfig ssim = SsimConfig::for_range(1.0, 5, 1.0);
};

/// Worst relative error between backward() and central differences of the
/// combined loss over every model parameter.
inline double model_grad_check(const ModelGradCheckOptions& opt = {}) {
  ModelParams<double> params = init_params<double>(opt.model);
  // Non-zero biases so their gradients are exercised away from the init point.
  Rng rng(mix_seed(opt.seed, 3));
  for (auto& t : params.tensors())
    if (t.shape.size() == 1)
      for (Eigen::Index i = 0; i < t.values.size(); ++i) t.values(i) = rng.uniform(-0.1, 0.1);
  ImageD input(opt.size, opt.size), target(opt.size, opt.size);
  for (Eigen::Index i = 0; i < input.size(); ++i) input.data()[i] = rng.uniform();
  for (Eigen::Index i = 0; i < target.size(); ++i) target.data()[i] = rng.uniform();

  auto loss_of = [&](const ModelParams<double>& p) {
    return combined(predict(p, opt.model, input, opt.organelle), target, opt.weights, opt.ssim)
        .combined;
  };
  auto fwd = forward(params, opt.model, input, opt.organelle);
  const LossReport loss = combined(fwd.prediction, target, opt.weights, opt.ssim);
  const ParamGrads<double> analytic = backward(params, opt.model, fwd.cache, loss.grad);

  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& values = params.tensors()[k].values;
    Eigen::VectorXd numeric(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      const double saved = values(i);
      values(i) = saved + opt.step;
      const double up = loss_of(params);
      values(i) = saved - opt.step;
      const double down = loss_of(params);
      values(i) = saved;
      numeric(i) = (up - down) / (2.0 * opt.step);
    }
    worst = std::max(worst, max_relative_error(analytic.tensors()[k].values, numeric));
  }
  return worst;
}

}  // namespace vstain
