#pragma once

#include <cmath>
#include <cstdint>

#include "vstain/tensor.hpp"

namespace vstain {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename Scalar>
struct AdamState {
  ParamSet<Scalar> m;
  ParamSet<Scalar> v;
  std::int64_t t = 0;  // completed steps

  static AdamState for_params(const ParamSet<Scalar>& params) {
    return {params.zeros_like(), params.zeros_like(), 0};
  }
};

/// One bias-corrected Adam update; advances state.t. Moments and the update
/// are evaluated in double and stored back in Scalar.
template <typename Scalar>
void adam_step(ParamSet<Scalar>& params, const ParamSet<Scalar>& grads, AdamState<Scalar>& state,
               const AdamConfig& cfg = {}) {
  params.check_compatible(grads);
  params.check_compatible(state.m);
  params.check_compatible(state.v);
  const std::int64_t t = ++state.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  auto& ps = params.tensors();
  auto& ms = state.m.tensors();
  auto& vs = state.v.tensors();
  const auto& gs = grads.tensors();
  for (std::size_t k = 0; k < ps.size(); ++k) {
    auto& p = ps[k].values;
    auto& m = ms[k].values;
    auto& v = vs[k].values;
    const auto& g = gs[k].values;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double gi = g(i);
      const double mi = cfg.beta1 * m(i) + (1.0 - cfg.beta1) * gi;
      const double vi = cfg.beta2 * v(i) + (1.0 - cfg.beta2) * gi * gi;
      m(i) = static_cast<Scalar>(mi);
      v(i) = static_cast<Scalar>(vi);
      const double update = cfg.lr * (mi / c1) / (std::sqrt(vi / c2) + cfg.eps);
      p(i) = static_cast<Scalar>(p(i) - update);
    }
  }
}

}  // namespace vstain
