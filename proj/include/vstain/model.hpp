#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vstain/image.hpp"
#include "vstain/random.hpp"
#include "vstain/tensor.hpp"

namespace vstain {

enum class Strategy { SeparatePerOrganelle, SharedEncoder };

inline constexpr std::string_view to_string(Strategy s) {
  return s == Strategy::SharedEncoder ? "shared" : "separate";
}

inline std::optional<Strategy> parse_strategy(std::string_view s) {
  if (s == "separate") return Strategy::SeparatePerOrganelle;
  if (s == "shared") return Strategy::SharedEncoder;
  return std::nullopt;
}

/// Architecture of the micro residual encoder-decoder.
///
/// Level l works at resolution H/2^l with base_channels*2^l channels. Each
/// level runs a residual block (h1 = act(conv3(x)), y = h1 + act(conv3(h1)));
/// levels are joined by a stride-2 3x3 conv on the way down and by nearest
/// x2 upsampling + 3x3 conv on the way up, concatenated with the encoder
/// output of the same level. A 1x1 conv + sigmoid produces the prediction.
/// All 3x3 convolutions use reflect padding; act is leaky ReLU.
struct ModelConfig {
  int levels = 3;
  int base_channels = 8;
  double leaky_slope = 0.01;
  Strategy strategy = Strategy::SeparatePerOrganelle;
  Organelle organelle = Organelle::Nucleus;  // decoder of a separate model
  std::uint64_t seed = 0;

  int channels(int level) const { return base_channels << level; }
  int size_divisor() const { return 1 << (levels - 1); }

  std::vector<Organelle> decoders() const {
    if (strategy == Strategy::SharedEncoder) return {kOrganelles.begin(), kOrganelles.end()};
    return {organelle};
  }

  bool has_decoder(Organelle o) const {
    return strategy == Strategy::SharedEncoder || o == organelle;
  }

  void validate() const {
    if (levels < 1 || levels > 8) throw std::invalid_argument("levels must be in [1, 8]");
    if (base_channels < 1 || base_channels > 256)
      throw std::invalid_argument("base_channels must be in [1, 256]");
    if (!(leaky_slope >= 0.0 && leaky_slope < 1.0))
      throw std::invalid_argument("leaky_slope must be in [0, 1)");
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ConvSpec {
  std::string name;
  int in_channels;
  int out_channels;
  int kernel;
  int stride;

  std::int64_t parameter_count() const {
    return std::int64_t{out_channels} * in_channels * kernel * kernel + out_channels;
  }
};

inline std::string decoder_prefix(Organelle o) { return "dec." + std::string(to_string(o)) + "."; }

/// Every convolution of the model in initialization order: encoder levels
/// ascending, then one decoder group per organelle in enum order.
inline std::vector<ConvSpec> layer_list(const ModelConfig& cfg) {
  cfg.validate();
  std::vector<ConvSpec> layers;
  for (int l = 0; l < cfg.levels; ++l) {
    const std::string p = "enc." + std::to_string(l) + ".";
    const int c = cfg.channels(l);
    int in = 1;
    if (l > 0) {
      layers.push_back({p + "down", cfg.channels(l - 1), c, 3, 2});
      in = c;
    }
    layers.push_back({p + "conv_a", in, c, 3, 1});
    layers.push_back({p + "conv_b", c, c, 3, 1});
  }
  for (Organelle o : cfg.decoders()) {
    const std::string d = decoder_prefix(o);
    for (int l = cfg.levels - 2; l >= 0; --l) {
      const std::string p = d + std::to_string(l) + ".";
      const int c = cfg.channels(l);
      layers.push_back({p + "up", cfg.channels(l + 1), c, 3, 1});
      layers.push_back({p + "conv_a", 2 * c, c, 3, 1});
      layers.push_back({p + "conv_b", c, c, 3, 1});
    }
    layers.push_back({d + "head", cfg.channels(0), 1, 1, 1});
  }
  return layers;
}

template <typename Scalar>
using ModelParams = ParamSet<Scalar>;
template <typename Scalar>
using ParamGrads = ParamSet<Scalar>;

/// He-uniform weights (bound sqrt(6 / fan_in)), zero biases, drawn from a
/// single stream seeded with cfg.seed in layer_list order.
template <typename Scalar>
ModelParams<Scalar> init_params(const ModelConfig& cfg) {
  ModelParams<Scalar> params;
  Rng rng(cfg.seed);
  for (const ConvSpec& layer : layer_list(cfg)) {
    auto& w = params.add(layer.name + ".weight",
                         {layer.out_channels, layer.in_channels, layer.kernel, layer.kernel});
    const double bound = std::sqrt(6.0 / (layer.in_channels * layer.kernel * layer.kernel));
    for (Eigen::Index i = 0; i < w.values.size(); ++i)
      w.values(i) = static_cast<Scalar>(rng.uniform(-bound, bound));
    params.add(layer.name + ".bias", {layer.out_channels});
  }
  return params;
}

/// Throws unless params has exactly the tensors layer_list(cfg) implies.
template <typename Scalar>
void check_params_match(const ModelParams<Scalar>& params, const ModelConfig& cfg) {
  const auto layers = layer_list(cfg);
  if (params.size() != 2 * layers.size())
    throw std::invalid_argument("parameter set does not match model config");
  for (const auto& l : layers) {
    const std::string w = l.name + ".weight", b = l.name + ".bias";
    if (!params.contains(w) || !params.contains(b) ||
        params.at(w).shape != std::vector<int>{l.out_channels, l.in_channels, l.kernel, l.kernel} ||
        params.at(b).shape != std::vector<int>{l.out_channels})
      throw std::invalid_argument("parameter tensor shape mismatch at " + l.name);
  }
}

class CacheReuseError : public std::logic_error {
 public:
  CacheReuseError() : std::logic_error("forward cache already consumed by backward") {}
};

/// Activations retained by forward for the matching backward.
template <typename Scalar>
struct ForwardCache {
  struct Conv {
    std::string name;
    FeatureMap<Scalar> input;
    Matrix<Scalar> pre;  // pre-activation
  };
  struct Block {
    std::optional<Conv> entry;  // encoder "down" or decoder "up"
    Conv a, b;
  };

  Organelle organelle = Organelle::Nucleus;
  std::vector<Block> encoder;  // by level
  std::vector<Block> decoder;  // by level, levels-1 entries
  Conv head;
  Matrix<Scalar> output;  // 1 x (H*W), after sigmoid
  bool consumed = false;
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> leaky(const Matrix<Scalar>& pre, Scalar slope) {
  return pre.unaryExpr([slope](Scalar v) { return v > Scalar(0) ? v : slope * v; });
}

template <typename Scalar>
Matrix<Scalar> leaky_backward(const Matrix<Scalar>& grad, const Matrix<Scalar>& pre, Scalar slope) {
  return grad.binaryExpr(pre, [slope](Scalar g, Scalar v) { return v > Scalar(0) ? g : slope * g; });
}

template <typename Scalar>
auto weight_matrix(const ModelParams<Scalar>& params, const std::string& name) {
  const auto& t = params.at(name + ".weight");
  return Eigen::Map<const Matrix<Scalar>>(t.values.data(), t.shape[0],
                                          Eigen::Index{t.shape[1]} * t.shape[2] * t.shape[3]);
}

template <typename Scalar>
Matrix<Scalar> conv_forward(const ModelParams<Scalar>& params, const std::string& name,
                            const FeatureMap<Scalar>& x, int k, int stride, int& out_h,
                            int& out_w) {
  const auto w = weight_matrix(params, name);
  const auto& b = params.at(name + ".bias").values;
  const int pad = k / 2;
  out_h = (x.height + 2 * pad - k) / stride + 1;
  out_w = (x.width + 2 * pad - k) / stride + 1;
  Matrix<Scalar> pre = (k == 1 && stride == 1) ? Matrix<Scalar>(w * x.data)
                                               : Matrix<Scalar>(w * ops::im2col(x, k, stride));
  pre.colwise() += b;
  return pre;
}

/// Accumulates weight/bias gradients; returns d(input) when requested.
template <typename Scalar>
std::optional<Matrix<Scalar>> conv_backward(const ModelParams<Scalar>& params,
                                            ParamGrads<Scalar>& grads, const std::string& name,
                                            const FeatureMap<Scalar>& x, int k, int stride,
                                            const Matrix<Scalar>& d_pre, bool need_input_grad) {
  const auto w = weight_matrix(params, name);
  auto& gw = grads.at(name + ".weight");
  auto& gb = grads.at(name + ".bias");
  Eigen::Map<Matrix<Scalar>> gw_mat(gw.values.data(), w.rows(), w.cols());
  gb.values += d_pre.rowwise().sum();
  if (k == 1 && stride == 1) {
    gw_mat.noalias() += d_pre * x.data.transpose();
    if (!need_input_grad) return std::nullopt;
    return Matrix<Scalar>(w.transpose() * d_pre);
  }
  const Matrix<Scalar> cols = ops::im2col(x, k, stride);
  gw_mat.noalias() += d_pre * cols.transpose();
  if (!need_input_grad) return std::nullopt;
  const Matrix<Scalar> d_cols = w.transpose() * d_pre;
  return ops::col2im(d_cols, x.channels, x.height, x.width, k, stride).data;
}

template <typename Scalar>
FeatureMap<Scalar> run_conv(const ModelParams<Scalar>& params, const std::string& name,
                            FeatureMap<Scalar> x, int k, int stride, Scalar slope,
                            typename ForwardCache<Scalar>::Conv* cache, bool activate = true) {
  int h = 0, w = 0;
  Matrix<Scalar> pre = conv_forward(params, name, x, k, stride, h, w);
  const auto channels = static_cast<int>(pre.rows());
  Matrix<Scalar> out = activate ? leaky(pre, slope) : pre;
  if (cache) *cache = {name, std::move(x), std::move(pre)};
  return {channels, h, w, std::move(out)};
}

template <typename Scalar>
FeatureMap<Scalar> run_block(const ModelParams<Scalar>& params, const std::string& prefix,
                             FeatureMap<Scalar> x, Scalar slope,
                             typename ForwardCache<Scalar>::Block* cache) {
  FeatureMap<Scalar> h1 =
      run_conv(params, prefix + "conv_a", std::move(x), 3, 1, slope, cache ? &cache->a : nullptr);
  FeatureMap<Scalar> h2 =
      run_conv(params, prefix + "conv_b", h1, 3, 1, slope, cache ? &cache->b : nullptr);
  h2.data += h1.data;
  return h2;
}

// d(block output) -> d(block input); accumulates parameter gradients.
template <typename Scalar>
std::optional<Matrix<Scalar>> block_backward(const ModelParams<Scalar>& params,
                                             ParamGrads<Scalar>& grads,
                                             const typename ForwardCache<Scalar>::Block& cache,
                                             const Matrix<Scalar>& d_out, Scalar slope,
                                             bool need_input_grad) {
  const Matrix<Scalar> d_pre_b = leaky_backward(d_out, cache.b.pre, slope);
  Matrix<Scalar> d_h1 = *conv_backward(params, grads, cache.b.name, cache.b.input, 3, 1, d_pre_b, true);
  d_h1 += d_out;
  const Matrix<Scalar> d_pre_a = leaky_backward(d_h1, cache.a.pre, slope);
  return conv_backward(params, grads, cache.a.name, cache.a.input, 3, 1, d_pre_a, need_input_grad);
}

template <typename Scalar>
Matrix<Scalar> forward_impl(const ModelParams<Scalar>& params, const ModelConfig& cfg,
                            const Image<Scalar>& input, Organelle organelle,
                            ForwardCache<Scalar>* cache) {
  if (!cfg.has_decoder(organelle))
    throw std::invalid_argument("model has no decoder for " + std::string(to_string(organelle)));
  const int div = cfg.size_divisor();
  if (input.rows() < 1 || input.cols() < 1 || input.rows() % div != 0 || input.cols() % div != 0)
    throw std::invalid_argument("input size must be a positive multiple of " + std::to_string(div));
  const auto slope = static_cast<Scalar>(cfg.leaky_slope);
  const int L = cfg.levels;
  if (cache) {
    cache->organelle = organelle;
    cache->encoder.assign(L, {});
    cache->decoder.assign(std::max(L - 1, 0), {});
    cache->consumed = false;
  }

  FeatureMap<Scalar> x(1, static_cast<int>(input.rows()), static_cast<int>(input.cols()),
                       Eigen::Map<const Matrix<Scalar>>(input.data(), 1, input.size()));
  std::vector<FeatureMap<Scalar>> skips(L);
  for (int l = 0; l < L; ++l) {
    const std::string p = "enc." + std::to_string(l) + ".";
    auto* block = cache ? &cache->encoder[l] : nullptr;
    if (l > 0) {
      if (block) block->entry.emplace();
      x = run_conv(params, p + "down", std::move(x), 3, 2, slope, block ? &*block->entry : nullptr);
    }
    x = run_block(params, p, std::move(x), slope, block);
    if (l < L - 1) skips[l] = x;
  }

  const std::string d = decoder_prefix(organelle);
  for (int l = L - 2; l >= 0; --l) {
    const std::string p = d + std::to_string(l) + ".";
    auto* block = cache ? &cache->decoder[l] : nullptr;
    if (block) block->entry.emplace();
    FeatureMap<Scalar> up = run_conv(params, p + "up", ops::upsample_nearest2(x), 3, 1, slope,
                                     block ? &*block->entry : nullptr);
    FeatureMap<Scalar> cat(up.channels + skips[l].channels, up.height, up.width);
    cat.data << up.data, skips[l].data;
    x = run_block(params, p, std::move(cat), slope, block);
  }

  FeatureMap<Scalar> logits =
      run_conv(params, d + "head", std::move(x), 1, 1, slope, cache ? &cache->head : nullptr, false);
  // Sigmoid, kept strictly inside (0, 1).
  const Scalar lo = std::numeric_limits<Scalar>::min();
  const Scalar hi = Scalar(1) - std::numeric_limits<Scalar>::epsilon() / 2;
  Matrix<Scalar> out = logits.data.unaryExpr([lo, hi](Scalar v) {
    const Scalar s = Scalar(1) / (Scalar(1) + std::exp(-v));
    return std::clamp(s, lo, hi);
  });
  if (cache) cache->output = out;
  return out;
}

}  // namespace detail

template <typename Scalar>
struct ForwardResult {
  Image<Scalar> prediction;
  ForwardCache<Scalar> cache;
};

/// Prediction for one organelle plus the activations backward needs.
template <typename Scalar>
ForwardResult<Scalar> forward(const ModelParams<Scalar>& params, const ModelConfig& cfg,
                              const Image<Scalar>& input, Organelle organelle) {
  ForwardResult<Scalar> result;
  const Matrix<Scalar> out = detail::forward_impl(params, cfg, input, organelle, &result.cache);
  result.prediction = Eigen::Map<const Image<Scalar>>(out.data(), input.rows(), input.cols());
  return result;
}

/// Inference-only forward; keeps no activations.
template <typename Scalar>
Image<Scalar> predict(const ModelParams<Scalar>& params, const ModelConfig& cfg,
                      const Image<Scalar>& input, Organelle organelle) {
  const Matrix<Scalar> out = detail::forward_impl<Scalar>(params, cfg, input, organelle, nullptr);
  return Eigen::Map<const Image<Scalar>>(out.data(), input.rows(), input.cols());
}

/// Adds d(sum(grad_out * prediction))/d(params) into grads and marks the
/// cache consumed. Tensors the forward pass did not touch are left as is.
template <typename Scalar>
void accumulate_backward(const ModelParams<Scalar>& params, const ModelConfig& cfg,
                         ForwardCache<Scalar>& cache, const Image<Scalar>& grad_out,
                         ParamGrads<Scalar>& grads) {
  if (cache.consumed) throw CacheReuseError();
  if (grad_out.size() != cache.output.size())
    throw std::invalid_argument("backward: grad_out size does not match forward output");
  cache.consumed = true;
  const auto slope = static_cast<Scalar>(cfg.leaky_slope);
  const int L = cfg.levels;

  const Eigen::Map<const Matrix<Scalar>> g(grad_out.data(), 1, grad_out.size());
  const Matrix<Scalar> d_logits =
      g.cwiseProduct(cache.output.cwiseProduct((Scalar(1) - cache.output.array()).matrix()));
  Matrix<Scalar> d_x = *detail::conv_backward(params, grads, cache.head.name, cache.head.input, 1,
                                              1, d_logits, true);

  std::vector<Matrix<Scalar>> d_skip(L);
  for (int l = 0; l < L - 1; ++l) {
    const auto& block = cache.decoder[l];
    Matrix<Scalar> d_cat = *detail::block_backward(params, grads, block, d_x, slope, true);
    const auto c = block.entry->pre.rows();
    d_skip[l] = d_cat.bottomRows(d_cat.rows() - c);
    const Matrix<Scalar> d_pre_up = detail::leaky_backward(Matrix<Scalar>(d_cat.topRows(c)),
                                                           block.entry->pre, slope);
    const auto& up_in = block.entry->input;
    const Matrix<Scalar> d_up = *detail::conv_backward(params, grads, block.entry->name, up_in, 3,
                                                       1, d_pre_up, true);
    d_x = ops::upsample_nearest2_adjoint(d_up, up_in.channels, up_in.height / 2, up_in.width / 2);
  }

  for (int l = L - 1; l >= 0; --l) {
    if (l < L - 1) d_x += d_skip[l];
    const auto& block = cache.encoder[l];
    const bool need_input = l > 0;
    auto d_in = detail::block_backward(params, grads, block, d_x, slope, need_input);
    if (!need_input) break;
    const Matrix<Scalar> d_pre_down = detail::leaky_backward(*d_in, block.entry->pre, slope);
    d_x = *detail::conv_backward(params, grads, block.entry->name, block.entry->input, 3, 2,
                                 d_pre_down, true);
  }
}

template <typename Scalar>
ParamGrads<Scalar> backward(const ModelParams<Scalar>& params, const ModelConfig& cfg,
                            ForwardCache<Scalar>& cache, const Image<Scalar>& grad_out) {
  ParamGrads<Scalar> grads = params.zeros_like();
  accumulate_backward(params, cfg, cache, grad_out, grads);
  return grads;
}

}  // namespace vstain
