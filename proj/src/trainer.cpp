#include "vstain/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "vstain/adam.hpp"
#include "vstain/image_io.hpp"
#include "vstain/parallel.hpp"
#include "vstain/patcher.hpp"

namespace vstain {

void TrainConfig::validate() const {
  if (!allow_any_patch_size && patch_size != 128 && patch_size != 256 && patch_size != 512)
    throw std::invalid_argument("patch_size must be 128, 256 or 512");
  if (patch_size < 2) throw std::invalid_argument("patch_size must be >= 2");
  if (stride < 0 || stride > patch_size) throw std::invalid_argument("stride must be in [1, patch_size]");
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("lr must be > 0");
  if (val_every < 1) throw std::invalid_argument("val_every must be >= 1");
  if (val_images < 0) throw std::invalid_argument("val_images must be >= 0");
  if (resample_size < 0) throw std::invalid_argument("resample_size must be >= 0");
  if (elastic_grid < 4) throw std::invalid_argument("elastic grid spacing must be >= 4");
  if (!(elastic_magnitude >= 0.0)) throw std::invalid_argument("elastic magnitude must be >= 0");
  weights.validate();
  ssim.validate();
}

const ImageF& ImageCache::get(const std::filesystem::path& path) {
  auto it = images_.find(path);
  if (it == images_.end()) it = images_.emplace(path, normalize_min_max(read_image(path))).first;
  return it->second;
}

std::vector<Organelle> wanted_organelles(const SampleRecord& record, const TrainConfig& cfg) {
  std::vector<Organelle> out;
  if (cfg.strategy == Strategy::SeparatePerOrganelle) {
    if (record.has(cfg.organelle)) out.push_back(cfg.organelle);
    return out;
  }
  for (auto o : kOrganelles)
    if (record.has(o)) out.push_back(o);
  return out;
}

namespace {

bool elastic_applies(const TrainConfig& cfg, std::span<const Organelle> wanted) {
  if (!cfg.augment_elastic || wanted.empty()) return false;
  for (auto o : wanted)
    if (!cfg.elastic_organelles[index_of(o)]) return false;
  return true;
}

template <typename Fn>
void for_each_image(TrainingExample& ex, Fn&& fn) {
  ex.input = fn(ex.input);
  for (auto& t : ex.targets)
    if (t) *t = fn(*t);
}

}  // namespace

TrainingExample make_training_example(const SampleRecord& record, const TrainConfig& cfg,
                                      std::span<const Organelle> wanted, Rng& rng,
                                      ImageCache* cache) {
  ImageCache local;
  ImageCache& images = cache ? *cache : local;
  TrainingExample ex;
  ex.input = images.get(record.input_path);
  for (auto o : wanted) {
    ImageF t = images.get(record.target(o));
    if (t.rows() != ex.input.rows() || t.cols() != ex.input.cols())
      throw std::runtime_error("target " + record.target(o).string() + " does not match input size");
    ex.targets[index_of(o)] = std::move(t);
  }

  if (cfg.resample_size > 0) {
    const int s = cfg.resample_size;
    for_each_image(ex, [s](const ImageF& img) { return resize_bilinear(img, s, s); });
  } else {
    const Eigen::Index p = cfg.patch_size;
    const Eigen::Index h = std::max(ex.input.rows(), p), w = std::max(ex.input.cols(), p);
    if (h != ex.input.rows() || w != ex.input.cols())
      for_each_image(ex, [h, w](const ImageF& img) { return reflect_pad(img, h, w); });
    const auto r = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(h - p + 1)));
    const auto c = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(w - p + 1)));
    for_each_image(ex, [=](const ImageF& img) { return ImageF(img.block(r, c, p, p)); });
  }

  if (cfg.augment_flips) {
    if (rng.bernoulli(0.5))
      for_each_image(ex, [](const ImageF& img) { return flip(img, FlipAxis::Horizontal); });
    if (rng.bernoulli(0.5))
      for_each_image(ex, [](const ImageF& img) { return flip(img, FlipAxis::Vertical); });
  }
  if (elastic_applies(cfg, wanted)) {
    const std::uint64_t seed = rng.next();
    for_each_image(ex, [&](const ImageF& img) {
      return elastic_transform(img, seed, cfg.elastic_grid, cfg.elastic_magnitude);
    });
  }
  return ex;
}

std::string history_csv(std::span<const HistoryRow> rows) {
  std::string out = "step,mse,ssim_term,pcc_term,cd_term,combined,val_ssim,val_pcc\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    out += std::to_string(r.step) + ',' + num(r.mse) + ',' + num(r.ssim_term) + ',' +
           num(r.pcc_term) + ',' + num(r.cd_term) + ',' + num(r.combined) + ',' +
           (r.val_ssim ? num(*r.val_ssim) : "") + ',' + (r.val_pcc ? num(*r.val_pcc) : "") + '\n';
  }
  return out;
}

StepResult compute_step(const ModelParams<float>& params, const ModelConfig& model_cfg,
                        const TrainingExample& example, const TrainConfig& cfg) {
  StepResult result{{}, params.zeros_like()};
  for (Organelle o : example.mask()) {
    auto fwd = forward(params, model_cfg, example.input, o);
    const LossReport loss = combined(fwd.prediction, *example.targets[index_of(o)], cfg.weights, cfg.ssim);
    const ImageF grad = loss.grad.cast<float>();
    accumulate_backward(params, model_cfg, fwd.cache, grad, result.grads);
    result.losses.mse += loss.mse;
    result.losses.ssim_term += 1.0 - loss.ssim;
    result.losses.pcc_term += 1.0 - loss.pcc;
    result.losses.cd_term += loss.cd;
    result.losses.combined += loss.combined;
  }
  return result;
}

TrainResult train(const DatasetIndex& index, ModelConfig model_cfg, const TrainConfig& cfg) {
  cfg.validate();
  model_cfg.strategy = cfg.strategy;
  model_cfg.organelle = cfg.organelle;
  model_cfg.validate();
  if (cfg.input_size() % model_cfg.size_divisor() != 0)
    throw std::invalid_argument("patch size must be divisible by " +
                                std::to_string(model_cfg.size_divisor()));

  TrainResult result;
  result.checkpoint.config = model_cfg;
  ModelParams<float>& params = result.checkpoint.params;
  params = init_params<float>(model_cfg);
  AdamState<float> adam = AdamState<float>::for_params(params);
  const AdamConfig adam_cfg{cfg.lr};

  const std::optional<Organelle> require =
      cfg.strategy == Strategy::SeparatePerOrganelle ? std::optional(cfg.organelle) : std::nullopt;
  const StudySampler sampler(index, Split::Train, require);
  Rng rng(mix_seed(cfg.seed, 1));
  ImageCache cache;
  const bool has_validation = !index.indices(Split::Validation).empty() && cfg.val_images > 0;

  for (int step = 1; step <= cfg.steps; ++step) {
    std::vector<TrainingExample> batch;
    batch.reserve(cfg.batch_size);
    for (int b = 0; b < cfg.batch_size; ++b) {
      const SampleRecord& rec = index.records[sampler.sample(rng)];
      const auto wanted = wanted_organelles(rec, cfg);
      batch.push_back(make_training_example(rec, cfg, wanted, rng, &cache));
    }
    std::vector<std::optional<StepResult>> partial(batch.size());
    parallel_for(batch.size(), [&](std::size_t i) {
      partial[i] = compute_step(params, model_cfg, batch[i], cfg);
    });

    // Reduce in batch order so the thread count cannot change the sums.
    ParamGrads<float> grads = std::move(partial[0]->grads);
    HistoryRow row = partial[0]->losses;
    for (std::size_t i = 1; i < partial.size(); ++i) {
      grads += partial[i]->grads;
      row.mse += partial[i]->losses.mse;
      row.ssim_term += partial[i]->losses.ssim_term;
      row.pcc_term += partial[i]->losses.pcc_term;
      row.cd_term += partial[i]->losses.cd_term;
      row.combined += partial[i]->losses.combined;
    }
    const double inv = 1.0 / cfg.batch_size;
    if (cfg.batch_size > 1) grads *= static_cast<float>(inv);
    row.step = step;
    row.mse *= inv;
    row.ssim_term *= inv;
    row.pcc_term *= inv;
    row.cd_term *= inv;
    row.combined *= inv;
    if (!std::isfinite(row.combined) || !grads.all_finite())
      throw DivergenceError("non-finite loss at step " + std::to_string(step));

    adam_step(params, grads, adam, adam_cfg);
    if (!params.all_finite()) throw DivergenceError("non-finite parameters at step " + std::to_string(step));

    if (has_validation && (step % cfg.val_every == 0 || step == cfg.steps)) {
      const auto [s, p] = validate_model(result.checkpoint, index, cfg, cache);
      if (std::isfinite(s)) row.val_ssim = s;
      if (std::isfinite(p)) row.val_pcc = p;
    }
    result.history.push_back(row);
  }
  return result;
}

ImageF predict_image(const Checkpoint& ckpt, const ImageF& img, Organelle organelle, int patch_size,
                     int stride) {
  if (img.size() == 0) throw std::invalid_argument("predict_image: empty image");
  if (patch_size % ckpt.config.size_divisor() != 0)
    throw std::invalid_argument("patch size must be divisible by " +
                                std::to_string(ckpt.config.size_divisor()));
  const ImageF normalized = normalize_min_max(img);
  const Eigen::Index h = std::max<Eigen::Index>(img.rows(), patch_size);
  const Eigen::Index w = std::max<Eigen::Index>(img.cols(), patch_size);
  const ImageF padded = (h == img.rows() && w == img.cols()) ? normalized : reflect_pad(normalized, h, w);
  const PatchGrid grid = plan_grid(h, w, patch_size, stride);
  const auto patches = extract(padded, grid);
  std::vector<ImageF> predictions(patches.size());
  parallel_for(patches.size(), [&](std::size_t k) {
    predictions[k] = predict(ckpt.params, ckpt.config, patches[k], organelle);
  });
  const ImageF out = assemble(predictions, grid, hann_window(patch_size, 1e-3));
  return out.topLeftCorner(img.rows(), img.cols());
}

ImageF predict_resampled(const Checkpoint& ckpt, const ImageF& img, Organelle organelle, int size) {
  if (size < 1 || size % ckpt.config.size_divisor() != 0)
    throw std::invalid_argument("resample size must be a positive multiple of " +
                                std::to_string(ckpt.config.size_divisor()));
  const ImageF small = resize_bilinear(normalize_min_max(img), size, size);
  const ImageF pred = predict(ckpt.params, ckpt.config, small, organelle);
  return resize_bilinear(pred, img.rows(), img.cols());
}

std::pair<double, double> validate_model(const Checkpoint& ckpt, const DatasetIndex& index,
                                         const TrainConfig& cfg, ImageCache& cache) {
  double ssim_sum = 0.0, pcc_sum = 0.0;
  int pairs = 0, used = 0;
  for (std::size_t r : index.indices(Split::Validation)) {
    if (used >= cfg.val_images) break;
    const SampleRecord& rec = index.records[r];
    const auto wanted = wanted_organelles(rec, cfg);
    if (wanted.empty()) continue;
    ++used;
    const ImageF& input = cache.get(rec.input_path);
    for (Organelle o : wanted) {
      const ImageF pred = cfg.resample_size > 0
                              ? predict_resampled(ckpt, input, o, cfg.resample_size)
                              : predict_image(ckpt, input, o, cfg.patch_size, cfg.effective_stride());
      const ImageF& target = cache.get(rec.target(o));
      ssim_sum += ssim_value(pred, target, cfg.ssim);
      pcc_sum += pcc_value(pred, target);
      ++pairs;
    }
  }
  if (pairs == 0) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  return {ssim_sum / pairs, pcc_sum / pairs};
}

}  // namespace vstain
