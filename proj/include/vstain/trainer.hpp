#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vstain/checkpoint.hpp"
#include "vstain/dataset.hpp"
#include "vstain/objective.hpp"

namespace vstain {

struct TrainConfig {
  Strategy strategy = Strategy::SeparatePerOrganelle;
  Organelle organelle = Organelle::Nucleus;  // separate strategy only
  int patch_size = 512;
  int stride = 0;  // 0 -> patch_size / 2; used for validation inference
  int steps = 200;
  int batch_size = 1;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  bool augment_flips = true;
  bool augment_elastic = true;
  std::array<bool, 4> elastic_organelles = {false, false, false, true};  // actin
  int elastic_grid = 32;
  double elastic_magnitude = 4.0;
  ObjectiveWeights weights;
  SsimConfig ssim;
  int val_every = 50;
  int val_images = 8;
  int resample_size = 0;  // > 0: whole images resized to this size, no patches
  bool allow_any_patch_size = false;

  int effective_stride() const { return stride > 0 ? stride : std::max(1, patch_size / 2); }
  int input_size() const { return resample_size > 0 ? resample_size : patch_size; }
  void validate() const;
};

/// One augmented training sample: input patch and the matching target patches.
struct TrainingExample {
  ImageF input;
  std::array<std::optional<ImageF>, 4> targets;

  bool has(Organelle o) const { return targets[index_of(o)].has_value(); }
  std::vector<Organelle> mask() const {
    std::vector<Organelle> out;
    for (auto o : kOrganelles)
      if (has(o)) out.push_back(o);
    return out;
  }
};

/// Loads images from disk once and keeps them min-max normalized.
class ImageCache {
 public:
  const ImageF& get(const std::filesystem::path& path);

 private:
  std::map<std::filesystem::path, ImageF> images_;
};

/// Organelles a training step uses: the model's decoders that the record
/// actually has targets for.
std::vector<Organelle> wanted_organelles(const SampleRecord& record, const TrainConfig& cfg);

/// Normalizes, crops a uniformly placed patch (reflect-padding images smaller
/// than the patch), and applies flips / elastic warps identically to the
/// input and every loaded target. Only organelles in `wanted` are loaded.
TrainingExample make_training_example(const SampleRecord& record, const TrainConfig& cfg,
                                      std::span<const Organelle> wanted, Rng& rng,
                                      ImageCache* cache = nullptr);

struct HistoryRow {
  int step = 0;
  double mse = 0.0;
  double ssim_term = 0.0;  // 1 - SSIM
  double pcc_term = 0.0;   // 1 - PCC
  double cd_term = 0.0;
  double combined = 0.0;
  std::optional<double> val_ssim;
  std::optional<double> val_pcc;
};

std::string history_csv(std::span<const HistoryRow> rows);

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<HistoryRow> history;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-step loss and gradients for one example. Exposed for tests of the
/// masking contract; train() is built on it.
struct StepResult {
  HistoryRow losses;
  ParamGrads<float> grads;
};
StepResult compute_step(const ModelParams<float>& params, const ModelConfig& model_cfg,
                        const TrainingExample& example, const TrainConfig& cfg);

/// Runs cfg.steps iterations of sample -> forward -> combined loss ->
/// backward -> Adam. Fully determined by the index, configs, and seeds.
/// Throws DivergenceError on a non-finite loss.
TrainResult train(const DatasetIndex& index, ModelConfig model_cfg, const TrainConfig& cfg);

/// Whole-image inference: normalize, tile, predict, blend with a Hann window.
ImageF predict_image(const Checkpoint& ckpt, const ImageF& img, Organelle organelle, int patch_size,
                     int stride);

/// Resampling baseline: resize to size x size, one forward pass, resize back.
ImageF predict_resampled(const Checkpoint& ckpt, const ImageF& img, Organelle organelle, int size);

/// Mean validation SSIM / PCC over up to cfg.val_images validation records.
std::pair<double, double> validate_model(const Checkpoint& ckpt, const DatasetIndex& index,
                                         const TrainConfig& cfg, ImageCache& cache);

}  // namespace vstain
