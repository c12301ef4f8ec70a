#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "vstain/metrics.hpp"
#include "vstain/trainer.hpp"

namespace vstain {

/// Trained models keyed by the organelle they predict. A shared-encoder
/// checkpoint appears under every organelle.
using ModelSet = std::map<Organelle, Checkpoint>;

struct InferenceSettings {
  int patch_size = 512;
  int stride = 0;         // 0 -> patch_size / 2
  int resample_size = 0;  // > 0 selects the resampling baseline
};

/// Predicts every validation record (up to max_records) with the matching
/// model and aggregates the metric rows per organelle.
std::vector<MetricRow> evaluate_models(const DatasetIndex& index, const ModelSet& models,
                                       const InferenceSettings& inference, int max_records,
                                       const SsimConfig& ssim = {});

struct AblationOptions {
  std::vector<std::string> axes = {"strategy", "architecture", "patch", "objective"};
  ModelConfig model;
  TrainConfig train;  // reference settings; patch_size is the reference patch
  std::vector<int> patch_sizes = {512, 256, 128};
  int resample_size = 128;
  std::vector<Organelle> organelles = {kOrganelles.begin(), kOrganelles.end()};
  int eval_images = 8;
};

struct AblationAxis {
  std::string name;
  std::string title;
  std::vector<std::pair<std::string, AggregateReport>> rows;
};

struct AblationReport {
  std::string header;
  std::vector<AblationAxis> axes;

  std::string to_text() const;
  std::string to_csv() const;
};

/// Trains and evaluates every row of the requested axes. Identical
/// configurations shared between axes are trained once.
AblationReport run_ablation(const DatasetIndex& index, const AblationOptions& options,
                            std::ostream* log = nullptr);

}  // namespace vstain
