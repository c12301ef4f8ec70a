#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "vstain/dataset.hpp"

namespace vstain {

/// Procedural multi-study dataset: elliptical cells whose structures give
/// four distinct targets, rendered into a BF / PC / DIC-like input.
struct SynthConfig {
  std::uint64_t seed = 0;
  int n_studies = 3;
  int images_per_study = 10;
  int image_size = 256;
  /// Presence probability per organelle target (nucleus, mitochondria,
  /// tubulin, actin).
  std::array<double, 4> sparsity = {1.0, 0.8, 0.3, 0.15};
  /// Relative weights of BF, PC and DIC inputs.
  std::array<double, 3> modality_mix = {1.0, 1.0, 1.0};
  double noise_sigma = 0.02;
  /// Gaussian noise on the fluorescence targets, which also sit on a
  /// per-study background offset.
  double fluorescence_noise = 0.015;

  void validate() const;
};

/// One rendered sample before it is written to disk.
struct SynthSample {
  SampleMeta meta;
  ImageF input;
  std::array<ImageF, 4> targets;   // always rendered
  std::array<bool, 4> present{};   // which targets the record exposes
};

/// Renders record `index` of study `study`. Depends only on (cfg, study, index).
SynthSample render_sample(const SynthConfig& cfg, int study, int index);

/// Writes images under out_dir/images and returns out_dir/manifest.tsv.
std::filesystem::path generate(const SynthConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace vstain
