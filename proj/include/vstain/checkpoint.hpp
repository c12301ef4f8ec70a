#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "vstain/model.hpp"

namespace vstain {

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { Open, BadMagic, BadVersion, Truncated, BadConfig, ShapeMismatch, Write };

  CheckpointError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct Checkpoint {
  ModelConfig config;
  ModelParams<float> params;
};

/// LMCK layout (all integers u32 little-endian unless noted):
///   "LMCK", version=1,
///   config: levels, base_channels, leaky_slope (f32), strategy (0 separate,
///           1 shared), organelle (0..3), seed (u64),
///   tensor count, then per tensor: name length, name bytes, rank, dims...,
///   f32 coefficients.
std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vstain
