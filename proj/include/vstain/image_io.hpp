#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "vstain/image.hpp"

namespace vstain {

class ImageIoError : public std::runtime_error {
 public:
  enum class Kind { Open, BadMagic, Truncated, DimensionOverflow, BadHeader, Write };

  ImageIoError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Largest pixel count accepted by the readers.
inline constexpr std::uint64_t kMaxPixels = std::uint64_t{1} << 30;

/// Reads an LMCI file ("LMC1" magic) or a binary PGM (P5, 8/16-bit).
/// PGM samples are divided by the declared maxval.
ImageF read_image(const std::filesystem::path& path);

/// Writes the native LMCI format: "LMC1", u32 LE version=1, height, width,
/// then height*width f32 LE samples row-major. Parent directories are created.
void write_image(const std::filesystem::path& path, const ImageF& img);

ImageF decode_lmci(std::string_view bytes);
std::string encode_lmci(const ImageF& img);
ImageF decode_pgm(std::string_view bytes);

}  // namespace vstain
