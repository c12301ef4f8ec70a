#pragma once

#include <filesystem>
#include <string>

#include "vstain/image.hpp"
#include "vstain/random.hpp"

namespace vstain::test {

inline ImageD random_image(Eigen::Index h, Eigen::Index w, std::uint64_t seed, double lo = 0.0,
                           double hi = 1.0) {
  Rng rng(seed);
  ImageD img(h, w);
  for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = rng.uniform(lo, hi);
  return img;
}

/// Fresh empty directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(VSTAIN_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace vstain::test
