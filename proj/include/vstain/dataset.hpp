#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vstain/image.hpp"
#include "vstain/random.hpp"

namespace vstain {

/// One transmitted-light input and whichever organelle targets exist for it.
struct SampleRecord {
  std::filesystem::path input_path;
  SampleMeta meta;
  std::array<std::optional<std::filesystem::path>, 4> targets;

  bool has(Organelle o) const { return targets[index_of(o)].has_value(); }
  const std::filesystem::path& target(Organelle o) const { return targets[index_of(o)].value(); }
  std::string id() const { return input_path.stem().string(); }
};

enum class Split { Train, Validation };
enum class SplitMode { Image, Study };

struct DatasetIndex {
  std::vector<SampleRecord> records;
  std::map<std::string, std::vector<std::size_t>> studies;  // study id -> record indices
  std::vector<Split> split;                                  // per record

  std::vector<std::size_t> indices(Split which) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < split.size(); ++i)
      if (split[i] == which) out.push_back(i);
    return out;
  }
};

/// Malformed manifest content; line() is 1-based, 0 when not line-specific.
class ManifestError : public std::runtime_error {
 public:
  ManifestError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "manifest line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline constexpr std::string_view kManifestHeader =
    "input\tstudy\tmodality\tnucleus\tmitochondria\ttubulin\tactin";

/// Parses tab-separated manifest text. Relative paths resolve against base_dir.
/// The returned index has every record in the Train split.
DatasetIndex parse_manifest(std::string_view text, const std::filesystem::path& base_dir);

/// Shuffles with the seed and puts round(ratio * n) records in Train. In Study
/// mode whole studies are assigned until the train quota is reached.
void assign_split(DatasetIndex& index, double train_ratio, std::uint64_t seed,
                  SplitMode mode = SplitMode::Image);

DatasetIndex build_index(const std::filesystem::path& manifest, double train_ratio,
                         std::uint64_t seed, SplitMode mode = SplitMode::Image);

/// Writes records as a manifest with paths relative to the manifest directory.
void write_manifest(const std::filesystem::path& manifest, const std::vector<SampleRecord>& records);

/// Study-first sampling: a study is drawn uniformly, then one of its eligible
/// records uniformly, so every study is seen equally often regardless of size.
class StudySampler {
 public:
  StudySampler(const DatasetIndex& index, Split split,
               std::optional<Organelle> require = std::nullopt);

  std::size_t sample(Rng& rng) const;
  std::size_t study_count() const { return groups_.size(); }

 private:
  std::vector<std::vector<std::size_t>> groups_;
};

const SampleRecord& study_balanced_sample(const DatasetIndex& index, Rng& rng);

}  // namespace vstain
