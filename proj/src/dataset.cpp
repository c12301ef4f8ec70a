#include "vstain/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vstain {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    cells.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return cells;
}

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view cell) {
  std::filesystem::path p{std::string(cell)};
  return p.is_absolute() ? p : base / p;
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.index(i)]);
}

}  // namespace

DatasetIndex parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  DatasetIndex index;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kManifestHeader) throw ManifestError(line_no, "unexpected header");
      header_seen = true;
      continue;
    }
    const auto cells = split_tabs(line);
    if (cells.size() != 7)
      throw ManifestError(line_no, "expected 7 tab-separated fields, got " + std::to_string(cells.size()));
    if (cells[0].empty()) throw ManifestError(line_no, "empty input path");
    if (cells[1].empty()) throw ManifestError(line_no, "empty study id");
    const auto modality = parse_modality(cells[2]);
    if (!modality) throw ManifestError(line_no, "unknown modality '" + std::string(cells[2]) + "'");
    SampleRecord rec;
    rec.input_path = resolve(base_dir, cells[0]);
    rec.meta = {std::string(cells[1]), *modality};
    bool any = false;
    for (std::size_t k = 0; k < 4; ++k) {
      if (cells[3 + k].empty()) continue;
      rec.targets[k] = resolve(base_dir, cells[3 + k]);
      any = true;
    }
    if (!any) throw ManifestError(line_no, "record has no targets");
    index.studies[rec.meta.study_id].push_back(index.records.size());
    index.records.push_back(std::move(rec));
  }
  if (!header_seen) throw ManifestError(0, "manifest is empty");
  index.split.assign(index.records.size(), Split::Train);
  return index;
}

void assign_split(DatasetIndex& index, double train_ratio, std::uint64_t seed, SplitMode mode) {
  if (!(train_ratio >= 0.0 && train_ratio <= 1.0))
    throw std::invalid_argument("split ratio must be in [0, 1]");
  const std::size_t n = index.records.size();
  const auto quota = static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(n)));
  Rng rng(mix_seed(seed, 0x5117));
  index.split.assign(n, Split::Validation);
  if (mode == SplitMode::Image) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffle(order, rng);
    for (std::size_t i = 0; i < quota; ++i) index.split[order[i]] = Split::Train;
    return;
  }
  std::vector<std::string> ids;
  for (const auto& [id, _] : index.studies) ids.push_back(id);
  shuffle(ids, rng);
  std::size_t assigned = 0;
  for (const auto& id : ids) {
    if (assigned >= quota) break;
    for (auto r : index.studies.at(id)) index.split[r] = Split::Train;
    assigned += index.studies.at(id).size();
  }
}

DatasetIndex build_index(const std::filesystem::path& manifest, double train_ratio,
                         std::uint64_t seed, SplitMode mode) {
  std::ifstream in(manifest, std::ios::binary);
  if (!in) throw ManifestError(0, "cannot open manifest " + manifest.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  DatasetIndex index = parse_manifest(ss.str(), manifest.parent_path());
  assign_split(index, train_ratio, seed, mode);
  return index;
}

void write_manifest(const std::filesystem::path& manifest, const std::vector<SampleRecord>& records) {
  const auto base = manifest.parent_path();
  auto rel = [&](const std::filesystem::path& p) {
    return (base.empty() ? p : std::filesystem::relative(p, base)).generic_string();
  };
  std::ostringstream out;
  out << kManifestHeader << '\n';
  for (const auto& r : records) {
    out << rel(r.input_path) << '\t' << r.meta.study_id << '\t' << to_string(r.meta.modality);
    for (const auto& t : r.targets) out << '\t' << (t ? rel(*t) : std::string());
    out << '\n';
  }
  if (!base.empty()) std::filesystem::create_directories(base);
  std::ofstream file(manifest, std::ios::binary | std::ios::trunc);
  file << out.str();
  if (!file) throw std::runtime_error("failed writing manifest " + manifest.string());
}

StudySampler::StudySampler(const DatasetIndex& index, Split split, std::optional<Organelle> require) {
  for (const auto& [id, members] : index.studies) {
    std::vector<std::size_t> eligible;
    for (auto r : members)
      if (index.split.at(r) == split && (!require || index.records[r].has(*require)))
        eligible.push_back(r);
    if (!eligible.empty()) groups_.push_back(std::move(eligible));
  }
  if (groups_.empty()) throw std::invalid_argument("no eligible records to sample from");
}

std::size_t StudySampler::sample(Rng& rng) const {
  const auto& group = groups_[rng.index(groups_.size())];
  return group[rng.index(group.size())];
}

const SampleRecord& study_balanced_sample(const DatasetIndex& index, Rng& rng) {
  return index.records[StudySampler(index, Split::Train).sample(rng)];
}

}  // namespace vstain
