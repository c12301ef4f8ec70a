#include "vstain/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "vstain/binary_io.hpp"

namespace vstain {

namespace {
constexpr std::string_view kMagic = "LMCK";
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kMaxNameLength = 4096;
constexpr std::uint32_t kMaxRank = 8;

[[noreturn]] void truncated() {
  throw CheckpointError(CheckpointError::Kind::Truncated, "checkpoint truncated");
}
}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  check_params_match(ckpt.params, ckpt.config);
  std::string out(kMagic);
  detail::put_u32(out, kVersion);
  const ModelConfig& c = ckpt.config;
  detail::put_u32(out, static_cast<std::uint32_t>(c.levels));
  detail::put_u32(out, static_cast<std::uint32_t>(c.base_channels));
  detail::put_f32(out, static_cast<float>(c.leaky_slope));
  detail::put_u32(out, c.strategy == Strategy::SharedEncoder ? 1u : 0u);
  detail::put_u32(out, static_cast<std::uint32_t>(index_of(c.organelle)));
  detail::put_u64(out, c.seed);
  detail::put_u32(out, static_cast<std::uint32_t>(ckpt.params.size()));
  for (const auto& t : ckpt.params.tensors()) {
    detail::put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out.append(t.name);
    detail::put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) detail::put_u32(out, static_cast<std::uint32_t>(d));
    for (Eigen::Index i = 0; i < t.values.size(); ++i) detail::put_f32(out, t.values(i));
  }
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != kMagic)
    throw CheckpointError(CheckpointError::Kind::BadMagic, "not an LMCK checkpoint");
  detail::ByteReader in(bytes.substr(4));
  std::uint32_t version;
  if (!in.u32(version)) truncated();
  if (version != kVersion)
    throw CheckpointError(CheckpointError::Kind::BadVersion,
                          "unsupported checkpoint version " + std::to_string(version));

  Checkpoint ckpt;
  std::uint32_t levels, base, strategy, organelle, count;
  float slope;
  std::uint64_t seed;
  if (!in.u32(levels) || !in.u32(base) || !in.f32(slope) || !in.u32(strategy) ||
      !in.u32(organelle) || !in.u64(seed) || !in.u32(count))
    truncated();
  if (strategy > 1 || organelle > 3)
    throw CheckpointError(CheckpointError::Kind::BadConfig, "invalid strategy or organelle code");
  ckpt.config.levels = static_cast<int>(levels);
  ckpt.config.base_channels = static_cast<int>(base);
  ckpt.config.leaky_slope = slope;
  ckpt.config.strategy = strategy == 1 ? Strategy::SharedEncoder : Strategy::SeparatePerOrganelle;
  ckpt.config.organelle = kOrganelles[organelle];
  ckpt.config.seed = seed;
  try {
    ckpt.config.validate();
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(CheckpointError::Kind::BadConfig, e.what());
  }

  for (std::uint32_t k = 0; k < count; ++k) {
    std::uint32_t name_len, rank;
    std::string_view name;
    if (!in.u32(name_len)) truncated();
    if (name_len > kMaxNameLength)
      throw CheckpointError(CheckpointError::Kind::BadConfig, "tensor name too long");
    if (!in.bytes(name_len, name) || !in.u32(rank)) truncated();
    if (rank > kMaxRank) throw CheckpointError(CheckpointError::Kind::BadConfig, "tensor rank too large");
    std::vector<int> shape(rank);
    std::uint64_t numel = 1;
    for (auto& d : shape) {
      std::uint32_t dim;
      if (!in.u32(dim)) truncated();
      d = static_cast<int>(dim);
      numel *= dim;
      if (numel > (std::uint64_t{1} << 32))
        throw CheckpointError(CheckpointError::Kind::ShapeMismatch, "tensor too large");
    }
    if (in.remaining() < numel * 4) truncated();
    auto& t = [&]() -> Tensor<float>& {
      try {
        return ckpt.params.add(std::string(name), shape);
      } catch (const std::logic_error& e) {
        throw CheckpointError(CheckpointError::Kind::ShapeMismatch, e.what());
      }
    }();
    for (Eigen::Index i = 0; i < t.values.size(); ++i) in.f32(t.values(i));
  }
  if (in.remaining() != 0) throw CheckpointError(CheckpointError::Kind::BadConfig, "trailing bytes after checkpoint");
  try {
    check_params_match(ckpt.params, ckpt.config);
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(CheckpointError::Kind::ShapeMismatch, e.what());
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(ckpt);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointError::Kind::Write, "failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::Open, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace vstain
