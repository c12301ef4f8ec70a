#include "vstain/image_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "vstain/binary_io.hpp"

namespace vstain {

namespace {

constexpr std::string_view kLmciMagic = "LMC1";
constexpr std::uint32_t kLmciVersion = 1;

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError(ImageIoError::Kind::Open, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void check_dims(std::uint64_t height, std::uint64_t width) {
  if (height == 0 || width == 0 || height > kMaxPixels || width > kMaxPixels ||
      height * width > kMaxPixels)
    throw ImageIoError(ImageIoError::Kind::DimensionOverflow,
                       "image dimensions out of range: " + std::to_string(height) + "x" +
                           std::to_string(width));
}

// PGM header token: skips whitespace and '#' comments.
bool next_token(std::string_view bytes, std::size_t& pos, std::uint64_t& value) {
  while (pos < bytes.size()) {
    const auto ch = static_cast<unsigned char>(bytes[pos]);
    if (ch == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(ch)) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) return false;
  value = 0;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    value = value * 10 + static_cast<std::uint64_t>(bytes[pos] - '0');
    if (value > (std::uint64_t{1} << 40)) return false;
    ++pos;
  }
  return true;
}

}  // namespace

std::string encode_lmci(const ImageF& img) {
  std::string out;
  out.reserve(16 + static_cast<std::size_t>(img.size()) * 4);
  out.append(kLmciMagic);
  detail::put_u32(out, kLmciVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(img.rows()));
  detail::put_u32(out, static_cast<std::uint32_t>(img.cols()));
  for (Eigen::Index i = 0; i < img.size(); ++i) detail::put_f32(out, img.data()[i]);
  return out;
}

ImageF decode_lmci(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != kLmciMagic)
    throw ImageIoError(ImageIoError::Kind::BadMagic, "not an LMCI file");
  detail::ByteReader reader(bytes.substr(4));
  std::uint32_t version, height, width;
  if (!reader.u32(version) || !reader.u32(height) || !reader.u32(width))
    throw ImageIoError(ImageIoError::Kind::Truncated, "LMCI header truncated");
  if (version != kLmciVersion)
    throw ImageIoError(ImageIoError::Kind::BadHeader,
                       "unsupported LMCI version " + std::to_string(version));
  check_dims(height, width);
  const std::uint64_t count = std::uint64_t{height} * width;
  if (reader.remaining() < count * 4)
    throw ImageIoError(ImageIoError::Kind::Truncated, "LMCI payload truncated");
  ImageF img(height, width);
  for (std::uint64_t i = 0; i < count; ++i) reader.f32(img.data()[i]);
  return img;
}

ImageF decode_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes.substr(0, 2) != "P5")
    throw ImageIoError(ImageIoError::Kind::BadMagic, "not a binary PGM file");
  std::size_t pos = 2;
  std::uint64_t width, height, maxval;
  if (!next_token(bytes, pos, width) || !next_token(bytes, pos, height) ||
      !next_token(bytes, pos, maxval)) {
    const bool ran_out = pos >= bytes.size();
    throw ImageIoError(ran_out ? ImageIoError::Kind::Truncated : ImageIoError::Kind::BadHeader,
                       "malformed PGM header");
  }
  if (maxval == 0 || maxval > 65535)
    throw ImageIoError(ImageIoError::Kind::BadHeader, "PGM maxval out of range");
  check_dims(height, width);
  // Exactly one whitespace byte separates the header from the raster.
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw ImageIoError(ImageIoError::Kind::Truncated, "PGM header truncated");
  ++pos;
  const std::uint64_t bytes_per_sample = maxval < 256 ? 1 : 2;
  const std::uint64_t count = height * width;
  if (bytes.size() - pos < count * bytes_per_sample)
    throw ImageIoError(ImageIoError::Kind::Truncated, "PGM payload truncated");
  ImageF img(static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width));
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::uint64_t i = 0; i < count; ++i) {
    const unsigned v = bytes_per_sample == 1 ? p[i] : (unsigned{p[2 * i]} << 8) | p[2 * i + 1];
    img.data()[i] = static_cast<float>(std::min<double>(v, maxval) * scale);
  }
  return img;
}

ImageF read_image(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  if (bytes.size() >= 2 && bytes.compare(0, 2, "P5") == 0) return decode_pgm(bytes);
  return decode_lmci(bytes);
}

void write_image(const std::filesystem::path& path, const ImageF& img) {
  if (img.size() == 0) throw ImageIoError(ImageIoError::Kind::Write, "refusing to write empty image");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  const std::string bytes = encode_lmci(img);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ImageIoError(ImageIoError::Kind::Write, "failed writing " + path.string());
}

}  // namespace vstain
