#include "vstain/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "vstain/image_io.hpp"
#include "vstain/parallel.hpp"

namespace vstain {

void SynthConfig::validate() const {
  if (n_studies < 1) throw std::invalid_argument("n_studies must be >= 1");
  if (images_per_study < 1) throw std::invalid_argument("images_per_study must be >= 1");
  if (image_size < 128) throw std::invalid_argument("image_size must be >= 128");
  for (double p : sparsity)
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sparsity probabilities must be in [0, 1]");
  double total = 0.0;
  for (double w : modality_mix) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("modality weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("modality weights must not all be zero");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be >= 0");
  if (!(fluorescence_noise >= 0.0)) throw std::invalid_argument("fluorescence_noise must be >= 0");
}

namespace {

struct StudyStyle {
  double cells_per_image;
  double cell_radius;
  double nucleus_ratio;
  double granule_sigma;
  int granules_per_cell;
  int filaments_per_cell;
  double background;  // fluorescence offset
};

StudyStyle study_style(const SynthConfig& cfg, int study) {
  Rng rng(mix_seed(cfg.seed, 0x57d0 + static_cast<std::uint64_t>(study)));
  const double scale = cfg.image_size / 256.0;
  StudyStyle s;
  s.cells_per_image = rng.uniform(12.0, 20.0) * scale * scale;
  s.cell_radius = rng.uniform(20.0, 32.0) * scale;
  s.nucleus_ratio = rng.uniform(0.5, 0.65);
  s.granule_sigma = rng.uniform(0.9, 1.8);
  s.granules_per_cell = static_cast<int>(rng.uniform(15.0, 35.0));
  s.filaments_per_cell = static_cast<int>(rng.uniform(4.0, 9.0));
  s.background = rng.uniform(0.06, 0.14);
  return s;
}

// Adds amp * exp(-d^2 / 2 sigma^2) around (y, x), truncated at 3 sigma.
void splat(ImageD& img, double y, double x, double sigma, double amp) {
  const double reach = 3.0 * sigma;
  const auto r0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(y - reach)));
  const auto r1 = std::min<Eigen::Index>(img.rows() - 1, static_cast<Eigen::Index>(std::ceil(y + reach)));
  const auto c0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(x - reach)));
  const auto c1 = std::min<Eigen::Index>(img.cols() - 1, static_cast<Eigen::Index>(std::ceil(x + reach)));
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (Eigen::Index r = r0; r <= r1; ++r)
    for (Eigen::Index c = c0; c <= c1; ++c) {
      const double dy = static_cast<double>(r) - y, dx = static_cast<double>(c) - x;
      img(r, c) += amp * std::exp(-(dy * dy + dx * dx) * inv);
    }
}

ImageD gaussian_blur(const ImageD& img, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  Eigen::VectorXd taps(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) taps(i + radius) = std::exp(-(i * i) / (2.0 * sigma * sigma));
  taps /= taps.sum();
  const Eigen::Index h = img.rows(), w = img.cols();
  ImageD tmp = ImageD::Zero(h, w), out = ImageD::Zero(h, w);
  for (Eigen::Index r = 0; r < h; ++r)
    for (Eigen::Index c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += taps(k + radius) * img(r, reflect_index(c + k, w));
      tmp(r, c) = acc;
    }
  for (Eigen::Index r = 0; r < h; ++r)
    for (Eigen::Index c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += taps(k + radius) * tmp(reflect_index(r + k, h), c);
      out(r, c) = acc;
    }
  return out;
}

Modality draw_modality(const SynthConfig& cfg, Rng& rng) {
  const double total = cfg.modality_mix[0] + cfg.modality_mix[1] + cfg.modality_mix[2];
  double u = rng.uniform() * total;
  for (int m = 0; m < 3; ++m) {
    if (u < cfg.modality_mix[m] && cfg.modality_mix[m] > 0.0) return static_cast<Modality>(m);
    u -= cfg.modality_mix[m];
  }
  for (int m = 2; m >= 0; --m)
    if (cfg.modality_mix[m] > 0.0) return static_cast<Modality>(m);
  return Modality::BF;
}

std::string study_id(int study) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "study%02d", study);
  return buf;
}

}  // namespace

SynthSample render_sample(const SynthConfig& cfg, int study, int index) {
  cfg.validate();
  const StudyStyle style = study_style(cfg, study);
  Rng rng(mix_seed(mix_seed(cfg.seed, 1 + static_cast<std::uint64_t>(study)),
                   static_cast<std::uint64_t>(index)));
  const int n = cfg.image_size;
  ImageD cyto = ImageD::Zero(n, n), nucleus = ImageD::Zero(n, n), actin = ImageD::Zero(n, n);
  ImageD mito = ImageD::Zero(n, n), tubulin = ImageD::Zero(n, n);

  SynthSample sample;
  sample.meta = {study_id(study), draw_modality(cfg, rng)};

  const int cells = std::max(1, static_cast<int>(std::lround(style.cells_per_image * rng.uniform(0.8, 1.2))));
  for (int k = 0; k < cells; ++k) {
    const double cy = rng.uniform(0.0, n), cx = rng.uniform(0.0, n);
    const double a = style.cell_radius * rng.uniform(0.8, 1.2);
    const double b = style.cell_radius * rng.uniform(0.6, 1.0);
    const double theta = rng.uniform(0.0, std::numbers::pi);
    const double ct = std::cos(theta), st = std::sin(theta);
    const double na = a * style.nucleus_ratio, nb = b * style.nucleus_ratio;
    const double ny = cy + rng.uniform(-0.1, 0.1) * b, nx = cx + rng.uniform(-0.1, 0.1) * a;

    const double reach = a * 1.3;
    const auto r0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(cy - reach));
    const auto r1 = std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(cy + reach));
    const auto c0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(cx - reach));
    const auto c1 = std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(cx + reach));
    for (Eigen::Index r = r0; r <= r1; ++r) {
      for (Eigen::Index c = c0; c <= c1; ++c) {
        const double dy = static_cast<double>(r) - cy, dx = static_cast<double>(c) - cx;
        const double u = ct * dx + st * dy, v = -st * dx + ct * dy;
        const double rho = std::sqrt((u / a) * (u / a) + (v / b) * (v / b));
        const double ndy = static_cast<double>(r) - ny, ndx = static_cast<double>(c) - nx;
        const double nu = ct * ndx + st * ndy, nv = -st * ndx + ct * ndy;
        const double nrho2 = (nu / na) * (nu / na) + (nv / nb) * (nv / nb);
        cyto(r, c) = std::max(cyto(r, c), 1.0 / (1.0 + std::exp(-(1.0 - rho) * 12.0)));
        nucleus(r, c) = std::max(nucleus(r, c), 1.0 / (1.0 + std::exp((std::sqrt(nrho2) - 1.0) * 10.0)));
        const double band = (rho - 1.0) / 0.07;
        actin(r, c) = std::max(actin(r, c), std::exp(-band * band));
      }
    }

    // Mitochondria: granules scattered in the cytoplasm, outside the nucleus.
    for (int g = 0; g < style.granules_per_cell; ++g) {
      const double rad = rng.uniform(style.nucleus_ratio * 1.2, 0.92);
      const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double u = rad * a * std::cos(phi), v = rad * b * std::sin(phi);
      splat(mito, cy + st * u + ct * v, cx + ct * u - st * v, style.granule_sigma, 0.9);
    }
    // Tubulin: gently curving filaments from the nucleus toward the membrane.
    for (int f = 0; f < style.filaments_per_cell; ++f) {
      double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double bend = rng.uniform(-0.8, 0.8);
      for (double t = style.nucleus_ratio; t <= 0.95; t += 0.5 / style.cell_radius) {
        const double ang = phi + bend * (t - style.nucleus_ratio);
        const double u = t * a * std::cos(ang), v = t * b * std::sin(ang);
        splat(tubulin, cy + st * u + ct * v, cx + ct * u - st * v, 0.8, 0.25);
      }
    }
  }
  mito = mito.cwiseMin(1.0);
  tubulin = tubulin.cwiseMin(1.0);

  const ImageD structure = 0.35 * cyto + 0.5 * nucleus + 0.1 * mito + 0.08 * tubulin + 0.07 * actin;
  ImageD input(n, n);
  switch (sample.meta.modality) {
    case Modality::BF:
      input = (0.65 - 0.3 * gaussian_blur(structure, 0.8).array()).matrix();
      break;
    case Modality::PC: {
      const ImageD halo = structure - gaussian_blur(structure, 4.0);
      input = (0.3 + 0.25 * structure.array() + 0.9 * halo.array()).matrix();
      break;
    }
    case Modality::DIC: {
      const ImageD s = gaussian_blur(structure, 1.0);
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
          input(r, c) = 0.5 + 1.2 * (s(reflect_index(r + 1, n), reflect_index(c + 1, n)) -
                                     s(reflect_index(r - 1, n), reflect_index(c - 1, n)));
      break;
    }
  }
  for (Eigen::Index i = 0; i < input.size(); ++i) input.data()[i] += cfg.noise_sigma * rng.normal();
  sample.input = input.cwiseMax(0.0).cwiseMin(1.0).cast<float>();

  const std::array<const ImageD*, 4> fields = {&nucleus, &mito, &tubulin, &actin};
  for (std::size_t k = 0; k < 4; ++k) {
    ImageD t = (style.background + (1.0 - style.background) * fields[k]->array()).matrix();
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] += cfg.fluorescence_noise * rng.normal();
    sample.targets[k] = t.cwiseMax(0.0).cwiseMin(1.0).cast<float>();
  }

  bool any = false;
  for (std::size_t k = 0; k < 4; ++k) any |= (sample.present[k] = rng.bernoulli(cfg.sparsity[k]));
  if (!any) {
    // Every record needs a target: keep the most likely one.
    std::size_t best = 0;
    for (std::size_t k = 1; k < 4; ++k)
      if (cfg.sparsity[k] > cfg.sparsity[best]) best = k;
    sample.present[best] = true;
  }
  return sample;
}

std::filesystem::path generate(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  const auto images_dir = out_dir / "images";
  std::filesystem::create_directories(images_dir);
  const std::size_t total = static_cast<std::size_t>(cfg.n_studies) * cfg.images_per_study;
  std::vector<SampleRecord> records(total);
  parallel_for(total, [&](std::size_t i) {
    const int study = static_cast<int>(i) / cfg.images_per_study;
    const int index = static_cast<int>(i) % cfg.images_per_study;
    const SynthSample s = render_sample(cfg, study, index);
    char stem[64];
    std::snprintf(stem, sizeof stem, "%s_img%03d", s.meta.study_id.c_str(), index);
    SampleRecord& rec = records[i];
    rec.meta = s.meta;
    rec.input_path = images_dir / (std::string(stem) + "_input.lmci");
    write_image(rec.input_path, s.input);
    for (std::size_t k = 0; k < 4; ++k) {
      if (!s.present[k]) continue;
      rec.targets[k] = images_dir / (std::string(stem) + "_" + std::string(to_string(kOrganelles[k])) + ".lmci");
      write_image(*rec.targets[k], s.targets[k]);
    }
  });
  const auto manifest = out_dir / "manifest.tsv";
  write_manifest(manifest, records);
  return manifest;
}

}  // namespace vstain
