// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <iostream>
#include <sstream>

#include <sys/wait.h>

#include "oracles.hpp"
#include "test_util.hpp"
#include "vstain/ablation.hpp"
#include "vstain/gradcheck.hpp"
#include "vstain/image_io.hpp"
#include "vstain/malloc_tuning.hpp"
#include "vstain/metrics.hpp"
#include "vstain/patcher.hpp"
#include "vstain/synth.hpp"
#include "vstain/trainer.hpp"

using namespace vstain;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int run_cli_binary(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + VSTAIN_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

const fs::path& toy_manifest() {
  static const fs::path manifest = [] {
    SynthConfig cfg;
    cfg.seed = 7;
    cfg.n_studies = 3;
    cfg.images_per_study = 20;
    cfg.image_size = 256;
    return generate(cfg, test::scratch_dir("toy"));
  }();
  return manifest;
}

Outcome gradient_suite() {
  Rng rng(mix_seed(0, 0x6c));
  ImageD p(16, 16), gt(16, 16);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = rng.uniform();
  for (Eigen::Index i = 0; i < gt.size(); ++i) gt.data()[i] = rng.uniform();
  bool ok = true;
  std::string detail;
  for (LossTerm t : {LossTerm::Mse, LossTerm::Ssim, LossTerm::Pcc, LossTerm::CosineDistance, LossTerm::Combined}) {
    const double err = grad_check(t, p, gt, 1e-6, ObjectiveWeights{1.0, 0.2, 0.1, 0.1});
    ok &= err < 1e-4;
    detail += fmt("%s %.1e, ", std::string(to_string(t)).c_str(), err);
  }
  const double model_err = model_grad_check();
  ok &= model_err < 1e-3;
  detail += fmt("model %.1e (limits 1e-4 / 1e-3)", model_err);
  return {ok, detail};
}

Outcome patch_round_trip() {
  Rng rng(2024);
  double worst = 0.0;
  int checks = 0;
  for (int n = 0; n < 50; ++n) {
    const auto h = static_cast<Eigen::Index>(512 + rng.index(689));
    const auto w = static_cast<Eigen::Index>(512 + rng.index(689));
    const ImageF img = test::random_image(h, w, 100 + n).cast<float>();
    for (Eigen::Index patch : {128, 256, 512}) {
      const WindowMap window = hann_window(patch);
      for (Eigen::Index stride : {patch, patch / 2, patch / 4}) {
        const PatchGrid grid = plan_grid(h, w, patch, stride);
        worst = std::max(worst, double((assemble(extract(img, grid), grid, window) - img).cwiseAbs().maxCoeff()));
        ++checks;
      }
    }
  }
  return {worst <= 1e-5, fmt("%d round trips, max abs error %.2e (limit 1e-5)", checks, worst)};
}

Outcome metric_oracle() {
  Rng rng(99);
  double worst = 0.0, worst_ed = 0.0;
  for (int n = 0; n < 200; ++n) {
    const auto h = static_cast<Eigen::Index>(11 + rng.index(6));
    const auto w = static_cast<Eigen::Index>(11 + rng.index(6));
    const ImageD pd = test::random_image(h, w, 1000 + n), gd = test::random_image(h, w, 5000 + n);
    const ImageF pf = pd.cast<float>(), gf = gd.cast<float>();
    const ImageD p = pf.cast<double>(), g = gf.cast<double>();
    const MetricRow row = evaluate_pair(pf, gf, Organelle::Nucleus);
    for (auto [got, want] : {std::pair{*row.mae, oracle::mae(p, g)}, {row.ssim, oracle::ssim(p, g)},
                             {row.pcc, oracle::pcc(p, g)}, {*row.cd, oracle::cosine_distance(p, g)},
                             {*row.ed, oracle::ed(p, g)}})
      worst = std::max(worst, std::abs(got - want));
    const double n_mse = static_cast<double>(p.size()) * mse(p, g).value;
    worst_ed = std::max(worst_ed, std::abs(*row.ed * *row.ed - n_mse) / n_mse);
  }
  return {worst <= 1e-6 && worst_ed <= 1e-6,
          fmt("200 pairs, max abs deviation %.2e (limit 1e-6), ed^2 vs N*mse rel %.2e (limit 1e-6)", worst,
              worst_ed)};
}

Outcome toy_convergence() {
  const DatasetIndex index = build_index(toy_manifest(), 0.8, 7);
  ModelConfig model;
  model.levels = 3;
  model.base_channels = 8;
  model.seed = 7;
  TrainConfig cfg;
  cfg.strategy = Strategy::SeparatePerOrganelle;
  cfg.organelle = Organelle::Nucleus;
  cfg.patch_size = 128;
  cfg.stride = 64;
  cfg.steps = 500;
  cfg.batch_size = 4;
  cfg.seed = 7;
  cfg.val_every = 500;
  cfg.val_images = 0;
  const TrainResult result = train(index, model, cfg);

  const double first = result.history.front().combined;
  double tail = 0.0;
  const std::size_t window = 50;
  for (std::size_t i = result.history.size() - window; i < result.history.size(); ++i)
    tail += result.history[i].combined;
  tail /= window;
  const double reduction = 1.0 - tail / first;

  double model_ssim = 0.0, baseline_ssim = 0.0;
  int n = 0;
  for (std::size_t r : index.indices(Split::Validation)) {
    const SampleRecord& rec = index.records[r];
    if (!rec.has(Organelle::Nucleus)) continue;
    const ImageF target = normalize_min_max(read_image(rec.target(Organelle::Nucleus)));
    const ImageF pred = predict_image(result.checkpoint, read_image(rec.input_path), Organelle::Nucleus, 128, 64);
    const ImageF constant = ImageF::Constant(target.rows(), target.cols(), target.mean());
    model_ssim += evaluate_pair(pred, target, Organelle::Nucleus).ssim;
    baseline_ssim += evaluate_pair(constant, target, Organelle::Nucleus).ssim;
    ++n;
  }
  model_ssim /= n;
  baseline_ssim /= n;
  return {reduction >= 0.5 && model_ssim > baseline_ssim,
          fmt("combined loss %.4f at step 1, %.4f mean of last %zu steps (%.1f%% reduction, need 50%%), final "
              "step %.4f; validation SSIM %.4f vs constant-mean baseline %.4f over %d images",
              first, tail, window, 100.0 * reduction, result.history.back().combined, model_ssim,
              baseline_ssim, n)};
}

Outcome strategy_masking() {
  const DatasetIndex toy = build_index(toy_manifest(), 1.0, 0);
  const SampleRecord& src = toy.records.front();
  const std::string text = std::string(kManifestHeader) + "\n" + src.input_path.string() + "\tsolo\tBF\t" +
                           src.target(Organelle::Nucleus).string() + "\t\t\t\n";
  const DatasetIndex index = parse_manifest(text, toy_manifest().parent_path());
  ModelConfig model;
  model.levels = 3;
  model.base_channels = 8;
  model.strategy = Strategy::SharedEncoder;
  TrainConfig cfg;
  cfg.strategy = Strategy::SharedEncoder;
  cfg.patch_size = 128;
  Rng rng(5);
  const auto wanted = wanted_organelles(index.records[0], cfg);
  const TrainingExample ex = make_training_example(index.records[0], cfg, wanted, rng);
  const StepResult step = compute_step(init_params<float>(model), model, ex, cfg);

  std::size_t masked_values = 0, nonzero_masked = 0;
  double nucleus_norm = 0.0;
  for (const auto& t : step.grads.tensors()) {
    if (t.name.rfind(decoder_prefix(Organelle::Nucleus), 0) == 0) nucleus_norm += t.values.cast<double>().norm();
    if (t.name.rfind("dec.", 0) != 0 || t.name.rfind(decoder_prefix(Organelle::Nucleus), 0) == 0) continue;
    for (Eigen::Index i = 0; i < t.values.size(); ++i) {
      ++masked_values;
      nonzero_masked += std::bit_cast<std::uint32_t>(t.values(i)) != 0u;
    }
  }
  return {wanted.size() == 1 && masked_values > 0 && nonzero_masked == 0 && nucleus_norm > 0.0,
          fmt("%zu non-zero of %zu gradient values in the mitochondria/tubulin/actin decoders; nucleus decoder "
              "gradient norm %.3e",
              nonzero_masked, masked_values, nucleus_norm)};
}

Outcome determinism() {
  const fs::path dir = test::scratch_dir("determinism");
  const std::string flags = " --manifest " + q(toy_manifest()) +
                            " --strategy shared --patch 128 --steps 30 --batch 2 --seed 13 --val-every 10 "
                            "--val-images 2";
  for (const char* run : {"a", "b"}) {
    const int code = run_cli_binary("train --out " + q(dir / run) + flags, dir / (std::string(run) + ".log"));
    if (code != 0) return {false, fmt("train run %s exited with %d", run, code)};
  }
  const bool same_ckpt = slurp(dir / "a" / "checkpoint.lmck") == slurp(dir / "b" / "checkpoint.lmck");
  const bool same_hist = slurp(dir / "a" / "history.csv") == slurp(dir / "b" / "history.csv");
  return {same_ckpt && same_hist, fmt("checkpoint %s, history %s (%zu checkpoint bytes)",
                                      same_ckpt ? "identical" : "differs", same_hist ? "identical" : "differs",
                                      slurp(dir / "a" / "checkpoint.lmck").size())};
}

Outcome ablation_tables() {
  const fs::path dir = test::scratch_dir("ablation");
  const int code = run_cli_binary("ablate --manifest " + q(toy_manifest()) + " --out " + q(dir) +
                                      " --axes strategy,patch,objective --steps 50 --eval-images 4",
                                  dir / "ablate.log");
  if (code != 0) return {false, fmt("ablate exited with %d", code)};
  const std::string txt = slurp(dir / "ablation.txt");
  std::vector<std::string> missing;
  for (const char* needle :
       {"no claim is made", "b) Training Strategy", "c) Patch-Size", "d) Objective Function", "Separate-Encoder",
        "Shared-Encoder", "512x512", "256x256", "128x128", "Resampling (128x128)", "Combined Objective", "MSE",
        "SSIM", "PCC", "Nucleus", "Mitochondria", "Tubulin", "Actin", "MAE↓", "SSIM↑", "PCC↑", "CD↓", "ED↓"})
    if (txt.find(needle) == std::string::npos) missing.push_back(needle);

  // Every data row has 5 + 5 + 2 + 2 metric cells.
  std::size_t rows = 0, bad_rows = 0;
  std::istringstream lines(txt);
  for (std::string line; std::getline(lines, line);) {
    if (std::count(line.begin(), line.end(), '|') != 4 || line.find("Method") == 0 || line[0] == ' ') continue;
    ++rows;
    std::istringstream cells(line.substr(line.find('|')));
    int count = 0;
    for (std::string tok; cells >> tok;) count += tok != "|";
    bad_rows += count != 14;
  }
  std::string detail = fmt("%zu method rows across 3 tables, %zu with a wrong cell count", rows, bad_rows);
  for (const auto& m : missing) detail += "; missing '" + m + "'";
  return {missing.empty() && rows == 10 && bad_rows == 0, detail};
}

Outcome wilcoxon() {
  const std::vector<double> a = {0.81, 0.77, 0.92, 0.68, 0.74, 0.88}, b = {0.70, 0.71, 0.80, 0.60, 0.73, 0.79};
  const double p = wilcoxon_signed_rank(a, b);
  return {std::abs(p - 0.03125) < 1e-12, fmt("p = %.8f for 6 positive differences (expected 0.03125)", p)};
}

}  // namespace

int main() {
  keep_large_allocations();
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"gradient-suite", gradient_suite},     {"patch-round-trip", patch_round_trip},
      {"metric-oracle", metric_oracle},       {"toy-convergence", toy_convergence},
      {"strategy-masking", strategy_masking}, {"determinism", determinism},
      {"ablation-tables", ablation_tables},   {"wilcoxon", wilcoxon}};
  const std::map<std::string, double> budget = {
      {"gradient-suite", 30.0}, {"patch-round-trip", 60.0}, {"toy-convergence", 900.0}};
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (auto it = budget.find(name); it != budget.end() && secs >= it->second) {
      o.pass = false;
      o.detail += fmt("; runtime over the %.0f s budget", it->second);
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << fmt(" [%.1f s]", secs) << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
