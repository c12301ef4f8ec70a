#include "vstain/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vstain/ablation.hpp"
#include "vstain/config_file.hpp"
#include "vstain/gradcheck.hpp"
#include "vstain/image_io.hpp"
#include "vstain/parallel.hpp"
#include "vstain/synth.hpp"

namespace vstain {

namespace {

// Errors in flag values or inputs that are detected before any work starts.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

const std::vector<std::string> kSubcommands = {"synth", "train", "predict", "evaluate", "gradcheck", "ablate"};

Organelle organelle_arg(const std::string& s) {
  if (auto o = parse_organelle(s)) return *o;
  throw UsageError("unknown organelle '" + s + "'");
}

Strategy strategy_arg(const std::string& s) {
  if (auto st = parse_strategy(s)) return *st;
  throw UsageError("unknown strategy '" + s + "' (expected separate or shared)");
}

SplitMode split_mode_arg(const std::string& s) {
  if (s == "image") return SplitMode::Image;
  if (s == "study") return SplitMode::Study;
  throw UsageError("unknown split mode '" + s + "' (expected image or study)");
}

std::vector<Organelle> organelle_list(const std::vector<std::string>& names) {
  std::vector<Organelle> out;
  for (const auto& n : names) {
    const Organelle o = organelle_arg(n);
    if (std::find(out.begin(), out.end(), o) == out.end()) out.push_back(o);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

struct SplitOptions {
  double ratio = 0.8;
  std::string mode = "image";

  void add(CLI::App* app) {
    app->add_option("--split", ratio, "Fraction of records used for training")->capture_default_str();
    app->add_option("--split-mode", mode, "image or study")->capture_default_str();
  }
  DatasetIndex load(const std::filesystem::path& manifest, std::uint64_t seed) const {
    if (!(ratio >= 0.0 && ratio <= 1.0)) throw UsageError("--split must be in [0, 1]");
    return build_index(manifest, ratio, seed, split_mode_arg(mode));
  }
};

struct ModelOptions {
  int levels = 3;
  int base = 8;
  double slope = 0.01;

  void add(CLI::App* app) {
    app->add_option("--levels", levels, "Encoder levels")->capture_default_str();
    app->add_option("--base", base, "Channels at the first level")->capture_default_str();
    app->add_option("--slope", slope, "Leaky ReLU slope")->capture_default_str();
  }
  ModelConfig config(std::uint64_t seed) const {
    ModelConfig m;
    m.levels = levels;
    m.base_channels = base;
    m.leaky_slope = slope;
    m.seed = seed;
    return m;
  }
};

struct TrainOptions {
  std::string strategy = "separate";
  std::string organelle = "nucleus";
  int patch = 512;
  int stride = 0;
  int steps = 200;
  int batch = 1;
  double lr = 1e-3;
  bool flips = true;
  bool elastic = true;
  std::vector<std::string> elastic_organelles = {"actin"};
  int elastic_grid = 32;
  double elastic_magnitude = 4.0;
  std::vector<double> weights = {1.0, 0.2, 0.1, 0.1};
  int val_every = 50;
  int val_images = 8;
  int resample = 0;

  void add(CLI::App* app, bool with_target) {
    if (with_target) {
      app->add_option("--strategy", strategy, "separate or shared")->capture_default_str();
      app->add_option("--organelle", organelle, "Target organelle of a separate model")->capture_default_str();
    }
    app->add_option("--patch", patch, "Training patch size (128, 256 or 512)")->capture_default_str();
    app->add_option("--stride", stride, "Inference stride, 0 for patch/2")->capture_default_str();
    app->add_option("--steps", steps, "Optimizer steps")->capture_default_str();
    app->add_option("--batch", batch, "Examples per step")->capture_default_str();
    app->add_option("--lr", lr, "Adam learning rate")->capture_default_str();
    app->add_flag("--flips,!--no-flips", flips, "Random horizontal/vertical flips");
    app->add_flag("--elastic,!--no-elastic", elastic, "Elastic warps for the listed organelles");
    app->add_option("--elastic-organelles", elastic_organelles, "Organelles that receive elastic warps")
        ->delimiter(',');
    app->add_option("--elastic-grid", elastic_grid, "Elastic control grid spacing")->capture_default_str();
    app->add_option("--elastic-magnitude", elastic_magnitude, "Elastic displacement sigma")
        ->capture_default_str();
    app->add_option("--weights", weights, "Objective weights alpha,beta,lambda,omega")->delimiter(',');
    app->add_option("--val-every", val_every, "Validation interval in steps")->capture_default_str();
    app->add_option("--val-images", val_images, "Validation records per evaluation")->capture_default_str();
    app->add_option("--resample", resample, "Train on whole images resized to NxN")->capture_default_str();
  }

  TrainConfig config(std::uint64_t seed) const {
    TrainConfig c;
    c.strategy = strategy_arg(strategy);
    c.organelle = organelle_arg(organelle);
    c.patch_size = resample > 0 ? resample : patch;
    c.allow_any_patch_size = resample > 0;
    c.stride = stride;
    c.steps = steps;
    c.batch_size = batch;
    c.lr = lr;
    c.seed = seed;
    c.augment_flips = flips;
    c.augment_elastic = elastic;
    c.elastic_organelles = {};
    for (Organelle o : organelle_list(elastic_organelles)) c.elastic_organelles[index_of(o)] = true;
    c.elastic_grid = elastic_grid;
    c.elastic_magnitude = elastic_magnitude;
    if (weights.size() != 4) throw UsageError("--weights expects four comma-separated values");
    c.weights = {weights[0], weights[1], weights[2], weights[3]};
    c.val_every = val_every;
    c.val_images = val_images;
    c.resample_size = resample;
    c.validate();
    return c;
  }
};

int cmd_synth(const SynthConfig& cfg, const std::filesystem::path& out_dir, std::ostream& out) {
  cfg.validate();
  const auto manifest = generate(cfg, out_dir);
  out << "wrote " << manifest.string() << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::filesystem::path manifest;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  SplitOptions split;
  ModelOptions model;
  TrainOptions train;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const TrainConfig cfg = a.train.config(a.seed);
  ModelConfig model = a.model.config(a.seed);
  model.strategy = cfg.strategy;
  model.organelle = cfg.organelle;
  model.validate();
  const DatasetIndex index = a.split.load(a.manifest, a.seed);
  const TrainResult result = train(index, model, cfg);
  std::filesystem::create_directories(a.out);
  save_checkpoint(result.checkpoint, a.out / "checkpoint.lmck");
  write_text(a.out / "history.csv", history_csv(result.history));
  const HistoryRow& first = result.history.front();
  const HistoryRow& last = result.history.back();
  out << "steps " << result.history.size() << ", combined loss " << first.combined << " -> " << last.combined;
  if (last.val_ssim) out << ", val ssim " << *last.val_ssim << ", val pcc " << *last.val_pcc;
  out << '\n' << "wrote " << (a.out / "checkpoint.lmck").string() << '\n';
  return kExitOk;
}

struct PredictArgs {
  std::vector<std::string> checkpoints;
  std::filesystem::path manifest;
  std::vector<std::string> inputs;
  std::filesystem::path out;
  std::vector<std::string> organelles;
  int patch = 512;
  int stride = 0;
  int resample = 0;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  if (a.manifest.empty() == a.inputs.empty()) throw UsageError("give exactly one of --manifest or --input");
  if (a.patch < 2) throw UsageError("--patch must be >= 2");
  if (a.stride < 0 || a.stride > a.patch) throw UsageError("--stride must be in [1, patch]");
  if (a.resample < 0) throw UsageError("--resample must be >= 0");
  const std::vector<Organelle> requested =
      a.organelles.empty() ? std::vector<Organelle>(kOrganelles.begin(), kOrganelles.end())
                           : organelle_list(a.organelles);

  ModelSet models;
  for (const auto& path : a.checkpoints) {
    Checkpoint ckpt = load_checkpoint(path);
    for (Organelle o : requested) {
      if (!ckpt.config.has_decoder(o)) continue;
      if (!models.emplace(o, ckpt).second)
        throw UsageError("more than one checkpoint predicts " + std::string(to_string(o)));
    }
  }
  if (models.empty()) throw UsageError("no checkpoint predicts the requested organelles");

  std::vector<std::filesystem::path> inputs;
  if (!a.manifest.empty()) {
    for (const auto& r : build_index(a.manifest, 1.0, 0).records) inputs.push_back(r.input_path);
  } else {
    for (const auto& s : a.inputs) inputs.emplace_back(s);
  }

  const int stride = a.stride > 0 ? a.stride : std::max(1, a.patch / 2);
  std::size_t written = 0;
  for (const auto& input_path : inputs) {
    const ImageF input = read_image(input_path);
    for (const auto& [organelle, ckpt] : models) {
      const ImageF pred = a.resample > 0 ? predict_resampled(ckpt, input, organelle, a.resample)
                                         : predict_image(ckpt, input, organelle, a.patch, stride);
      write_image(a.out / (input_path.stem().string() + "_" + std::string(to_string(organelle)) + ".lmci"),
                  pred);
      ++written;
    }
  }
  out << "wrote " << written << " predictions to " << a.out.string() << '\n';
  return kExitOk;
}

struct EvaluateArgs {
  std::filesystem::path manifest;
  std::filesystem::path pred_dir;
  std::filesystem::path out;
  std::string subset = "all";
  std::uint64_t seed = 0;
  SplitOptions split;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  if (a.subset != "all" && a.subset != "train" && a.subset != "validation")
    throw UsageError("--subset must be all, train or validation");
  const DatasetIndex index = a.split.load(a.manifest, a.seed);
  std::vector<MetricRow> rows;
  for (std::size_t r = 0; r < index.records.size(); ++r) {
    if (a.subset == "train" && index.split[r] != Split::Train) continue;
    if (a.subset == "validation" && index.split[r] != Split::Validation) continue;
    const SampleRecord& rec = index.records[r];
    for (Organelle o : kOrganelles) {
      if (!rec.has(o)) continue;
      const auto pred_path = a.pred_dir / (rec.id() + "_" + std::string(to_string(o)) + ".lmci");
      if (!std::filesystem::exists(pred_path)) continue;
      rows.push_back(evaluate_pair(read_image(pred_path), normalize_min_max(read_image(rec.target(o))), o,
                                   rec.id()));
    }
  }
  if (rows.empty()) throw std::runtime_error("no predictions found in " + a.pred_dir.string());
  const AggregateReport report = aggregate(rows);
  write_text(a.out, report.to_csv());
  out << report.to_text();
  return kExitOk;
}

struct GradcheckArgs {
  std::string term = "all";
  std::optional<double> tol;
  std::uint64_t seed = 0;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  const std::vector<std::string> names = {"mse", "ssim", "pcc", "cd", "combined", "model"};
  if (a.term != "all" && std::find(names.begin(), names.end(), a.term) == names.end())
    throw UsageError("unknown --term '" + a.term + "'");
  if (a.tol && !(*a.tol > 0.0)) throw UsageError("--tol must be > 0");

  Rng rng(mix_seed(a.seed, 0x6c));
  ImageD p(16, 16), gt(16, 16);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = rng.uniform();
  for (Eigen::Index i = 0; i < gt.size(); ++i) gt.data()[i] = rng.uniform();

  bool ok = true;
  char line[96];
  std::snprintf(line, sizeof line, "%-10s %14s %12s  %s\n", "term", "max_rel_err", "threshold", "result");
  out << line;
  auto report = [&](const std::string& name, double err, double threshold) {
    const bool pass = err <= threshold;
    ok = ok && pass;
    std::snprintf(line, sizeof line, "%-10s %14.6e %12.1e  %s\n", name.c_str(), err, threshold,
                  pass ? "PASS" : "FAIL");
    out << line;
  };
  const LossTerm terms[] = {LossTerm::Mse, LossTerm::Ssim, LossTerm::Pcc, LossTerm::CosineDistance,
                            LossTerm::Combined};
  for (LossTerm t : terms) {
    const std::string name(to_string(t));
    if (a.term == "all" || a.term == name) report(name, grad_check(t, p, gt), a.tol.value_or(1e-4));
  }
  if (a.term == "all" || a.term == "model") {
    ModelGradCheckOptions opt;
    opt.seed = mix_seed(a.seed, 11);
    report("model", model_grad_check(opt), a.tol.value_or(1e-3));
  }
  return ok ? kExitOk : kExitRuntime;
}

struct AblateArgs {
  std::filesystem::path manifest;
  std::filesystem::path out;
  std::vector<std::string> axes = {"strategy", "architecture", "patch", "objective"};
  std::vector<std::string> organelles = {"nucleus", "mitochondria", "tubulin", "actin"};
  std::vector<int> patch_sizes = {512, 256, 128};
  int reference_patch = 128;
  int stride = 0;
  int resample = 128;
  int steps = 100;
  int batch = 1;
  double lr = 1e-3;
  int eval_images = 8;
  std::uint64_t seed = 0;
  SplitOptions split;
  ModelOptions model;
};

int cmd_ablate(const AblateArgs& a, std::ostream& out, std::ostream& err) {
  AblationOptions opt;
  opt.axes = a.axes;
  for (const auto& axis : opt.axes)
    if (axis != "strategy" && axis != "architecture" && axis != "patch" && axis != "objective")
      throw UsageError("unknown ablation axis '" + axis + "'");
  opt.model = a.model.config(a.seed);
  opt.model.validate();
  opt.train.patch_size = a.reference_patch;
  opt.train.stride = a.stride;
  opt.train.steps = a.steps;
  opt.train.batch_size = a.batch;
  opt.train.lr = a.lr;
  opt.train.seed = a.seed;
  opt.train.validate();
  opt.patch_sizes = a.patch_sizes;
  for (int p : opt.patch_sizes)
    if (p != 128 && p != 256 && p != 512) throw UsageError("--patch-sizes must be drawn from 128, 256, 512");
  opt.resample_size = a.resample;
  if (opt.resample_size < 1) throw UsageError("--resample must be >= 1");
  opt.organelles = organelle_list(a.organelles);
  if (opt.organelles.empty()) throw UsageError("--organelles is empty");
  opt.eval_images = a.eval_images;
  if (opt.eval_images < 1) throw UsageError("--eval-images must be >= 1");

  const DatasetIndex index = a.split.load(a.manifest, a.seed);
  const AblationReport report = run_ablation(index, opt, &err);
  std::filesystem::create_directories(a.out);
  write_text(a.out / "ablation.txt", report.to_text());
  write_text(a.out / "ablation.csv", report.to_csv());
  out << report.to_text();
  return kExitOk;
}

// Pulls `--config FILE` out of args and splices the file's entries in right
// after the subcommand name, behind any flag given on the command line.
std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::optional<std::string> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config requires a file");
      config = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!config) return args;
  const auto sub = std::find_if(args.begin(), args.end(), [](const std::string& s) {
    return std::find(kSubcommands.begin(), kSubcommands.end(), s) != kSubcommands.end();
  });
  if (sub == args.end()) throw UsageError("--config needs a subcommand");
  const auto pos = static_cast<std::size_t>(sub - args.begin()) + 1;
  const std::vector<std::string> tail(args.begin() + static_cast<std::ptrdiff_t>(pos), args.end());
  std::vector<std::string> merged(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(pos));
  for (auto& s : merge_config_args(read_config_file(*config), tail)) merged.push_back(std::move(s));
  return merged;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Virtual staining of label-free microscopy images"};
  app.name("vstain");
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "Cap on worker threads (0 = hardware concurrency)");
  app.add_option("--config", "Read `key = value` defaults from a file");

  SynthConfig synth_cfg;
  std::filesystem::path synth_out;
  std::vector<double> sparsity(synth_cfg.sparsity.begin(), synth_cfg.sparsity.end());
  std::vector<double> modality_mix(synth_cfg.modality_mix.begin(), synth_cfg.modality_mix.end());
  auto* synth = app.add_subcommand("synth", "Generate a procedural multi-study dataset");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_cfg.seed, "Random seed")->capture_default_str();
  synth->add_option("--studies", synth_cfg.n_studies, "Number of studies")->capture_default_str();
  synth->add_option("--per-study", synth_cfg.images_per_study, "Images per study")->capture_default_str();
  synth->add_option("--size", synth_cfg.image_size, "Image side length")->capture_default_str();
  synth->add_option("--sparsity", sparsity, "Target presence probabilities (4 values)")->delimiter(',');
  synth->add_option("--modality-mix", modality_mix, "BF,PC,DIC weights")->delimiter(',');
  synth->add_option("--noise", synth_cfg.noise_sigma, "Input noise sigma")->capture_default_str();
  synth->add_option("--target-noise", synth_cfg.fluorescence_noise, "Fluorescence target noise sigma")
      ->capture_default_str();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write checkpoint.lmck and history.csv");
  train_cmd->add_option("--manifest", train_args.manifest, "Dataset manifest")->required();
  train_cmd->add_option("--out", train_args.out, "Output directory")->required();
  train_cmd->add_option("--seed", train_args.seed, "Random seed")->capture_default_str();
  train_args.split.add(train_cmd);
  train_args.model.add(train_cmd);
  train_args.train.add(train_cmd, true);

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "Predict organelle images with trained checkpoints");
  predict->add_option("--checkpoint", predict_args.checkpoints, "Checkpoint file (repeatable)")->required();
  predict->add_option("--manifest", predict_args.manifest, "Predict every input of a manifest");
  predict->add_option("--input", predict_args.inputs, "Input image (repeatable)");
  predict->add_option("--out", predict_args.out, "Output directory")->required();
  predict->add_option("--organelle", predict_args.organelles, "Organelles to predict")->delimiter(',');
  predict->add_option("--patch", predict_args.patch, "Inference patch size")->capture_default_str();
  predict->add_option("--stride", predict_args.stride, "Inference stride, 0 for patch/2")->capture_default_str();
  predict->add_option("--resample", predict_args.resample, "Resize whole images to NxN instead of tiling")
      ->capture_default_str();

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against the manifest targets");
  evaluate->add_option("--manifest", eval_args.manifest, "Dataset manifest")->required();
  evaluate->add_option("--pred-dir", eval_args.pred_dir, "Directory written by predict")->required();
  evaluate->add_option("--out", eval_args.out, "Report CSV path")->required();
  evaluate->add_option("--subset", eval_args.subset, "all, train or validation")->capture_default_str();
  evaluate->add_option("--seed", eval_args.seed, "Seed of the train/validation split")->capture_default_str();
  eval_args.split.add(evaluate);

  GradcheckArgs grad_args;
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  gradcheck->add_option("--term", grad_args.term, "all, mse, ssim, pcc, cd, combined or model")
      ->capture_default_str();
  gradcheck->add_option("--tol", grad_args.tol, "Override every threshold");
  gradcheck->add_option("--seed", grad_args.seed, "Random seed")->capture_default_str();

  AblateArgs ablate_args;
  auto* ablate = app.add_subcommand("ablate", "Run the ablation matrix and write ablation.txt / ablation.csv");
  ablate->add_option("--manifest", ablate_args.manifest, "Dataset manifest")->required();
  ablate->add_option("--out", ablate_args.out, "Output directory")->required();
  ablate->add_option("--axes", ablate_args.axes, "strategy,architecture,patch,objective")->delimiter(',');
  ablate->add_option("--organelles", ablate_args.organelles, "Organelles to train and score")->delimiter(',');
  ablate->add_option("--patch-sizes", ablate_args.patch_sizes, "Patch axis sizes")->delimiter(',');
  ablate->add_option("--patch", ablate_args.reference_patch, "Reference patch size for the other axes")
      ->capture_default_str();
  ablate->add_option("--stride", ablate_args.stride, "Inference stride of the reference patch")
      ->capture_default_str();
  ablate->add_option("--resample", ablate_args.resample, "Side length of the resampling baseline")
      ->capture_default_str();
  ablate->add_option("--steps", ablate_args.steps, "Optimizer steps per model")->capture_default_str();
  ablate->add_option("--batch", ablate_args.batch, "Examples per step")->capture_default_str();
  ablate->add_option("--lr", ablate_args.lr, "Adam learning rate")->capture_default_str();
  ablate->add_option("--eval-images", ablate_args.eval_images, "Validation records scored per model")
      ->capture_default_str();
  ablate->add_option("--seed", ablate_args.seed, "Random seed")->capture_default_str();
  ablate_args.split.add(ablate);
  ablate_args.model.add(ablate);

  try {
    std::vector<std::string> args = apply_config(raw_args);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::CallForHelp&) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << "\n\n";
      const auto subs = app.get_subcommands();
      err << (subs.empty() ? app.help() : subs.front()->help());
      return kExitConfig;
    }
    if (threads < 0) throw UsageError("--threads must be >= 0");
    if (threads > 0) set_max_threads(static_cast<unsigned>(threads));

    if (synth->parsed()) {
      if (sparsity.size() != 4) throw UsageError("--sparsity expects four values");
      if (modality_mix.size() != 3) throw UsageError("--modality-mix expects three values");
      std::copy(sparsity.begin(), sparsity.end(), synth_cfg.sparsity.begin());
      std::copy(modality_mix.begin(), modality_mix.end(), synth_cfg.modality_mix.begin());
      return cmd_synth(synth_cfg, synth_out, out);
    }
    if (train_cmd->parsed()) return cmd_train(train_args, out);
    if (predict->parsed()) return cmd_predict(predict_args, out);
    if (evaluate->parsed()) return cmd_evaluate(eval_args, out);
    if (gradcheck->parsed()) return cmd_gradcheck(grad_args, out);
    if (ablate->parsed()) return cmd_ablate(ablate_args, out, err);
    return kExitConfig;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const ManifestError& e) {
    err << "error: " << e.what() << '\n';
    return e.line() > 0 ? kExitConfig : kExitRuntime;
  } catch (const ConfigFileError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CheckpointError& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == CheckpointError::Kind::BadConfig ? kExitConfig : kExitRuntime;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace vstain
