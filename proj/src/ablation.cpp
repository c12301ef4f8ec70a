#include "vstain/ablation.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace vstain {

std::vector<MetricRow> evaluate_models(const DatasetIndex& index, const ModelSet& models,
                                       const InferenceSettings& inference, int max_records,
                                       const SsimConfig& ssim) {
  ImageCache cache;
  std::vector<MetricRow> rows;
  int used = 0;
  for (std::size_t r : index.indices(Split::Validation)) {
    if (used >= max_records) break;
    const SampleRecord& rec = index.records[r];
    bool any = false;
    for (const auto& [organelle, ckpt] : models) {
      if (!rec.has(organelle)) continue;
      any = true;
      const ImageF& input = cache.get(rec.input_path);
      const int stride = inference.stride > 0 ? inference.stride : std::max(1, inference.patch_size / 2);
      const ImageF pred =
          inference.resample_size > 0
              ? predict_resampled(ckpt, input, organelle, inference.resample_size)
              : predict_image(ckpt, input, organelle, inference.patch_size, stride);
      rows.push_back(evaluate_pair(pred, cache.get(rec.target(organelle)), organelle, rec.id(), ssim));
    }
    if (any) ++used;
  }
  return rows;
}

namespace {

struct Variant {
  Strategy strategy = Strategy::SeparatePerOrganelle;
  int patch_size = 128;
  int resample_size = 0;
  ObjectiveWeights weights;

  std::string key() const {
    std::ostringstream k;
    k << to_string(strategy) << '/' << patch_size << '/' << resample_size << '/' << weights.alpha << ','
      << weights.beta << ',' << weights.lambda << ',' << weights.omega;
    return k.str();
  }
};

bool has_train_records(const DatasetIndex& index, Organelle o) {
  for (std::size_t r : index.indices(Split::Train))
    if (index.records[r].has(o)) return true;
  return false;
}

class Runner {
 public:
  Runner(const DatasetIndex& index, const AblationOptions& opt, std::ostream* log)
      : index_(index), opt_(opt), log_(log) {}

  AggregateReport run(const Variant& v) {
    const std::string key = v.key();
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    TrainConfig cfg = opt_.train;
    cfg.strategy = v.strategy;
    cfg.patch_size = v.patch_size;
    cfg.resample_size = v.resample_size;
    cfg.weights = v.weights;
    cfg.val_images = 0;
    if (v.resample_size > 0) cfg.allow_any_patch_size = true;

    ModelSet models;
    if (v.strategy == Strategy::SharedEncoder) {
      log("training " + key);
      const Checkpoint ckpt = train(index_, opt_.model, cfg).checkpoint;
      for (Organelle o : opt_.organelles) models.emplace(o, ckpt);
    } else {
      for (Organelle o : opt_.organelles) {
        if (!has_train_records(index_, o)) {
          log("skipping " + std::string(to_string(o)) + ": no training targets");
          continue;
        }
        cfg.organelle = o;
        log("training " + key + " " + std::string(to_string(o)));
        models.emplace(o, train(index_, opt_.model, cfg).checkpoint);
      }
    }
    InferenceSettings inference{v.patch_size, v.patch_size == opt_.train.patch_size ? opt_.train.stride : 0,
                                v.resample_size};
    const auto rows = evaluate_models(index_, models, inference, opt_.eval_images, cfg.ssim);
    AggregateReport report = rows.empty() ? AggregateReport({}) : aggregate(rows);
    cache_.emplace(key, report);
    return report;
  }

 private:
  void log(const std::string& msg) {
    if (log_) *log_ << msg << std::endl;
  }

  const DatasetIndex& index_;
  const AblationOptions& opt_;
  std::ostream* log_;
  std::map<std::string, AggregateReport> cache_;
};

std::string patch_label(int p) { return std::to_string(p) + "x" + std::to_string(p); }

}  // namespace

AblationReport run_ablation(const DatasetIndex& index, const AblationOptions& opt, std::ostream* log) {
  opt.train.validate();
  Runner runner(index, opt, log);
  const Variant reference{Strategy::SeparatePerOrganelle, opt.train.patch_size, 0, ObjectiveWeights{}};
  const std::string ref_desc = patch_label(opt.train.patch_size) + ", micro encoder-decoder";

  AblationReport report;
  std::ostringstream header;
  header << "Ablation study on the toy dataset (" << opt.train.steps << " steps per model, "
         << index.indices(Split::Train).size() << " train / " << index.indices(Split::Validation).size()
         << " validation records).\n"
         << "Toy-scale results; no claim is made that row orderings carry over to full-scale data.\n"
         << "Architecture axis: only the micro residual encoder-decoder is implemented; "
            "UNETR, SwinUNETR and AttentionUNet rows are out of scope.\n";
  report.header = header.str();

  for (const std::string& axis : opt.axes) {
    AblationAxis a;
    a.name = axis;
    if (axis == "strategy") {
      a.title = "Training Strategy (" + ref_desc + ", Combined Objective)";
      a.rows.emplace_back("Separate-Encoder", runner.run(reference));
      Variant shared = reference;
      shared.strategy = Strategy::SharedEncoder;
      a.rows.emplace_back("Shared-Encoder", runner.run(shared));
    } else if (axis == "architecture") {
      a.title = "Encoder-Decoder Architecture (" + patch_label(opt.train.patch_size) +
                ", Separate-Encoder, Combined Objective)";
      a.rows.emplace_back("Micro-RUNet", runner.run(reference));
    } else if (axis == "patch") {
      a.title = "Patch-Size (Separate-Encoder, micro encoder-decoder, Combined Objective)";
      for (int p : opt.patch_sizes) {
        Variant v = reference;
        v.patch_size = p;
        a.rows.emplace_back(patch_label(p), runner.run(v));
      }
      Variant resample = reference;
      resample.resample_size = opt.resample_size;
      resample.patch_size = opt.resample_size;
      a.rows.emplace_back("Resampling (" + patch_label(opt.resample_size) + ")", runner.run(resample));
    } else if (axis == "objective") {
      a.title = "Objective Function (Separate-Encoder, micro encoder-decoder, " +
                patch_label(opt.train.patch_size) + ")";
      const std::pair<const char*, ObjectiveWeights> objectives[] = {
          {"Combined Objective", {1.0, 0.2, 0.1, 0.1}},
          {"MSE", {1.0, 0.0, 0.0, 0.0}},
          {"SSIM", {0.0, 1.0, 0.0, 0.0}},
          {"PCC", {0.0, 0.0, 1.0, 0.0}}};
      for (const auto& [name, w] : objectives) {
        Variant v = reference;
        v.weights = w;
        a.rows.emplace_back(name, runner.run(v));
      }
    } else {
      throw std::invalid_argument("unknown ablation axis '" + axis + "'");
    }
    report.axes.push_back(std::move(a));
  }
  return report;
}

std::string AblationReport::to_text() const {
  std::string out = header;
  char letter = 'b';
  for (const auto& axis : axes) {
    out += '\n';
    out += ablation_table(std::string(1, letter++) + ") " + axis.title, axis.rows);
  }
  return out;
}

std::string AblationReport::to_csv() const {
  std::string out;
  bool first = true;
  for (const auto& axis : axes) {
    std::string csv = ablation_csv(axis.name, axis.rows);
    if (!first) csv.erase(0, csv.find('\n') + 1);
    first = false;
    out += csv;
  }
  return out;
}

}  // namespace vstain
