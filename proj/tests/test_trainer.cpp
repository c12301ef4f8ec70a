#include <doctest.h>

#include <fstream>

#include "test_util.hpp"
#include "vstain/checkpoint.hpp"
#include "vstain/image_io.hpp"
#include "vstain/synth.hpp"
#include "vstain/trainer.hpp"

using namespace vstain;

namespace {

ModelConfig tiny_model(Strategy s = Strategy::SeparatePerOrganelle) {
  ModelConfig m;
  m.levels = 2;
  m.base_channels = 2;
  m.strategy = s;
  m.seed = 9;
  return m;
}

TrainConfig tiny_train() {
  TrainConfig c;
  c.patch_size = 128;
  c.steps = 3;
  c.val_every = 2;
  c.val_images = 1;
  c.seed = 4;
  return c;
}

const std::filesystem::path& small_dataset() {
  static const std::filesystem::path manifest = [] {
    SynthConfig cfg;
    cfg.seed = 3;
    cfg.n_studies = 2;
    cfg.images_per_study = 3;
    cfg.image_size = 128;
    return generate(cfg, test::scratch_dir("trainer_data"));
  }();
  return manifest;
}

}  // namespace

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.patch_size = 100;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.allow_any_patch_size = true;
  CHECK_NOTHROW(c.validate());
  c.steps = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(TrainConfig{}.effective_stride() == 256);
}

TEST_CASE("shared encoder masking leaves absent decoders with exactly zero gradients") {
  const ModelConfig m = tiny_model(Strategy::SharedEncoder);
  const auto params = init_params<float>(m);
  TrainingExample ex;
  ex.input = test::random_image(16, 16, 1).cast<float>();
  ex.targets[index_of(Organelle::Nucleus)] = test::random_image(16, 16, 2).cast<float>();
  TrainConfig cfg;
  cfg.strategy = Strategy::SharedEncoder;
  const StepResult step = compute_step(params, m, ex, cfg);
  for (const auto& t : step.grads.tensors()) {
    const bool masked = t.name.rfind("dec.", 0) == 0 && t.name.rfind("dec.nucleus.", 0) != 0;
    if (!masked) continue;
    CAPTURE(t.name);
    for (Eigen::Index i = 0; i < t.values.size(); ++i) CHECK(std::bit_cast<std::uint32_t>(t.values(i)) == 0u);
  }
  CHECK_FALSE(step.grads.at("dec.nucleus.head.weight").values.isZero(0.0f));
  CHECK_FALSE(step.grads.at("enc.0.conv_a.weight").values.isZero(0.0f));
}

TEST_CASE("augmentations apply the same crop, flips and warp to input and targets") {
  const auto dir = test::scratch_dir("augment");
  const ImageF img = test::random_image(150, 170, 5).cast<float>();
  write_image(dir / "x.lmci", img);
  const std::string text = std::string(kManifestHeader) + "\nx.lmci\ts\tBF\tx.lmci\t\t\tx.lmci\n";
  const DatasetIndex idx = parse_manifest(text, dir);
  TrainConfig cfg;
  cfg.strategy = Strategy::SharedEncoder;
  cfg.patch_size = 128;
  cfg.elastic_organelles = {true, false, false, true};
  Rng rng(8);
  for (int i = 0; i < 5; ++i) {
    const auto wanted = wanted_organelles(idx.records[0], cfg);
    REQUIRE(wanted.size() == 2);
    const TrainingExample ex = make_training_example(idx.records[0], cfg, wanted, rng);
    REQUIRE(ex.input.rows() == 128);
    CHECK(*ex.targets[index_of(Organelle::Nucleus)] == ex.input);
    CHECK(*ex.targets[index_of(Organelle::Actin)] == ex.input);
    CHECK(ex.mask() == std::vector<Organelle>{Organelle::Nucleus, Organelle::Actin});
  }
}

TEST_CASE("images smaller than the patch are reflect padded for training") {
  const auto dir = test::scratch_dir("small_patch");
  write_image(dir / "x.lmci", test::random_image(60, 90, 6).cast<float>());
  const DatasetIndex idx =
      parse_manifest(std::string(kManifestHeader) + "\nx.lmci\ts\tBF\tx.lmci\t\t\t\n", dir);
  TrainConfig cfg;
  cfg.patch_size = 128;
  Rng rng(1);
  const auto ex = make_training_example(idx.records[0], cfg, std::vector{Organelle::Nucleus}, rng);
  CHECK(ex.input.rows() == 128);
  CHECK(ex.input.cols() == 128);
}

TEST_CASE("training is reproducible bit for bit") {
  const DatasetIndex idx = build_index(small_dataset(), 0.7, 2);
  const TrainResult a = train(idx, tiny_model(), tiny_train());
  const TrainResult b = train(idx, tiny_model(), tiny_train());
  CHECK(encode_checkpoint(a.checkpoint) == encode_checkpoint(b.checkpoint));
  CHECK(history_csv(a.history) == history_csv(b.history));
  REQUIRE(a.history.size() == 3);
  CHECK(a.history[1].val_ssim.has_value());
  CHECK(a.history[2].val_ssim.has_value());
  CHECK_FALSE(a.history[0].val_ssim.has_value());
}

TEST_CASE("history csv layout") {
  HistoryRow r;
  r.step = 1;
  r.mse = 0.5;
  r.combined = 0.25;
  r.val_ssim = 0.75;
  r.val_pcc = 0.125;
  CHECK(history_csv(std::vector{r}) ==
        "step,mse,ssim_term,pcc_term,cd_term,combined,val_ssim,val_pcc\n1,0.5,0,0,0,0.25,0.75,0.125\n");
}

TEST_CASE("separate training requires records with the organelle") {
  const DatasetIndex idx = build_index(small_dataset(), 1.0, 0);
  TrainConfig cfg = tiny_train();
  cfg.organelle = Organelle::Actin;
  bool any_actin = false;
  for (const auto& r : idx.records) any_actin |= r.has(Organelle::Actin);
  if (!any_actin) CHECK_THROWS_AS(train(idx, tiny_model(), cfg), std::invalid_argument);
}

TEST_CASE("shared training runs on sparse targets") {
  const DatasetIndex idx = build_index(small_dataset(), 0.7, 2);
  TrainConfig cfg = tiny_train();
  cfg.strategy = Strategy::SharedEncoder;
  const TrainResult r = train(idx, tiny_model(), cfg);
  CHECK(r.checkpoint.config.strategy == Strategy::SharedEncoder);
  CHECK(r.checkpoint.params.contains("dec.actin.head.weight"));
}

TEST_CASE("whole-image prediction through the reflect-pad path") {
  Checkpoint ck;
  ck.config = tiny_model();
  ck.params = init_params<float>(ck.config);
  const ImageF img = test::random_image(256, 256, 3).cast<float>();
  const ImageF out = predict_image(ck, img, Organelle::Nucleus, 512, 256);
  CHECK(out.rows() == 256);
  CHECK(out.cols() == 256);
  CHECK(out.minCoeff() > 0.0f);
  CHECK(out.maxCoeff() < 1.0f);
  const ImageF direct = predict(ck.params, ck.config, reflect_pad(normalize_min_max(img), 512, 512),
                                Organelle::Nucleus);
  CHECK((out - direct.topLeftCorner(256, 256)).cwiseAbs().maxCoeff() <= 1e-6f);
}

TEST_CASE("a constant model gives the same output for any stride") {
  Checkpoint ck;
  ck.config = tiny_model();
  ck.params = init_params<float>(ck.config);
  ck.params.at("dec.nucleus.head.weight").values.setZero();
  ck.params.at("dec.nucleus.head.bias").values.setConstant(0.4f);
  const ImageF img = test::random_image(300, 200, 4).cast<float>();
  const ImageF a = predict_image(ck, img, Organelle::Nucleus, 128, 128);
  const ImageF b = predict_image(ck, img, Organelle::Nucleus, 128, 64);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-6f);
  CHECK(a(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-0.4))).epsilon(1e-6));
}

TEST_CASE("resampled prediction restores the input size") {
  Checkpoint ck;
  ck.config = tiny_model();
  ck.params = init_params<float>(ck.config);
  const ImageF out = predict_resampled(ck, test::random_image(90, 70, 2).cast<float>(), Organelle::Nucleus, 64);
  CHECK(out.rows() == 90);
  CHECK(out.cols() == 70);
}

TEST_CASE("a non-finite loss aborts training with DivergenceError") {
  const auto dir = test::scratch_dir("diverge");
  ImageF bad = test::random_image(128, 128, 1).cast<float>();
  bad(3, 3) = std::numeric_limits<float>::quiet_NaN();
  {
    std::ofstream f(dir / "bad.lmci", std::ios::binary);
    f << encode_lmci(bad);
  }
  write_image(dir / "t.lmci", test::random_image(128, 128, 2).cast<float>());
  const DatasetIndex idx =
      parse_manifest(std::string(kManifestHeader) + "\nbad.lmci\ts\tBF\tt.lmci\t\t\t\n", dir);
  TrainConfig cfg = tiny_train();
  cfg.val_images = 0;
  CHECK_THROWS_AS(train(idx, tiny_model(), cfg), DivergenceError);
}
