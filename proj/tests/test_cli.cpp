#include <doctest.h>

#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "vstain/cli.hpp"
#include "vstain/dataset.hpp"
#include "vstain/image_io.hpp"

using namespace vstain;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const fs::path& cli_dataset() {
  static const fs::path dir = [] {
    const auto d = test::scratch_dir("cli_data");
    const Run r = run({"synth", "--out", d.string(), "--seed", "5", "--studies", "2", "--per-study", "3",
                       "--size", "128", "--sparsity", "1,1,0.5,0.5"});
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

std::vector<std::string> tiny_train_args(const fs::path& out) {
  return {"train", "--manifest", (cli_dataset() / "manifest.tsv").string(), "--out", out.string(),
          "--levels", "2", "--base", "2", "--patch", "128", "--steps", "2", "--val-every", "2",
          "--val-images", "1"};
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  Run r = run({"synth"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--out") != std::string::npos);
  CHECK(run({}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"gradcheck", "--no-such-flag"}).code == 2);
  CHECK(run({"gradcheck", "--term", "nope"}).code == 2);
  CHECK(run({"synth", "--out", "x", "--sparsity", "1,1"}).code == 2);
  CHECK(run({"--config", (test::scratch_dir("cli_nocfg") / "missing.cfg").string(), "gradcheck"}).code == 2);
}

TEST_CASE("help exits with code 0") {
  const Run r = run({"--help"});
  CHECK(r.code == 0);
  for (const char* sub : {"synth", "train", "predict", "evaluate", "gradcheck", "ablate"})
    CHECK(r.out.find(sub) != std::string::npos);
  CHECK(run({"train", "--help"}).out.find("--manifest") != std::string::npos);
}

TEST_CASE("gradcheck reports every term and fails on an impossible tolerance") {
  Run r = run({"gradcheck"});
  CHECK(r.code == 0);
  for (const char* term : {"mse", "ssim", "pcc", "cd", "combined", "model"})
    CHECK(r.out.find(term) != std::string::npos);
  r = run({"gradcheck", "--term", "ssim", "--tol", "1e-12"});
  CHECK(r.code == 1);
  CHECK(r.out.find("FAIL") != std::string::npos);
}

TEST_CASE("synth writes a manifest and image tree") {
  const fs::path d = cli_dataset();
  CHECK(fs::exists(d / "manifest.tsv"));
  const DatasetIndex idx = build_index(d / "manifest.tsv", 1.0, 0);
  CHECK(idx.records.size() == 6);
  CHECK(fs::exists(d / "images" / "study00_img000_input.lmci"));
}

TEST_CASE("train, predict and evaluate chain together") {
  const fs::path work = test::scratch_dir("cli_flow");
  Run r = run(tiny_train_args(work / "model"));
  REQUIRE(r.code == 0);
  CHECK(fs::exists(work / "model" / "checkpoint.lmck"));
  CHECK(slurp(work / "model" / "history.csv").rfind("step,mse,", 0) == 0);

  r = run({"predict", "--checkpoint", (work / "model" / "checkpoint.lmck").string(), "--manifest",
           (cli_dataset() / "manifest.tsv").string(), "--out", (work / "pred").string(), "--patch", "128"});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(work / "pred" / "study00_img000_input_nucleus.lmci"));
  CHECK_FALSE(fs::exists(work / "pred" / "study00_img000_input_actin.lmci"));

  r = run({"evaluate", "--manifest", (cli_dataset() / "manifest.tsv").string(), "--pred-dir",
           (work / "pred").string(), "--out", (work / "report.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("nucleus") != std::string::npos);
  CHECK(slurp(work / "report.csv").rfind("organelle,metric,mean,n\nnucleus,mae,", 0) == 0);

  r = run({"predict", "--checkpoint", (work / "model" / "checkpoint.lmck").string(), "--out",
           (work / "pred").string()});
  CHECK(r.code == 2);
  r = run({"predict", "--checkpoint", (work / "missing.lmck").string(), "--input",
           (cli_dataset() / "images" / "study00_img000_input.lmci").string(), "--out", (work / "p2").string()});
  CHECK(r.code == 1);
}

TEST_CASE("config file values apply unless overridden on the command line") {
  const fs::path work = test::scratch_dir("cli_config");
  const fs::path cfg = work / "run.cfg";
  std::ofstream(cfg) << "# tiny run\nsteps = 3\nseed = 4\n";
  auto config_args = [&](const fs::path& out) {
    std::vector<std::string> args = tiny_train_args(out);
    const auto steps = std::find(args.begin(), args.end(), "--steps");
    args.erase(steps, steps + 2);
    args.insert(args.begin(), {"--config", cfg.string()});
    return args;
  };
  REQUIRE(run(config_args(work / "a")).code == 0);
  std::string history = slurp(work / "a" / "history.csv");
  CHECK(std::count(history.begin(), history.end(), '\n') == 4);

  std::vector<std::string> args = config_args(work / "b");
  args.insert(args.end(), {"--steps", "1"});
  REQUIRE(run(args).code == 0);
  history = slurp(work / "b" / "history.csv");
  CHECK(std::count(history.begin(), history.end(), '\n') == 2);

  std::ofstream(work / "dup.cfg") << "steps = 1\nsteps = 2\n";
  CHECK(run({"--config", (work / "dup.cfg").string(), "gradcheck"}).code == 2);
}

TEST_CASE("bad manifests map to the documented exit codes") {
  const fs::path work = test::scratch_dir("cli_manifest");
  std::ofstream(work / "bad.tsv") << "not a header\n";
  std::vector<std::string> args = tiny_train_args(work / "m");
  args[2] = (work / "bad.tsv").string();
  CHECK(run(args).code == 2);
  args[2] = (work / "absent.tsv").string();
  CHECK(run(args).code == 1);
}

TEST_CASE("a small ablation writes aligned tables") {
  const fs::path work = test::scratch_dir("cli_ablate");
  const Run r = run({"ablate", "--manifest", (cli_dataset() / "manifest.tsv").string(), "--out",
                     work.string(), "--axes", "strategy,objective", "--organelles", "nucleus",
                     "--steps", "1", "--levels", "2", "--base", "2", "--eval-images", "1"});
  REQUIRE(r.code == 0);
  const std::string txt = slurp(work / "ablation.txt");
  for (const char* row : {"Separate-Encoder", "Shared-Encoder", "Combined Objective", "MSE", "SSIM", "PCC"})
    CHECK(txt.find(row) != std::string::npos);
  CHECK(slurp(work / "ablation.csv").rfind("axis,method,organelle,metric,mean,n\n", 0) == 0);
}
