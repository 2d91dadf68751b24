#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "scribsup/nifti.hpp"
#include "scribsup/pipeline.hpp"

using namespace scribsup;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "scribsup_unit" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

PipelineConfig phantom_config(const fs::path& dir) {
  const Phantom ph = make_sphere_phantom();
  write_volume(ph.image, dir / "image.nii");
  write_volume(ph.gt, dir / "gt.nii");
  PipelineConfig cfg;
  cfg.image = dir / "image.nii";
  cfg.gt = dir / "gt.nii";
  cfg.output_dir = dir / "out";
  cfg.slic.k = 60;
  cfg.background_margin = 4;
  return cfg;
}

}  // namespace

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex({}) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const std::string abc = "abc";
  CHECK(sha256_hex({reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()}) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("phantom fixture") {
  const Phantom a = make_sphere_phantom(), b = make_sphere_phantom();
  CHECK(a.image == b.image);
  CHECK(a.gt.shape() == Shape{48, 48, 12});
  CHECK(a.gt.num_classes() == 3);
  std::size_t n[3] = {0, 0, 0};
  for (auto v : a.gt.data()) ++n[v];
  CHECK(n[1] > 0);
  CHECK(n[2] > 0);
}

TEST_CASE("pipeline end to end") {
  const fs::path dir = fresh_dir("pipe");
  PipelineConfig cfg = phantom_config(dir);
  const auto r1 = run_pipeline(cfg);
  REQUIRE(r1.artifacts.size() == 6);
  for (const auto& a : r1.artifacts) {
    CHECK(fs::exists(a.path));
    CHECK(a.sha256 == sha256_file(a.path));
    if (a.path.extension() == ".nii") CHECK_NOTHROW(read_nifti(a.path));
  }
  std::ifstream mf(r1.manifest);
  const auto doc = nlohmann::json::parse(mf);
  CHECK(doc.at("artifacts").size() == 6);
  CHECK(doc.at("config").at("lambda1") == 1.0);
  CHECK(doc.at("config").at("patch_shape") == nlohmann::json::array({224, 224, 32}));

  std::ifstream ef(cfg.output_dir / "eval.json");
  const auto eval = nlohmann::json::parse(ef);
  CHECK(eval.at("classes").size() == 2);
  CHECK(eval.contains("mean"));
  CHECK(eval.contains("undefined"));

  cfg.output_dir = dir / "again";
  const auto r2 = run_pipeline(cfg);
  REQUIRE(r2.artifacts.size() == r1.artifacts.size());
  for (std::size_t i = 0; i < r1.artifacts.size(); ++i) CHECK(r1.artifacts[i].sha256 == r2.artifacts[i].sha256);
}

TEST_CASE("pipeline with forward and losses") {
  const fs::path dir = fresh_dir("pipe_fwd");
  PipelineConfig cfg = phantom_config(dir);
  cfg.run_forward = true;
  cfg.patch = {64, 64, 16};
  cfg.base_filters = 4;
  const auto r = run_pipeline(cfg);
  CHECK(r.artifacts.size() == 10);
  const ChannelVolume m = read_channels(cfg.output_dir / "mask_final.nii");
  CHECK(m.shape() == Shape{48, 48, 12});
  CHECK(m.channels() == 3);
  std::ifstream lf(cfg.output_dir / "loss.json");
  const auto loss = nlohmann::json::parse(lf);
  for (const char* k : {"l_bry", "l_seg_init", "l_seg_final", "l_ab", "total"}) CHECK(loss.contains(k));
  CHECK(loss.at("beta1") == 0.3);
}

TEST_CASE("stage-tagged failures") {
  const fs::path dir = fresh_dir("pipe_bad");
  PipelineConfig cfg;
  cfg.image = dir / "missing.nii";
  cfg.output_dir = dir / "out";
  try {
    run_pipeline(cfg);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "load");
    CHECK(std::string(e.what()).find("load") != std::string::npos);
  }

  PipelineConfig small = phantom_config(dir);
  small.run_forward = true;
  small.patch = {40, 40, 16};  // smaller than the image and not divisible
  try {
    run_pipeline(small);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "forward");
  }
}

TEST_CASE("config parsing") {
  const auto cfg = pipeline_config_from_json({{"image", "a.nii"}, {"beta1", 0.5}, {"patch_shape", {32, 32, 8}}}, "/data");
  CHECK(cfg.image == fs::path("/data/a.nii"));
  CHECK(cfg.weights.beta1 == 0.5);
  CHECK(cfg.weights.beta2 == 0.3);
  CHECK(cfg.patch == Shape{32, 32, 8});
  CHECK(cfg.edge_threshold == 0.2);
  CHECK_THROWS_AS(pipeline_config_from_json({{"image", "a.nii"}, {"lamda1", 2}}), Error);
  CHECK_THROWS_AS(pipeline_config_from_json({{"beta1", 0.5}}), Error);
  CHECK_THROWS_AS(pipeline_config_from_json({{"image", "a.nii"}, {"patch_shape", {32, 32}}}), Error);
  const auto back = pipeline_config_from_json(to_json(cfg));
  CHECK(back.patch == cfg.patch);
  CHECK(back.weights.beta1 == cfg.weights.beta1);
}
