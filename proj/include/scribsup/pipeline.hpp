#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "scribsup/losses.hpp"
#include "scribsup/metrics.hpp"
#include "scribsup/supervoxel.hpp"
#include "scribsup/volume.hpp"

namespace scribsup {

// ------------------------------------------------------------------ hashing

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

// ------------------------------------------------------------------ reports

nlohmann::json to_json(const MetricsReport& report);
nlohmann::json to_json(const TotalLossReport& report, BoundaryLossForm form);
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

// ----------------------------------------------------------------- fixtures

struct Phantom {
  Volume image;
  LabelVolume gt;
};

/// Two nested spheres (shell = class 1, core = class 2) on an anisotropic
/// grid, with seeded Gaussian noise on the intensities.
Phantom make_sphere_phantom(Shape shape = {48, 48, 12}, Spacing spacing = {1.0, 1.0, 4.0}, std::uint64_t seed = 7);

// ----------------------------------------------------------------- pipeline

struct PipelineConfig {
  std::filesystem::path image;
  std::optional<std::filesystem::path> scribbles;
  std::optional<std::filesystem::path> gt;
  std::optional<std::filesystem::path> edges;  // precomputed edge map replacing the gradient detector
  std::filesystem::path output_dir = "scribsup_out";

  /// k <= 0 selects voxel_count / 1000.
  SlicParams slic{0, 10.0, 10, 0.0};
  double edge_threshold = 0.2;
  int background_margin = 10;
  AbParams ab;
  TotalLossWeights weights;
  Shape patch{224, 224, 32};
  std::uint64_t seed = 7;
  bool run_forward = false;
  int base_filters = 8;
  bool literal_boundary_loss = false;
};

/// Parses a JSON document; unknown keys are rejected, absent keys keep
/// their defaults. Relative paths resolve against `base_dir`.
PipelineConfig pipeline_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
nlohmann::json to_json(const PipelineConfig& cfg);

struct Artifact {
  std::string name;
  std::string stage;
  std::filesystem::path path;
  std::string sha256;
};

struct PipelineResult {
  std::vector<Artifact> artifacts;
  std::filesystem::path manifest;
};

/// A failure inside run_pipeline, tagged with the stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), "stage '" + stage + "': " + cause.what(), Verbatim{}), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Scribbles (given or simulated from gt) -> supervoxels -> pseudo labels
/// -> static boundary -> optional reference forward pass and losses ->
/// evaluation of the pseudo mask against gt. Every artifact lands in
/// output_dir and is listed with its SHA-256 in manifest.json.
PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace scribsup
