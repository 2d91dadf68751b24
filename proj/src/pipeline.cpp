#include "scribsup/pipeline.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <random>
#include <set>
#include <sstream>

#include "scribsup/nifti.hpp"
#include "scribsup/propagation.hpp"
#include "scribsup/refnet.hpp"
#include "scribsup/scribble.hpp"

namespace scribsup {

using nlohmann::json;

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoFailure, "SHA-256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return sha256_hex(bytes);
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const MetricsReport& r) {
  json classes = json::array();
  for (const auto& m : r.per_class) {
    classes.push_back(
        {{"class", m.label}, {"dice", m.dice}, {"hd95_mm", optional_number(m.hd95_mm)}, {"precision", optional_number(m.precision)}});
  }
  json undefined = json::array();
  for (const auto& [label, metric] : r.undefined) undefined.push_back({{"class", label}, {"metric", metric}});
  return {{"classes", classes},
          {"mean",
           {{"dice", optional_number(r.mean_dice)},
            {"hd95_mm", optional_number(r.mean_hd95_mm)},
            {"precision", optional_number(r.mean_precision)}}},
          {"undefined", undefined}};
}

json to_json(const TotalLossReport& r, BoundaryLossForm form) {
  return {{"l_bry", r.l_bry},
          {"l_seg_init", r.l_seg_init},
          {"l_seg_final", r.l_seg_final},
          {"l_ab", r.l_ab},
          {"total", r.value},
          {"beta1", r.weights.beta1},
          {"beta2", r.weights.beta2},
          {"lambda1", r.ab.lambda1},
          {"lambda2", r.ab.lambda2},
          {"epsilon", r.ab.epsilon},
          {"boundary_form", form == BoundaryLossForm::Literal ? "literal" : "two_sided"}};
}

void write_json(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

Phantom make_sphere_phantom(Shape shape, Spacing spacing, std::uint64_t seed) {
  Phantom p{Volume(shape, spacing), LabelVolume(shape, spacing, 3)};
  const double cx = (shape.nx - 1) * spacing.x / 2.0;
  const double cy = (shape.ny - 1) * spacing.y / 2.0;
  const double cz = (shape.nz - 1) * spacing.z / 2.0;
  const double extent = std::min({shape.nx * spacing.x, shape.ny * spacing.y, shape.nz * spacing.z});
  const double outer = 0.35 * extent, inner = 0.17 * extent;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.03);
  for (int z = 0; z < shape.nz; ++z) {
    for (int y = 0; y < shape.ny; ++y) {
      for (int x = 0; x < shape.nx; ++x) {
        const double r = std::hypot(x * spacing.x - cx, y * spacing.y - cy, z * spacing.z - cz);
        std::uint16_t label = r <= inner ? 2 : (r <= outer ? 1 : 0);
        const double base = label == 2 ? 0.9 : (label == 1 ? 0.5 : 0.1);
        p.gt(x, y, z) = label;
        p.image(x, y, z) = static_cast<float>(base + noise(rng));
      }
    }
  }
  return p;
}

// ----------------------------------------------------------------- config

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

PipelineConfig pipeline_config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  static const std::set<std::string> known{"image",          "scribbles",     "gt",        "edges",
                                           "output_dir",     "slic_k",        "compactness", "iterations",
                                           "convergence_mm", "edge_threshold", "background_margin", "lambda1",
                                           "lambda2",        "epsilon",       "beta1",     "beta2",
                                           "patch_shape",    "seed",          "forward",   "base_filters",
                                           "literal_bry"};
  if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "pipeline config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
  }
  PipelineConfig cfg;
  try {
    if (!doc.contains("image")) throw Error(ErrorCode::InvalidConfig, "config requires 'image'");
    cfg.image = resolve(base_dir, doc.at("image").get<std::string>());
    if (doc.contains("scribbles")) cfg.scribbles = resolve(base_dir, doc.at("scribbles").get<std::string>());
    if (doc.contains("gt")) cfg.gt = resolve(base_dir, doc.at("gt").get<std::string>());
    if (doc.contains("edges")) cfg.edges = resolve(base_dir, doc.at("edges").get<std::string>());
    if (doc.contains("output_dir")) cfg.output_dir = resolve(base_dir, doc.at("output_dir").get<std::string>());
    cfg.slic.k = doc.value("slic_k", cfg.slic.k);
    cfg.slic.compactness = doc.value("compactness", cfg.slic.compactness);
    cfg.slic.iterations = doc.value("iterations", cfg.slic.iterations);
    cfg.slic.convergence_mm = doc.value("convergence_mm", cfg.slic.convergence_mm);
    cfg.edge_threshold = doc.value("edge_threshold", cfg.edge_threshold);
    cfg.background_margin = doc.value("background_margin", cfg.background_margin);
    cfg.ab.lambda1 = doc.value("lambda1", cfg.ab.lambda1);
    cfg.ab.lambda2 = doc.value("lambda2", cfg.ab.lambda2);
    cfg.ab.epsilon = doc.value("epsilon", cfg.ab.epsilon);
    cfg.weights.beta1 = doc.value("beta1", cfg.weights.beta1);
    cfg.weights.beta2 = doc.value("beta2", cfg.weights.beta2);
    if (doc.contains("patch_shape")) {
      const auto v = doc.at("patch_shape").get<std::vector<int>>();
      if (v.size() != 3) throw Error(ErrorCode::InvalidConfig, "patch_shape needs three entries");
      cfg.patch = {v[0], v[1], v[2]};
    }
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.run_forward = doc.value("forward", cfg.run_forward);
    cfg.base_filters = doc.value("base_filters", cfg.base_filters);
    cfg.literal_boundary_loss = doc.value("literal_bry", cfg.literal_boundary_loss);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  if (!cfg.patch.valid()) throw Error(ErrorCode::InvalidConfig, "patch_shape must be positive");
  if (!(cfg.edge_threshold > 0.0 && cfg.edge_threshold < 1.0)) throw Error(ErrorCode::InvalidConfig, "edge_threshold must be in (0,1)");
  if (cfg.ab.lambda1 < 0 || cfg.ab.lambda2 < 0 || cfg.ab.epsilon < 0 || cfg.weights.beta1 < 0 || cfg.weights.beta2 < 0) {
    throw Error(ErrorCode::InvalidConfig, "loss weights must be non-negative");
  }
  if (cfg.background_margin < 1) throw Error(ErrorCode::InvalidConfig, "background_margin must be >= 1");
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  return pipeline_config_from_json(doc, path.parent_path());
}

json to_json(const PipelineConfig& cfg) {
  json j{{"image", cfg.image.string()},
         {"output_dir", cfg.output_dir.string()},
         {"slic_k", cfg.slic.k},
         {"compactness", cfg.slic.compactness},
         {"iterations", cfg.slic.iterations},
         {"convergence_mm", cfg.slic.convergence_mm},
         {"edge_threshold", cfg.edge_threshold},
         {"background_margin", cfg.background_margin},
         {"lambda1", cfg.ab.lambda1},
         {"lambda2", cfg.ab.lambda2},
         {"epsilon", cfg.ab.epsilon},
         {"beta1", cfg.weights.beta1},
         {"beta2", cfg.weights.beta2},
         {"patch_shape", {cfg.patch.nx, cfg.patch.ny, cfg.patch.nz}},
         {"seed", cfg.seed},
         {"forward", cfg.run_forward},
         {"base_filters", cfg.base_filters},
         {"literal_bry", cfg.literal_boundary_loss}};
  if (cfg.scribbles) j["scribbles"] = cfg.scribbles->string();
  if (cfg.gt) j["gt"] = cfg.gt->string();
  if (cfg.edges) j["edges"] = cfg.edges->string();
  return j;
}

// ---------------------------------------------------------------- pipeline

namespace {

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  } catch (const std::exception& e) {
    throw StageError(name, Error(ErrorCode::IoFailure, e.what()));
  }
}

ChannelVolume crop_channels(const ChannelVolume& src, const Shape& target, const Offset& off, const Spacing& spacing) {
  ChannelVolume out(target, spacing, src.channels());
  const Shape& s = src.shape();
  for (int c = 0; c < src.channels(); ++c) {
    for (int z = 0; z < target.nz; ++z) {
      for (int y = 0; y < target.ny; ++y) {
        for (int x = 0; x < target.nx; ++x) {
          const int sx = x - off.x, sy = y - off.y, sz = z - off.z;
          if (s.contains(sx, sy, sz)) out.at(c, target.index(x, y, z)) = src.at(c, s.index(sx, sy, sz));
        }
      }
    }
  }
  return out;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  PipelineResult result;
  const auto& dir = cfg.output_dir;

  auto record = [&](const std::string& name, const std::string& stage_name, const std::filesystem::path& path) {
    result.artifacts.push_back({name, stage_name, path, sha256_file(path)});
  };

  struct Inputs {
    Volume image;
    std::optional<LabelVolume> gt;
    std::optional<ScribbleSet> scribbles;
  };
  Inputs in = stage("load", [&] {
    if (!cfg.scribbles && !cfg.gt) throw Error(ErrorCode::InvalidConfig, "either scribbles or gt is required");
    for (const auto* p : {&cfg.image}) {
      if (!std::filesystem::exists(*p)) throw Error(ErrorCode::IoFailure, "missing input " + p->string());
    }
    Inputs loaded{read_volume(cfg.image), std::nullopt, std::nullopt};
    if (cfg.gt) {
      if (!std::filesystem::exists(*cfg.gt)) throw Error(ErrorCode::IoFailure, "missing input " + cfg.gt->string());
      loaded.gt = read_labels(*cfg.gt);
      require_same_shape(loaded.image.shape(), loaded.gt->shape(), "gt vs image");
    }
    if (cfg.scribbles) {
      if (!std::filesystem::exists(*cfg.scribbles)) throw Error(ErrorCode::IoFailure, "missing input " + cfg.scribbles->string());
      const NiftiImage raw = read_nifti(*cfg.scribbles);
      loaded.scribbles = ScribbleSet::from_label_volume(to_labels(raw, kUnannotated + 1));
      require_same_shape(loaded.image.shape(), loaded.scribbles->shape(), "scribbles vs image");
    }
    std::filesystem::create_directories(dir);
    return loaded;
  });

  const ScribbleSet scribbles = stage("scribbles", [&] {
    ScribbleSet s = in.scribbles ? *in.scribbles : simulate_scribbles(*in.gt, cfg.background_margin);
    write_nifti(to_nifti(s.to_label_volume(), NiftiDatatype::UInt8), dir / "scribbles.nii");
    record("scribbles", "scribbles", dir / "scribbles.nii");
    return s;
  });

  const SupervoxelMap sv = stage("slic", [&] {
    SlicParams params = cfg.slic;
    if (params.k <= 0) params.k = std::max<int>(1, static_cast<int>(in.image.size() / 1000));
    SupervoxelMap map = slic3d(in.image, params);
    write_volume(to_label_volume(map), dir / "supervoxels.nii");
    record("supervoxels", "slic", dir / "supervoxels.nii");
    return map;
  });

  const PseudoLabels pl = stage("propagate", [&] {
    PseudoLabels labels = propagate(scribbles, sv);
    write_volume(labels.mask, dir / "pseudo_mask.nii");
    write_volume(labels.confident, dir / "confidence.nii");
    record("pseudo_mask", "propagate", dir / "pseudo_mask.nii");
    record("confidence", "propagate", dir / "confidence.nii");
    return labels;
  });

  const BinaryVolume edges = stage("edges", [&] {
    BinaryVolume B = cfg.edges ? PrecomputedEdges(read_volume(*cfg.edges), cfg.edge_threshold).detect(in.image)
                               : static_boundary(in.image, cfg.edge_threshold);
    write_volume(B, dir / "edges.nii");
    record("edges", "edges", dir / "edges.nii");
    return B;
  });

  if (cfg.run_forward) {
    const NetworkOutputs net_out = stage("forward", [&] {
      NetConfig nc;
      nc.num_classes = pl.mask.num_classes();
      nc.base_filters = cfg.base_filters;
      nc.seed = cfg.seed;
      const Network net = build(nc);
      const Offset to_patch = center_offset(in.image.shape(), cfg.patch);
      const Volume patch = crop_or_pad(in.image, cfg.patch, to_patch);
      NetworkOutputs o = net.forward(patch);
      const Offset back{-to_patch.x, -to_patch.y, -to_patch.z};
      const Shape& s = in.image.shape();
      o.boundary = crop_channels(o.boundary, s, back, in.image.spacing());
      o.mask_init = crop_channels(o.mask_init, s, back, in.image.spacing());
      o.mask_final = crop_channels(o.mask_final, s, back, in.image.spacing());
      write_volume(o.boundary, dir / "boundary.nii");
      write_volume(o.mask_init, dir / "mask_init.nii");
      write_volume(o.mask_final, dir / "mask_final.nii");
      record("boundary", "forward", dir / "boundary.nii");
      record("mask_init", "forward", dir / "mask_init.nii");
      record("mask_final", "forward", dir / "mask_final.nii");
      return o;
    });
    stage("loss", [&] {
      const auto form = cfg.literal_boundary_loss ? BoundaryLossForm::Literal : BoundaryLossForm::TwoSided;
      const TotalLossReport r =
          total_loss(net_out.boundary, edges, net_out.mask_init, net_out.mask_final, pl, in.image, cfg.ab, cfg.weights, form);
      write_json(to_json(r, form), dir / "loss.json");
      record("loss_report", "loss", dir / "loss.json");
      return 0;
    });
  }

  if (in.gt) {
    stage("eval", [&] {
      write_json(to_json(evaluate(pl.mask, *in.gt)), dir / "eval.json");
      record("eval_report", "eval", dir / "eval.json");
      return 0;
    });
  }

  result.manifest = dir / "manifest.json";
  stage("manifest", [&] {
    json artifacts = json::array();
    for (const auto& a : result.artifacts) {
      artifacts.push_back({{"name", a.name}, {"stage", a.stage}, {"file", a.path.filename().string()}, {"sha256", a.sha256}});
    }
    json stages = json::array();
    for (const auto& a : result.artifacts) {
      if (stages.empty() || stages.back() != a.stage) stages.push_back(a.stage);
    }
    write_json({{"tool", "scribsup"}, {"config", to_json(cfg)}, {"stages", stages}, {"artifacts", artifacts}}, result.manifest);
    return 0;
  });
  return result;
}

}  // namespace scribsup
