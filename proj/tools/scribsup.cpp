// scribsup: scribble-supervision toolkit command line.

#include <CLI11.hpp>
#include <iostream>

#include "json.hpp"
#include "scribsup/losses.hpp"
#include "scribsup/metrics.hpp"
#include "scribsup/nifti.hpp"
#include "scribsup/pipeline.hpp"
#include "scribsup/propagation.hpp"
#include "scribsup/refnet.hpp"
#include "scribsup/scribble.hpp"
#include "scribsup/supervoxel.hpp"

namespace fs = std::filesystem;
using namespace scribsup;
using nlohmann::json;

namespace {

void run_slic(const fs::path& input, int k, double compactness, int iters, const fs::path& output) {
  const Volume vol = read_volume(input);
  SlicParams params{k > 0 ? k : std::max<int>(1, static_cast<int>(vol.size() / 1000)), compactness, iters, 0.0};
  const SupervoxelMap map = slic3d(vol, params);
  write_volume(to_label_volume(map), output);
  std::cout << "supervoxels: " << map.count << "\n";
}

void run_simulate(const fs::path& gt_path, int margin, const fs::path& output) {
  const LabelVolume gt = read_labels(gt_path);
  const ScribbleSet s = simulate_scribbles(gt, margin);
  write_nifti(to_nifti(s.to_label_volume(), NiftiDatatype::UInt8), output);
  std::cout << "scribble voxels: " << s.size() << "\n";
}

void run_propagate(const fs::path& scribbles, const fs::path& supervoxels, int classes, const fs::path& mask_out,
                   const fs::path& conf_out) {
  const ScribbleSet s = ScribbleSet::from_label_volume(read_labels(scribbles, kUnannotated + 1), classes);
  const SupervoxelMap sv = from_label_volume(read_labels(supervoxels));
  const PseudoLabels pl = propagate(s, sv);
  write_volume(pl.mask, mask_out);
  write_volume(pl.confident, conf_out);
}

void run_edges(const fs::path& input, double threshold, const fs::path& output, const fs::path& precomputed) {
  const Volume vol = read_volume(input);
  const BinaryVolume B = precomputed.empty() ? static_boundary(vol, threshold)
                                             : PrecomputedEdges(read_volume(precomputed), threshold).detect(vol);
  write_volume(B, output);
}

void run_forward(const fs::path& input, int classes, std::uint64_t seed, int base_filters, const std::string& prefix,
                 bool export_weights) {
  NetConfig cfg;
  cfg.num_classes = classes;
  cfg.seed = seed;
  cfg.base_filters = base_filters;
  const Network net = build(cfg);
  const Volume patch = read_volume(input);
  const NetworkOutputs out = net.forward(patch);
  write_volume(out.boundary, prefix + "_boundary.nii");
  write_volume(out.mask_init, prefix + "_mask_init.nii");
  write_volume(out.mask_final, prefix + "_mask_final.nii");
  json levels = json::array();
  for (std::size_t l = 0; l < out.level_shapes.size(); ++l) {
    const auto& s = out.level_shapes[l];
    const auto& sp = out.level_spacings[l];
    levels.push_back({{"shape", {s.nx, s.ny, s.nz}}, {"spacing", {sp.x, sp.y, sp.z}}});
  }
  write_json({{"input_shape", {patch.shape().nx, patch.shape().ny, patch.shape().nz}},
              {"num_classes", classes},
              {"base_filters", base_filters},
              {"seed", seed},
              {"parameters", net.count_params()},
              {"levels", levels},
              {"outputs", {{"boundary", 1}, {"mask_init", classes}, {"mask_final", classes}}}},
             prefix + "_summary.json");
  if (export_weights) net.export_weights(prefix + "_weights.bin", prefix + "_weights.json");
  std::cout << "parameters: " << net.count_params() << "\n";
}

struct LossArgs {
  fs::path pred_init, pred_final, boundary_pred, pseudo, conf, edges, image, report, grad_prefix;
  bool literal = false;
  double lambda1 = 1.0, lambda2 = 0.1, epsilon = 1e-6, beta1 = 0.3, beta2 = 0.3;
};

void run_loss(const LossArgs& a) {
  const ChannelVolume init = read_channels(a.pred_init);
  const ChannelVolume fin = read_channels(a.pred_final);
  const ChannelVolume b = read_channels(a.boundary_pred);
  const PseudoLabels pl{read_labels(a.pseudo, init.channels()), read_binary(a.conf)};
  const BinaryVolume B = read_binary(a.edges);
  const Volume v = read_volume(a.image);
  const auto form = a.literal ? BoundaryLossForm::Literal : BoundaryLossForm::TwoSided;
  const TotalLossReport r =
      total_loss(b, B, init, fin, pl, v, AbParams{a.lambda1, a.lambda2, a.epsilon}, TotalLossWeights{a.beta1, a.beta2}, form);
  const json doc = to_json(r, form);
  if (a.report.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    write_json(doc, a.report);
  }
  if (!a.grad_prefix.empty()) {
    write_volume(r.grad_boundary, a.grad_prefix.string() + "_grad_boundary.nii");
    write_volume(r.grad_init, a.grad_prefix.string() + "_grad_init.nii");
    write_volume(r.grad_final, a.grad_prefix.string() + "_grad_final.nii");
  }
}

void run_eval(const fs::path& pred, const fs::path& gt, const fs::path& report) {
  const json doc = to_json(evaluate(read_labels(pred), read_labels(gt)));
  if (report.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    write_json(doc, report);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scribsup - dense supervision from scribbles on anisotropic 3D volumes"};
  app.require_subcommand(1);

  fs::path input, output;
  int k = 0, iters = 10;
  double compactness = 10.0;
  auto* slic = app.add_subcommand("slic", "3D SLIC supervoxels (writes an int16 ID map)");
  slic->add_option("--input", input, "Input image (.nii)")->required();
  slic->add_option("--k", k, "Requested supervoxel count (default: voxels / 1000)");
  slic->add_option("--compactness", compactness, "Spatial weight m")->capture_default_str();
  slic->add_option("--iters", iters, "Lloyd iterations")->capture_default_str();
  slic->add_option("--output", output, "Output supervoxel map (.nii)")->required();

  fs::path gt;
  int margin = 10;
  auto* sim = app.add_subcommand("simulate-scribbles", "Synthetic scribbles from a dense mask (255 = unannotated)");
  sim->add_option("--gt", gt, "Ground-truth label volume")->required();
  sim->add_option("--margin", margin, "Background contour distance in voxels")->capture_default_str();
  sim->add_option("--output", output, "Output scribble volume")->required();

  fs::path scribbles, supervoxels, mask_out, conf_out;
  int classes = 0;
  auto* prop = app.add_subcommand("propagate", "Pseudo mask and confidence mask from scribbles and supervoxels");
  prop->add_option("--scribbles", scribbles, "Scribble volume (255 = unannotated)")->required();
  prop->add_option("--supervoxels", supervoxels, "Supervoxel ID map")->required();
  prop->add_option("--classes", classes, "Class count N (default: inferred from scribbles)");
  prop->add_option("--output-mask", mask_out, "Pseudo mask output")->required();
  prop->add_option("--output-conf", conf_out, "Confidence mask output")->required();

  double threshold = 0.2;
  fs::path precomputed;
  auto* edges = app.add_subcommand("edges", "Static boundary by stacking per-slice edges");
  edges->add_option("--input", input, "Input image")->required();
  edges->add_option("--threshold", threshold, "Edge threshold in (0,1)")->capture_default_str();
  edges->add_option("--output", output, "Binary edge volume")->required();
  edges->add_option("--edges", precomputed, "Precomputed edge map to binarise instead");

  std::uint64_t seed = 7;
  int base_filters = 8;
  std::string prefix;
  bool export_weights = false;
  auto* fwd = app.add_subcommand("forward", "Reference network forward pass");
  fwd->add_option("--input", input, "Input patch")->required();
  fwd->add_option("--classes", classes, "Class count N")->required();
  fwd->add_option("--seed", seed, "Weight seed")->capture_default_str();
  fwd->add_option("--base-filters", base_filters, "Filters at the top level")->capture_default_str();
  fwd->add_option("--out-prefix", prefix, "Output prefix")->required();
  fwd->add_flag("--export-weights", export_weights, "Also write <prefix>_weights.bin/.json");

  LossArgs la;
  auto* loss = app.add_subcommand("loss", "Total loss breakdown for given predictions");
  loss->add_option("--pred-init", la.pred_init, "Initial mask probabilities")->required();
  loss->add_option("--pred-final", la.pred_final, "Final mask probabilities")->required();
  loss->add_option("--boundary-pred", la.boundary_pred, "Predicted boundary map")->required();
  loss->add_option("--pseudo", la.pseudo, "Pseudo mask")->required();
  loss->add_option("--conf", la.conf, "Confidence mask")->required();
  loss->add_option("--edges", la.edges, "Static boundary")->required();
  loss->add_option("--image", la.image, "Input image")->required();
  loss->add_option("--report", la.report, "JSON report path (default: stdout)");
  loss->add_option("--grad-prefix", la.grad_prefix, "Write gradient volumes with this prefix");
  loss->add_flag("--literal-bry", la.literal, "Use the one-sided boundary cross-entropy");
  loss->add_option("--lambda1", la.lambda1, "Inside-region weight")->capture_default_str();
  loss->add_option("--lambda2", la.lambda2, "Outside-region weight")->capture_default_str();
  loss->add_option("--epsilon", la.epsilon, "Gradient-norm smoothing")->capture_default_str();
  loss->add_option("--beta1", la.beta1, "Boundary loss weight")->capture_default_str();
  loss->add_option("--beta2", la.beta2, "Active boundary loss weight")->capture_default_str();

  fs::path pred, report;
  auto* eval = app.add_subcommand("eval", "Dice, HD95 (mm) and precision per class");
  eval->add_option("--pred", pred, "Predicted labels")->required();
  eval->add_option("--gt", gt, "Ground-truth labels")->required();
  eval->add_option("--report", report, "JSON report path (default: stdout)");

  fs::path config;
  auto* pipe = app.add_subcommand("pipeline", "Run every stage from a JSON config");
  pipe->add_option("--config", config, "Pipeline config (JSON)")->required();

  fs::path image_out, gt_out;
  auto* phantom = app.add_subcommand("phantom", "Write the synthetic nested-sphere phantom");
  phantom->add_option("--output-image", image_out, "Image output")->required();
  phantom->add_option("--output-gt", gt_out, "Label output")->required();
  phantom->add_option("--seed", seed, "Noise seed")->capture_default_str();
  std::vector<int> phantom_shape{48, 48, 12};
  phantom->add_option("--shape", phantom_shape, "Grid size x y z")->expected(3)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  std::string stage_name = app.get_subcommands().front()->get_name();
  try {
    if (*slic) run_slic(input, k, compactness, iters, output);
    if (*sim) run_simulate(gt, margin, output);
    if (*prop) run_propagate(scribbles, supervoxels, classes, mask_out, conf_out);
    if (*edges) run_edges(input, threshold, output, precomputed);
    if (*fwd) run_forward(input, classes, seed, base_filters, prefix, export_weights);
    if (*loss) run_loss(la);
    if (*eval) run_eval(pred, gt, report);
    if (*pipe) {
      const PipelineResult r = run_pipeline(load_pipeline_config(config));
      std::cout << "manifest: " << r.manifest.string() << " (" << r.artifacts.size() << " artifacts)\n";
    }
    if (*phantom) {
      const Phantom p = make_sphere_phantom({phantom_shape[0], phantom_shape[1], phantom_shape[2]}, {1.0, 1.0, 4.0}, seed);
      write_volume(p.image, image_out);
      write_volume(p.gt, gt_out);
    }
  } catch (const StageError& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error [" << stage_name << "]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
