#pragma once

#include "scribsup/propagation.hpp"
#include "scribsup/volume.hpp"

namespace scribsup {

/// Loss value plus the gradient w.r.t. the prediction it was given.
struct LossReport {
  double value = 0.0;
  ChannelVolume grad;
};

/// Probabilities are clamped to [kProbFloor, 1 - kProbFloor] before taking logs.
inline constexpr double kProbFloor = 1e-7;

enum class BoundaryLossForm {
  /// -(1/V) sum [B log b + (1-B) log(1-b)]
  TwoSided,
  /// -(1/V) sum B log b (the one-sided form; minimised by b == 1)
  Literal,
};

/// Cross-entropy between the single-channel boundary map b and the static
/// boundary B, averaged over voxels.
LossReport boundary_loss(const ChannelVolume& b, const BinaryVolume& B,
                         BoundaryLossForm form = BoundaryLossForm::TwoSided);

/// Partial cross-entropy: mean of -log p(x, mask(x)) over confident voxels.
/// Gradient is exactly zero on non-confident voxels. Throws
/// NoConfidentVoxels when the confidence mask is empty.
LossReport partial_ce(const ChannelVolume& probs, const PseudoLabels& pl);

struct AbParams {
  double lambda1 = 1.0;
  double lambda2 = 0.1;
  double epsilon = 1e-6;
};

/// Per-class pieces of the active boundary loss.
struct AbTerms {
  double surface = 0.0;
  double volume_in = 0.0;
  double volume_out = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

struct AbReport {
  LossReport loss;
  std::vector<AbTerms> per_class;  // index 0 (background) left at zero
};

/// 3D active boundary loss summed over foreground channels:
///   sum_x sqrt(|grad u|^2 + eps) * dV + l1 * sum (c1 - v)^2 u dV + l2 * sum (c2 - v)^2 (1 - u) dV
/// with forward differences scaled by spacing (zero flux at the far face),
/// v min-max normalised, and c1/c2 the soft inside/outside means of v.
/// The gradient holds c1 and c2 fixed.
AbReport active_boundary_loss_terms(const ChannelVolume& probs, const Volume& v, const AbParams& params = {});
LossReport active_boundary_loss(const ChannelVolume& probs, const Volume& v, const AbParams& params = {});

struct TotalLossWeights {
  double beta1 = 0.3;
  double beta2 = 0.3;
};

struct TotalLossReport {
  double value = 0.0;
  double l_bry = 0.0;
  double l_seg_init = 0.0;
  double l_seg_final = 0.0;
  double l_ab = 0.0;
  TotalLossWeights weights;
  AbParams ab;
  ChannelVolume grad_boundary;
  ChannelVolume grad_init;
  ChannelVolume grad_final;
};

/// beta1 * L_bry(b, B) + L_seg(init) + L_seg(final) + beta2 * L_AB(final, v).
TotalLossReport total_loss(const ChannelVolume& b, const BinaryVolume& B, const ChannelVolume& probs_init,
                           const ChannelVolume& probs_final, const PseudoLabels& pl, const Volume& v,
                           const AbParams& ab = {}, const TotalLossWeights& w = {},
                           BoundaryLossForm form = BoundaryLossForm::TwoSided);

}  // namespace scribsup
