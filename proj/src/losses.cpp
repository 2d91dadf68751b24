#include "scribsup/losses.hpp"

#include <algorithm>
#include <cmath>

namespace scribsup {

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

bool inside_clamp(double p) { return p > kProbFloor && p < 1.0 - kProbFloor; }

}  // namespace

LossReport boundary_loss(const ChannelVolume& b, const BinaryVolume& B, BoundaryLossForm form) {
  if (b.channels() != 1) throw Error(ErrorCode::ShapeMismatch, "boundary map must have one channel");
  require_same_shape(b.shape(), B.shape(), "boundary_loss");

  const std::size_t n = b.voxels();
  const double inv_n = 1.0 / static_cast<double>(n);
  LossReport out{0.0, ChannelVolume(b.shape(), b.spacing(), 1)};
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double raw = b.at(0, i);
    const double p = clamp_prob(raw);
    const bool edge = B[i] != 0;
    double term, dterm;
    if (form == BoundaryLossForm::Literal) {
      term = edge ? std::log(p) : 0.0;
      dterm = edge ? 1.0 / p : 0.0;
    } else {
      term = edge ? std::log(p) : std::log(1.0 - p);
      dterm = edge ? 1.0 / p : -1.0 / (1.0 - p);
    }
    sum += term;
    out.grad.at(0, i) = inside_clamp(raw) ? -dterm * inv_n : 0.0;
  }
  out.value = -sum * inv_n;
  return out;
}

LossReport partial_ce(const ChannelVolume& probs, const PseudoLabels& pl) {
  require_same_shape(probs.shape(), pl.mask.shape(), "partial_ce mask");
  require_same_shape(probs.shape(), pl.confident.shape(), "partial_ce confidence");
  if (probs.channels() != pl.mask.num_classes()) {
    throw Error(ErrorCode::ShapeMismatch, "probability channels (" + std::to_string(probs.channels()) +
                                              ") differ from class count (" +
                                              std::to_string(pl.mask.num_classes()) + ")");
  }

  std::size_t confident = 0;
  for (auto c : pl.confident.data()) confident += c != 0;
  if (confident == 0) throw Error(ErrorCode::NoConfidentVoxels, "confidence mask is empty");

  const double inv_c = 1.0 / static_cast<double>(confident);
  LossReport out{0.0, ChannelVolume(probs.shape(), probs.spacing(), probs.channels())};
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.voxels(); ++i) {
    if (!pl.confident[i]) continue;
    const int c = pl.mask[i];
    const double raw = probs.at(c, i);
    const double p = std::max(raw, kProbFloor);
    sum += std::log(p);
    out.grad.at(c, i) = raw > kProbFloor ? -inv_c / p : 0.0;
  }
  out.value = -sum * inv_c;
  return out;
}

AbReport active_boundary_loss_terms(const ChannelVolume& probs, const Volume& v, const AbParams& params) {
  require_same_shape(probs.shape(), v.shape(), "active_boundary_loss");
  if (params.lambda1 < 0.0 || params.lambda2 < 0.0 || params.epsilon < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "AB loss weights and epsilon must be non-negative");
  }
  const Shape& s = probs.shape();
  const Spacing& sp = probs.spacing();
  const double omega = sp.voxel_volume();
  const std::size_t n = s.voxels();
  const std::vector<double> img = normalized_intensities(v);

  AbReport out{{0.0, ChannelVolume(s, sp, probs.channels())}, std::vector<AbTerms>(static_cast<std::size_t>(probs.channels()))};
  const std::size_t stride[3] = {1, static_cast<std::size_t>(s.nx), s.slice_voxels()};
  const double inv_h[3] = {1.0 / sp.x, 1.0 / sp.y, 1.0 / sp.z};
  std::vector<double> q[3] = {std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};

  for (int c = 1; c < probs.channels(); ++c) {
    const auto u = probs.channel(c);
    auto grad = out.loss.grad.channel(c);
    AbTerms& t = out.per_class[static_cast<std::size_t>(c)];

    // Surface: forward differences, zero at the far face of each axis.
    for (std::size_t i = 0; i < n; ++i) {
      const auto xyz = s.coords(i);
      double d[3];
      double norm2 = params.epsilon;
      for (int a = 0; a < 3; ++a) {
        d[a] = xyz[static_cast<std::size_t>(a)] + 1 < s[a] ? (u[i + stride[a]] - u[i]) * inv_h[a] : 0.0;
        norm2 += d[a] * d[a];
      }
      const double norm = std::sqrt(norm2);
      t.surface += norm * omega;
      for (int a = 0; a < 3; ++a) q[a][i] = norm > 0.0 ? d[a] / norm : 0.0;
    }
    // Adjoint of the forward difference: each q_a(x) pushes -1/h onto x and
    // +1/h onto x + e_a.
    for (std::size_t i = 0; i < n; ++i) {
      const auto xyz = s.coords(i);
      double g = 0.0;
      for (int a = 0; a < 3; ++a) {
        g -= q[a][i] * inv_h[a];
        if (xyz[static_cast<std::size_t>(a)] > 0) g += q[a][i - stride[a]] * inv_h[a];
      }
      grad[i] = g * omega;
    }

    double mass_in = 0.0, mass_out = 0.0, sum_in = 0.0, sum_out = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mass_in += u[i];
      mass_out += 1.0 - u[i];
      sum_in += u[i] * img[i];
      sum_out += (1.0 - u[i]) * img[i];
    }
    t.c1 = sum_in / std::max(mass_in, 1e-8);
    t.c2 = sum_out / std::max(mass_out, 1e-8);

    for (std::size_t i = 0; i < n; ++i) {
      const double din = (t.c1 - img[i]) * (t.c1 - img[i]);
      const double dout = (t.c2 - img[i]) * (t.c2 - img[i]);
      t.volume_in += din * u[i] * omega;
      t.volume_out += dout * (1.0 - u[i]) * omega;
      grad[i] += (params.lambda1 * din - params.lambda2 * dout) * omega;
    }
    out.loss.value += t.surface + params.lambda1 * t.volume_in + params.lambda2 * t.volume_out;
  }
  return out;
}

LossReport active_boundary_loss(const ChannelVolume& probs, const Volume& v, const AbParams& params) {
  return std::move(active_boundary_loss_terms(probs, v, params).loss);
}

TotalLossReport total_loss(const ChannelVolume& b, const BinaryVolume& B, const ChannelVolume& probs_init,
                           const ChannelVolume& probs_final, const PseudoLabels& pl, const Volume& v,
                           const AbParams& ab, const TotalLossWeights& w, BoundaryLossForm form) {
  if (w.beta1 < 0.0 || w.beta2 < 0.0) throw Error(ErrorCode::InvalidArgument, "loss weights must be non-negative");
  if (probs_init.channels() != probs_final.channels()) {
    throw Error(ErrorCode::ShapeMismatch, "initial and final predictions differ in channel count");
  }
  const LossReport bry = boundary_loss(b, B, form);
  const LossReport seg_init = partial_ce(probs_init, pl);
  const LossReport seg_final = partial_ce(probs_final, pl);
  const LossReport abl = active_boundary_loss(probs_final, v, ab);

  TotalLossReport out;
  out.l_bry = bry.value;
  out.l_seg_init = seg_init.value;
  out.l_seg_final = seg_final.value;
  out.l_ab = abl.value;
  out.weights = w;
  out.ab = ab;
  out.value = w.beta1 * bry.value + seg_init.value + seg_final.value + w.beta2 * abl.value;

  out.grad_boundary = bry.grad;
  for (auto& g : out.grad_boundary.data()) g *= w.beta1;
  out.grad_init = seg_init.grad;
  out.grad_final = seg_final.grad;
  auto gf = out.grad_final.data();
  const auto ga = abl.grad.data();
  for (std::size_t i = 0; i < gf.size(); ++i) gf[i] += w.beta2 * ga[i];
  return out;
}

}  // namespace scribsup
