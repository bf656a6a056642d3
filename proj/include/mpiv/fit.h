#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mpiv/geometry.h"
#include "mpiv/image.h"
#include "mpiv/metrics.h"
#include "mpiv/mpi.h"
#include "mpiv/psv.h"
#include "mpiv/render.h"

namespace mpiv {

enum class LossKind { kL1 };

struct FitConfig {
  ColorVariant variant = ColorVariant::kBgBlend;
  int steps = 2000;
  double learning_rate = 0.0002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  LossKind loss = LossKind::kL1;
  std::uint64_t seed = 0;
  int log_every = 100;
  // Weight of an image-gradient difference term; 0 keeps the plain pixel loss.
  double gradient_loss_weight = 0.0;
  // Seed alpha logits from plane-sweep agreement instead of a flat constant.
  bool psv_alpha_init = false;

  void validate() const {
    detail::require(steps >= 1, "fit config: steps must be >= 1");
    detail::require(learning_rate > 0, "fit config: learning rate must be positive");
    detail::require(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1,
                    "fit config: betas must lie in [0,1)");
    detail::require(epsilon > 0, "fit config: epsilon must be positive");
    detail::require(gradient_loss_weight >= 0, "fit config: gradient loss weight must be >= 0");
  }
};

/// Applies `key=value` lines to a config. Unknown keys are an error; blank
/// lines and #-comments are skipped.
FitConfig parse_fit_config(const std::string& text, FitConfig base = {});
std::string serialize_fit_config(const FitConfig& config);

struct ViewScore {
  std::string name;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct FitReport {
  std::vector<double> loss_curve;  // one entry per step
  std::vector<ViewScore> views;    // final render quality per target view
  double wall_seconds = 0.0;
};

template <typename T>
struct LossGrad {
  T loss = 0;
  Image3<T> grad;
};

/// Mean absolute difference with subgradient sign(pred-truth)/N, sign(0)=0.
/// With a mask, only true pixels contribute and N counts them.
template <typename T>
LossGrad<T> l1_loss(const Image3<T>& pred, const Image3<T>& truth,
                    const MaskXb* mask = nullptr) {
  detail::require(same_size(pred, truth), "l1_loss: shape mismatch");
  if (mask)
    detail::require(mask->rows() == pred.height() && mask->cols() == pred.width(),
                    "l1_loss: mask shape mismatch");
  LossGrad<T> out;
  out.grad = Image3<T>(pred.height(), pred.width());
  long n = 0;
  if (mask) {
    n = 3 * mask->template cast<long>().sum();
  } else {
    n = 3 * pred.height() * pred.width();
  }
  if (n == 0) return out;
  double total = 0.0;
  const T inv_n = T(1) / T(n);
  for (int k = 0; k < 3; ++k) {
    Channel<T> diff = pred.ch[k] - truth.ch[k];
    if (mask) diff = mask->select(diff, Channel<T>::Zero(diff.rows(), diff.cols()));
    total += diff.abs().template cast<double>().sum();
    out.grad.ch[k] = diff.sign() * inv_n;
  }
  out.loss = T(total / double(n));
  return out;
}

/// L1 distance between horizontal and vertical forward differences of the two
/// images. A light structural term; not part of the plain pixel objective.
template <typename T>
LossGrad<T> gradient_difference_loss(const Image3<T>& pred, const Image3<T>& truth) {
  detail::require(same_size(pred, truth), "gradient_difference_loss: shape mismatch");
  const Eigen::Index h = pred.height(), w = pred.width();
  LossGrad<T> out;
  out.grad = Image3<T>(h, w);
  const long n_x = 3 * h * std::max<Eigen::Index>(w - 1, 0);
  const long n_y = 3 * std::max<Eigen::Index>(h - 1, 0) * w;
  if (n_x == 0 && n_y == 0) return out;
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (w >= 2) {
      Channel<T> gx = (pred.ch[k].rightCols(w - 1) - pred.ch[k].leftCols(w - 1)) -
                      (truth.ch[k].rightCols(w - 1) - truth.ch[k].leftCols(w - 1));
      total += gx.abs().template cast<double>().sum() / double(n_x);
      Channel<T> s = gx.sign() * (T(1) / T(n_x));
      out.grad.ch[k].rightCols(w - 1) += s;
      out.grad.ch[k].leftCols(w - 1) -= s;
    }
    if (h >= 2) {
      Channel<T> gy = (pred.ch[k].bottomRows(h - 1) - pred.ch[k].topRows(h - 1)) -
                      (truth.ch[k].bottomRows(h - 1) - truth.ch[k].topRows(h - 1));
      total += gy.abs().template cast<double>().sum() / double(n_y);
      Channel<T> s = gy.sign() * (T(1) / T(n_y));
      out.grad.ch[k].bottomRows(h - 1) += s;
      out.grad.ch[k].topRows(h - 1) -= s;
    }
  }
  out.loss = T(total);
  return out;
}

/// First and second moment estimates, one pair per parameter block.
template <typename T>
struct AdamState {
  std::vector<Channel<T>> m;
  std::vector<Channel<T>> v;
  long step = 0;
};

template <typename T>
AdamState<T> make_adam_state(MpiParams<T>& params) {
  AdamState<T> state;
  params.for_each_block([&](Channel<T>& block) {
    state.m.push_back(Channel<T>::Zero(block.rows(), block.cols()));
    state.v.push_back(Channel<T>::Zero(block.rows(), block.cols()));
  });
  return state;
}

/// One bias-corrected adaptive-moment update over every parameter block.
template <typename T>
void adam_step(MpiParams<T>& params, MpiParams<T>& grads, AdamState<T>& state,
               const FitConfig& config) {
  std::vector<Channel<T>*> param_blocks, grad_blocks;
  params.for_each_block([&](Channel<T>& b) { param_blocks.push_back(&b); });
  grads.for_each_block([&](Channel<T>& b) { grad_blocks.push_back(&b); });
  detail::require(param_blocks.size() == grad_blocks.size() &&
                      param_blocks.size() == state.m.size(),
                  "adam_step: parameter/gradient/state layout mismatch");

  state.step += 1;
  const T b1 = T(config.beta1), b2 = T(config.beta2);
  const T correction1 = T(1) - std::pow(b1, T(state.step));
  const T correction2 = T(1) - std::pow(b2, T(state.step));
  const T lr = T(config.learning_rate);
  const T eps = T(config.epsilon);

  for (std::size_t i = 0; i < param_blocks.size(); ++i) {
    const Channel<T>& g = *grad_blocks[i];
    if (!g.allFinite()) throw NumericError("adam_step: nonfinite gradient");
    state.m[i] = b1 * state.m[i] + (T(1) - b1) * g;
    state.v[i] = b2 * state.v[i] + (T(1) - b2) * g.square();
    *param_blocks[i] -=
        lr * (state.m[i] / correction1) / ((state.v[i] / correction2).sqrt() + eps);
  }
}

template <typename T>
struct FitTarget {
  Image3<T> image;
  Camera camera;
  std::string name;
};

template <typename T>
struct FitResult {
  MultiplaneImage<T> mpi;
  MpiParams<T> params;
  FitReport report;
};

/// Fits MPI parameters to the given target views by full-image gradient
/// descent; the reference frame is cam1. Deterministic for a fixed config.
/// Throws NumericError (with the step index) if the loss leaves the finite
/// range.
template <typename T>
FitResult<T> fit_mpi(const Image3<T>& image1, const Image3<T>& image2, const Camera& cam1,
                     const Camera& cam2, const std::vector<FitTarget<T>>& targets,
                     const DepthPlanes& depth_planes, const FitConfig& config,
                     const std::function<void(int, double)>& progress = {}) {
  config.validate();
  detail::require(!targets.empty(), "fit_mpi: need at least one target view");
  detail::require(image1.height() == cam1.intrinsics.height &&
                      image1.width() == cam1.intrinsics.width,
                  "fit_mpi: reference image does not match camera resolution");
  const auto start = std::chrono::steady_clock::now();

  MpiParams<T> params = make_mpi_params(config.variant, depth_planes.count(), image1);
  if (config.psv_alpha_init) {
    const PlaneSweepVolume<T> psv = build_psv(image2, cam2, cam1, depth_planes);
    params.alpha_logits = alpha_logits_from_agreement(psv_agreement_map(image1, psv));
  }
  AdamState<T> state = make_adam_state(params);

  const T target_weight = T(1) / T(targets.size());
  FitResult<T> result;
  result.report.loss_curve.reserve(config.steps);

  for (int step = 0; step < config.steps; ++step) {
    const MultiplaneImage<T> mpi = realize(params, image1, depth_planes, cam1);
    std::vector<Image3<T>> d_color(mpi.plane_count(),
                                   Image3<T>(image1.height(), image1.width()));
    std::vector<Channel<T>> d_alpha(
        mpi.plane_count(), Channel<T>::Zero(image1.height(), image1.width()));

    double step_loss = 0.0;
    for (const FitTarget<T>& target : targets) {
      RenderResult<T> rendered = render_view(mpi, target.camera);
      LossGrad<T> lg = l1_loss(rendered.image, target.image);
      if (config.gradient_loss_weight > 0) {
        LossGrad<T> gd = gradient_difference_loss(rendered.image, target.image);
        lg.loss += T(config.gradient_loss_weight) * gd.loss;
        for (int k = 0; k < 3; ++k)
          lg.grad.ch[k] += T(config.gradient_loss_weight) * gd.grad.ch[k];
      }
      step_loss += double(lg.loss) * double(target_weight);
      for (int k = 0; k < 3; ++k) lg.grad.ch[k] *= target_weight;
      RenderGradients<T> rg = render_backward(mpi, rendered, lg.grad);
      for (int d = 0; d < mpi.plane_count(); ++d) {
        for (int k = 0; k < 3; ++k) d_color[d].ch[k] += rg.d_color[d].ch[k];
        d_alpha[d] += rg.d_alpha[d];
      }
    }
    if (!std::isfinite(step_loss))
      throw NumericError("fit_mpi: nonfinite loss at step " + std::to_string(step));
    result.report.loss_curve.push_back(step_loss);
    if (progress && config.log_every > 0 &&
        (step % config.log_every == 0 || step + 1 == config.steps))
      progress(step, step_loss);

    MpiParams<T> grads = realize_backward(params, image1, d_color, d_alpha);
    adam_step(params, grads, state, config);
  }

  result.mpi = realize(params, image1, depth_planes, cam1);
  result.params = std::move(params);
  for (const FitTarget<T>& target : targets) {
    const RenderResult<T> rendered = render_view(result.mpi, target.camera);
    ViewScore score;
    score.name = target.name;
    score.psnr = psnr(rendered.image, target.image);
    score.ssim = (image1.height() >= 11 && image1.width() >= 11)
                     ? ssim(rendered.image, target.image)
                     : std::numeric_limits<double>::quiet_NaN();
    result.report.views.push_back(score);
  }
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace mpiv
