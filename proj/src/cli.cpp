#include "mpiv/cli.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "mpiv/dataset.h"
#include "mpiv/fit.h"
#include "mpiv/image_io.h"
#include "mpiv/io_util.h"
#include "mpiv/metrics.h"
#include "mpiv/mpi_io.h"
#include "mpiv/selfcheck.h"

namespace mpiv {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kMaxWidth = 1024;
constexpr int kMaxHeight = 576;

json finite_or_inf(double value) {
  if (std::isnan(value)) return nullptr;
  if (std::isinf(value)) return "inf";
  return value;
}

struct StereoInputs {
  Image3f left, right;
  Camera cam_left, cam_right;
};

// Intrinsics follow the actual image when it differs from the camera-file
// resolution; inputs beyond the resolution cap are downscaled.
StereoInputs load_stereo(const std::string& left_path, const std::string& right_path,
                         const std::string& cameras_path) {
  const PosedSequence seq = load_sequence(cameras_path);
  detail::require(seq.frame_count() >= 2,
                  "camera file needs at least two frames: " + cameras_path);
  StereoInputs in;
  in.left = read_image(left_path);
  in.right = read_image(right_path);
  in.cam_left = seq.frames[0].camera;
  in.cam_right = seq.frames[1].camera;

  const auto fit_camera = [](Camera& cam, Image3f& img, const std::string& name) {
    if (img.height() != cam.intrinsics.height || img.width() != cam.intrinsics.width) {
      std::cerr << "note: " << name << " image is " << img.width() << "x" << img.height()
                << ", rescaling intrinsics\n";
      cam.intrinsics = cam.intrinsics.scaled(int(img.width()), int(img.height()));
    }
    if (img.width() > kMaxWidth || img.height() > kMaxHeight) {
      const double s = std::min(double(kMaxWidth) / double(img.width()),
                                double(kMaxHeight) / double(img.height()));
      const int w = std::max(1, int(std::lround(s * double(img.width()))));
      const int h = std::max(1, int(std::lround(s * double(img.height()))));
      std::cerr << "warning: " << name << " exceeds " << kMaxWidth << "x" << kMaxHeight
                << ", downscaling to " << w << "x" << h << "\n";
      img = resize_bilinear(img, h, w);
      cam.intrinsics = cam.intrinsics.scaled(w, h);
    }
  };
  fit_camera(in.cam_left, in.left, "left");
  fit_camera(in.cam_right, in.right, "right");
  return in;
}

json report_to_json(const FitReport& report, const FitConfig& config) {
  json views = json::array();
  for (const ViewScore& view : report.views)
    views.push_back({{"view", view.name},
                     {"psnr", finite_or_inf(view.psnr)},
                     {"ssim", finite_or_inf(view.ssim)}});
  return json{{"variant", to_string(config.variant)},
              {"steps", config.steps},
              {"learning_rate", config.learning_rate},
              {"seed", config.seed},
              {"loss_first", report.loss_curve.front()},
              {"loss_final", report.loss_curve.back()},
              {"loss_curve", report.loss_curve},
              {"views", views},
              {"wall_seconds", report.wall_seconds}};
}

void write_fit_report(const std::string& dir, const FitReport& report,
                      const FitConfig& config) {
  atomic_write_text((fs::path(dir) / "report.json").string(),
                    report_to_json(report, config).dump(2) + "\n");
  std::ostringstream text;
  for (std::size_t i = 0; i < report.loss_curve.size(); ++i)
    if (config.log_every > 0 &&
        (i % std::size_t(config.log_every) == 0 || i + 1 == report.loss_curve.size()))
      text << "step " << i << " loss " << report.loss_curve[i] << "\n";
  for (const ViewScore& view : report.views)
    text << "view " << view.name << " psnr " << view.psnr << " ssim " << view.ssim << "\n";
  text << "wall_seconds " << report.wall_seconds << "\n";
  atomic_write_text((fs::path(dir) / "report.txt").string(), text.str());
}

struct FitFlags {
  std::string left, right, cameras, out, config_path;
  std::string variant = "bg-blend";
  int planes = 32;
  double near = 1.0;
  double far = 100.0;
  int steps = 2000;
  double lr = 0.0002;
  std::uint64_t seed = 0;
  int log_every = 100;
  double grad_weight = 0.0;
  bool psv_init = false;
};

void add_fit_flags(CLI::App* cmd, FitFlags& flags, bool with_variant = true) {
  cmd->add_option("--left", flags.left, "left/reference image")->required();
  cmd->add_option("--right", flags.right, "right image")->required();
  cmd->add_option("--cameras", flags.cameras, "two-frame camera sequence file")->required();
  cmd->add_option("--out", flags.out, "output directory")->required();
  cmd->add_option("--planes", flags.planes, "number of depth planes");
  cmd->add_option("--near", flags.near, "near plane depth (m)");
  cmd->add_option("--far", flags.far, "far plane depth (m)");
  if (with_variant)
    cmd->add_option("--variant", flags.variant,
                    "color variant: none|single|bg-blend|fg-bg-blend|all-images, or 'all' to sweep");
  cmd->add_option("--steps", flags.steps, "optimization steps");
  cmd->add_option("--lr", flags.lr, "learning rate");
  cmd->add_option("--seed", flags.seed, "random seed");
  cmd->add_option("--log-every", flags.log_every, "loss log interval");
  cmd->add_option("--grad-weight", flags.grad_weight, "image-gradient loss weight");
  cmd->add_flag("--psv-init", flags.psv_init, "seed alphas from plane-sweep agreement");
  cmd->add_option("--config", flags.config_path, "key=value fit configuration file");
}

FitConfig config_from_flags(const FitFlags& flags, CLI::App* cmd, ColorVariant variant) {
  FitConfig config;
  if (!flags.config_path.empty())
    config = parse_fit_config(read_text_file(flags.config_path));
  const auto set_if = [&](const char* name, auto setter) {
    if (cmd->count(name)) setter();
  };
  set_if("--steps", [&] { config.steps = flags.steps; });
  set_if("--lr", [&] { config.learning_rate = flags.lr; });
  set_if("--seed", [&] { config.seed = flags.seed; });
  set_if("--log-every", [&] { config.log_every = flags.log_every; });
  set_if("--grad-weight", [&] { config.gradient_loss_weight = flags.grad_weight; });
  if (flags.psv_init) config.psv_alpha_init = true;
  config.variant = variant;
  config.validate();
  return config;
}

FitResult<float> run_fit(const StereoInputs& in, const DepthPlanes& planes,
                         const FitConfig& config, const std::string& out_dir) {
  std::vector<FitTarget<float>> targets{{in.left, in.cam_left, "left"},
                                        {in.right, in.cam_right, "right"}};
  FitResult<float> result =
      fit_mpi(in.left, in.right, in.cam_left, in.cam_right, targets, planes, config,
              [](int step, double loss) {
                std::cerr << "step " << step << " loss " << loss << "\n";
              });
  save_mpi(result.mpi, out_dir);
  write_fit_report(out_dir, result.report, config);
  return result;
}

int cmd_fit(const FitFlags& flags, CLI::App* cmd) {
  const StereoInputs in = load_stereo(flags.left, flags.right, flags.cameras);
  const DepthPlanes planes = make_depth_planes(flags.near, flags.far, flags.planes);

  std::vector<ColorVariant> variants;
  if (flags.variant == "all") {
    variants = all_color_variants();
  } else {
    variants = {parse_color_variant(flags.variant)};
  }

  for (ColorVariant variant : variants) {
    const FitConfig config = config_from_flags(flags, cmd, variant);
    const std::string out_dir =
        variants.size() == 1
            ? flags.out
            : (fs::path(flags.out) / (std::string("variant-") + to_string(variant))).string();
    const FitResult<float> result = run_fit(in, planes, config, out_dir);
    std::cout << "fit " << to_string(variant) << " final loss "
              << result.report.loss_curve.back() << " -> " << out_dir << "\n";
  }
  return 0;
}

int cmd_render(const std::string& mpi_dir, const std::string& cameras_path,
               const std::string& out_dir) {
  const MultiplaneImage<float> mpi = load_mpi(mpi_dir);
  const PosedSequence seq = load_sequence(cameras_path);
  fs::create_directories(out_dir);
  for (const SequenceFrame& frame : seq.frames) {
    const RenderResult<float> result = render_view(mpi, frame.camera);
    write_image((fs::path(out_dir) / (frame.id + ".png")).string(), clamp01(result.image));
  }
  std::cout << "rendered " << seq.frame_count() << " views -> " << out_dir << "\n";
  return 0;
}

Eigen::Vector3d parse_vec3(const std::string& s) {
  Eigen::Vector3d v;
  char comma1 = 0, comma2 = 0;
  std::istringstream in(s);
  if (!(in >> v.x() >> comma1 >> v.y() >> comma2 >> v.z()) || comma1 != ',' || comma2 != ',')
    throw std::invalid_argument("expected 'x,y,z', got '" + s + "'");
  std::string rest;
  if (in >> rest) throw std::invalid_argument("trailing junk in '" + s + "'");
  return v;
}

int cmd_sweep(const std::string& mpi_dir, const std::string& path_spec, int frames,
              const std::string& out_dir) {
  detail::require(frames >= 2, "sweep: need at least 2 frames");
  const auto colon = path_spec.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("sweep: path spec must be 'x0,y0,z0:x1,y1,z1'");
  const Eigen::Vector3d p0 = parse_vec3(path_spec.substr(0, colon));
  const Eigen::Vector3d p1 = parse_vec3(path_spec.substr(colon + 1));

  const MultiplaneImage<float> mpi = load_mpi(mpi_dir);
  fs::create_directories(out_dir);
  double alpha_sum = 0.0;
  for (int i = 0; i < frames; ++i) {
    const double t = double(i) / double(frames - 1);
    Camera cam = mpi.ref_camera;
    cam.world_from_camera.translation = p0 + t * (p1 - p0);
    const RenderResult<float> result = render_view(mpi, cam);
    alpha_sum += double(result.accum_alpha.mean());
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04d.png", i);
    write_image((fs::path(out_dir) / name).string(), clamp01(result.image));
  }
  const double mean_alpha = alpha_sum / frames;
  if (mean_alpha < 1e-3)
    std::cerr << "warning: accumulated alpha is " << mean_alpha
              << "; the MPI is transparent along this path\n";
  std::cout << "swept " << frames << " views -> " << out_dir << "\n";
  return 0;
}

int cmd_magnify(const FitFlags& flags, double factor, CLI::App* cmd) {
  detail::require(factor > 0, "magnify: factor must be positive");
  const StereoInputs in = load_stereo(flags.left, flags.right, flags.cameras);
  const DepthPlanes planes = make_depth_planes(flags.near, flags.far, flags.planes);
  const FitConfig config = config_from_flags(flags, cmd, parse_color_variant(flags.variant));
  fs::create_directories(flags.out);

  const FitResult<float> fit =
      run_fit(in, planes, config, (fs::path(flags.out) / "mpi").string());

  const Eigen::Vector3d p1 = in.cam_left.position();
  const Eigen::Vector3d p2 = in.cam_right.position();
  const Eigen::Vector3d mid = 0.5 * (p1 + p2);
  const Eigen::Vector3d half = 0.5 * factor * (p2 - p1);
  Camera left_cam = in.cam_left;
  Camera right_cam = in.cam_right;
  left_cam.world_from_camera.translation = mid - half;
  right_cam.world_from_camera.translation = mid + half;

  const Image3f left = clamp01(render_view(fit.mpi, left_cam).image);
  const Image3f right = clamp01(render_view(fit.mpi, right_cam).image);

  // Red from the left view's luma, green/blue from the right view.
  Image3f anaglyph(left.height(), left.width());
  anaglyph.ch[0] = luma(left);
  anaglyph.ch[1] = right.ch[1];
  anaglyph.ch[2] = right.ch[2];

  write_image((fs::path(flags.out) / "left.png").string(), left);
  write_image((fs::path(flags.out) / "right.png").string(), right);
  write_image((fs::path(flags.out) / "anaglyph.png").string(), anaglyph);

  const double baseline_in = (p2 - p1).norm();
  const double baseline_out = 2.0 * half.norm();
  const json info{{"factor", factor},
                  {"baseline_in_m", baseline_in},
                  {"baseline_out_m", baseline_out}};
  atomic_write_text((fs::path(flags.out) / "magnify.json").string(), info.dump(2) + "\n");
  std::cout << "baseline " << baseline_in << " m -> " << baseline_out << " m (x" << factor
            << ") -> " << flags.out << "\n";
  return 0;
}

int cmd_eval(const std::string& pred_dir, const std::string& truth_dir,
             const std::string& out_path) {
  std::vector<std::string> names;
  if (fs::is_directory(pred_dir))
    for (const auto& entry : fs::directory_iterator(pred_dir)) {
      const std::string ext = entry.path().extension().string();
      if (ext == ".png" || ext == ".ppm") names.push_back(entry.path().filename().string());
    }
  std::sort(names.begin(), names.end());
  detail::require(!names.empty(), "eval: no images found in " + pred_dir);

  const std::string scene = fs::path(pred_dir).filename().string();
  std::ostringstream rows;
  double psnr_sum = 0.0, ssim_sum = 0.0;
  for (const std::string& name : names) {
    const fs::path truth_path = fs::path(truth_dir) / name;
    if (!fs::exists(truth_path))
      throw std::invalid_argument("eval: missing counterpart " + truth_path.string());
    const Image3f pred = read_image((fs::path(pred_dir) / name).string());
    const Image3f truth = read_image(truth_path.string());
    const double view_psnr = psnr(pred, truth);
    const double view_ssim = ssim(pred, truth);
    psnr_sum += view_psnr;
    ssim_sum += view_ssim;
    const json row{{"scene", scene},
                   {"view", name},
                   {"psnr", finite_or_inf(view_psnr)},
                   {"ssim", view_ssim}};
    rows << row.dump() << "\n";
    std::cout << name << " psnr " << view_psnr << " ssim " << view_ssim << "\n";
  }
  const json mean_row{{"scene", scene},
                      {"view", "mean"},
                      {"psnr", finite_or_inf(psnr_sum / double(names.size()))},
                      {"ssim", ssim_sum / double(names.size())}};
  rows << mean_row.dump() << "\n";
  std::cout << "mean psnr " << psnr_sum / double(names.size()) << " ssim "
            << ssim_sum / double(names.size()) << "\n";
  if (!out_path.empty()) atomic_write_text(out_path, rows.str());
  return 0;
}

int cmd_dataset_normalize(const std::string& seq_path, const std::string& points_path,
                          const std::string& out_path, std::string out_points_path) {
  const PosedSequence seq = load_sequence(seq_path, points_path);
  const ScaleResult result = scale_normalize(seq);
  if (out_points_path.empty()) out_points_path = out_path + ".points";
  save_sequence(result.sequence, out_path, out_points_path);
  std::cout << "scale factor " << result.factor << " -> " << out_path << "\n";
  return 0;
}

int cmd_dataset_filter(const std::string& seq_path, const std::string& out_path, int head_tail,
                       int min_len) {
  const PosedSequence seq = load_sequence(seq_path);
  // Trim cross-fade frames, keep the longest smooth run, then apply the
  // length cutoff.
  std::optional<PosedSequence> trimmed = trim_and_filter(seq, head_tail, 1);
  json summary{{"input_frames", seq.frame_count()}};
  std::optional<PosedSequence> kept;
  if (trimmed && trimmed->frame_count() >= 3) {
    PosedSequence smooth = longest_smooth_run(*trimmed);
    summary["smooth_frames"] = smooth.frame_count();
    if (smooth.frame_count() >= min_len) kept = std::move(smooth);
  }
  summary["kept"] = kept.has_value();
  if (kept) {
    summary["output_frames"] = kept->frame_count();
    save_sequence(*kept, out_path);
  }
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_dataset_sample(const std::string& seq_path, std::uint64_t seed, int count) {
  const PosedSequence seq = load_sequence(seq_path);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    const Triplet t = sample_triplet(seq, rng);
    const json row{{"src1", seq.frames[t.src1].id},
                   {"src2", seq.frames[t.src2].id},
                   {"target", seq.frames[t.target].id},
                   {"extrapolation", t.extrapolation},
                   {"stride", t.stride}};
    std::cout << row.dump() << "\n";
  }
  return 0;
}

int cmd_selfcheck(bool quick) {
  std::vector<CheckOutcome> outcomes;
  outcomes.push_back(check_homography_oracle(quick ? 25 : 100));
  outcomes.push_back(check_gradient_correctness(quick ? 5 : 20));
  outcomes.push_back(quick ? check_renderer_oracle_agreement(3, 128, 72)
                           : check_renderer_oracle_agreement());
  bool all_pass = true;
  for (const CheckOutcome& outcome : outcomes) {
    std::cout << format_outcome(outcome) << "\n";
    all_pass = all_pass && outcome.pass;
  }
  return all_pass ? 0 : kExitNumeric;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"multiplane-image fitting, rendering and stereo magnification"};
  app.require_subcommand(1);
  int exit_code = 0;

  FitFlags fit_flags;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit an MPI to a stereo pair");
  add_fit_flags(fit_cmd, fit_flags);
  fit_cmd->callback([&] { exit_code = cmd_fit(fit_flags, fit_cmd); });

  std::string mpi_dir, cameras_path, out_dir;
  CLI::App* render_cmd = app.add_subcommand("render", "render views from a stored MPI");
  render_cmd->add_option("--mpi", mpi_dir, "MPI directory")->required();
  render_cmd->add_option("--cameras", cameras_path, "camera sequence file")->required();
  render_cmd->add_option("--out", out_dir, "output directory")->required();
  render_cmd->callback([&] { exit_code = cmd_render(mpi_dir, cameras_path, out_dir); });

  std::string sweep_mpi, sweep_path, sweep_out;
  int sweep_frames = 30;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "render views along a line segment");
  sweep_cmd->add_option("--mpi", sweep_mpi, "MPI directory")->required();
  sweep_cmd->add_option("--path", sweep_path, "segment 'x0,y0,z0:x1,y1,z1'")->required();
  sweep_cmd->add_option("--frames", sweep_frames, "number of views");
  sweep_cmd->add_option("--out", sweep_out, "output directory")->required();
  sweep_cmd->callback(
      [&] { exit_code = cmd_sweep(sweep_mpi, sweep_path, sweep_frames, sweep_out); });

  FitFlags magnify_flags;
  double factor = 4.5;
  CLI::App* magnify_cmd =
      app.add_subcommand("magnify", "synthesize a wider-baseline stereo pair");
  add_fit_flags(magnify_cmd, magnify_flags);
  magnify_cmd->add_option("--factor", factor, "baseline magnification factor");
  magnify_cmd->callback([&] { exit_code = cmd_magnify(magnify_flags, factor, magnify_cmd); });

  std::string pred_dir, truth_dir, metrics_out;
  CLI::App* eval_cmd = app.add_subcommand("eval", "PSNR/SSIM between two image directories");
  eval_cmd->add_option("--pred", pred_dir, "rendered images")->required();
  eval_cmd->add_option("--truth", truth_dir, "ground-truth images")->required();
  eval_cmd->add_option("--out", metrics_out, "metrics JSON-rows file");
  eval_cmd->callback([&] { exit_code = cmd_eval(pred_dir, truth_dir, metrics_out); });

  std::string norm_seq, norm_points, norm_out, norm_out_points;
  CLI::App* norm_cmd =
      app.add_subcommand("dataset-normalize", "rescale a sequence to canonical depth");
  norm_cmd->add_option("--sequence", norm_seq, "posed sequence file")->required();
  norm_cmd->add_option("--points", norm_points, "sparse points file")->required();
  norm_cmd->add_option("--out", norm_out, "output sequence file")->required();
  norm_cmd->add_option("--out-points", norm_out_points, "output points file");
  norm_cmd->callback([&] {
    exit_code = cmd_dataset_normalize(norm_seq, norm_points, norm_out, norm_out_points);
  });

  std::string filter_seq, filter_out;
  int head_tail = 10, min_len = 30;
  CLI::App* filter_cmd =
      app.add_subcommand("dataset-filter", "trim, smoothness-filter and length-check a clip");
  filter_cmd->add_option("--sequence", filter_seq, "posed sequence file")->required();
  filter_cmd->add_option("--out", filter_out, "output sequence file")->required();
  filter_cmd->add_option("--head-tail", head_tail, "frames dropped from each end");
  filter_cmd->add_option("--min-length", min_len, "minimum surviving length");
  filter_cmd->callback(
      [&] { exit_code = cmd_dataset_filter(filter_seq, filter_out, head_tail, min_len); });

  std::string sample_seq;
  std::uint64_t sample_seed = 0;
  int sample_count = 1;
  CLI::App* sample_cmd = app.add_subcommand("dataset-sample", "draw training triplets");
  sample_cmd->add_option("--sequence", sample_seq, "posed sequence file")->required();
  sample_cmd->add_option("--seed", sample_seed, "random seed");
  sample_cmd->add_option("--count", sample_count, "number of triplets");
  sample_cmd->callback(
      [&] { exit_code = cmd_dataset_sample(sample_seq, sample_seed, sample_count); });

  bool quick = false;
  CLI::App* selfcheck_cmd =
      app.add_subcommand("selfcheck", "run gradient and oracle cross-validation");
  selfcheck_cmd->add_flag("--quick", quick, "reduced problem sizes");
  selfcheck_cmd->callback([&] { exit_code = cmd_selfcheck(quick); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return exit_code;
}

int run_cli(std::vector<std::string> args) {
  std::vector<const char*> argv;
  argv.push_back("mpiview");
  for (const std::string& arg : args) argv.push_back(arg.c_str());
  return run_cli(int(argv.size()), argv.data());
}

}  // namespace mpiv
