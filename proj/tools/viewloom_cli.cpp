// Command-line front end: composes the library into the pipeline stages
// (sort, plan, masks, degrade, restore, weights, eval).

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "viewloom/viewloom.hpp"

namespace fs = std::filesystem;
using namespace viewloom;

namespace {

std::string numbered(const char* prefix, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03zu.png", prefix, i);
  return buf;
}

std::vector<std::string> list_pngs(const std::string& dir) {
  if (!fs::is_directory(dir))
    throw IoError("'" + dir + "' is not a directory");
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

std::vector<Image> load_rgb_dir(const std::string& dir,
                                const std::vector<std::string>& names) {
  std::vector<Image> out;
  out.reserve(names.size());
  for (const std::string& name : names)
    out.push_back(convert_to_rgb(read_png((fs::path(dir) / name).string())));
  return out;
}

void require_uniform(const std::vector<Image>& images, const char* what) {
  for (const Image& img : images)
    if (!img.same_shape(images.front()))
      throw ValidationError(std::string(what) + ": images differ in size");
}

// sort: poses -> trajectory order file
int cmd_sort(const std::string& pose_path, const std::string& out_path,
             double omega_r, std::size_t init_index, bool random_init,
             std::uint64_t seed) {
  const PoseFile pf = load_pose_file(pose_path, omega_r);
  const std::size_t init =
      random_init ? random_init_index(pf.set.poses.size(), seed) : init_index;
  const OrderedTrajectory traj = sort_poses(pf.set, init);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + out_path + "'");
  out << "# trajectory order, one image name per line\n";
  for (std::size_t pos : traj.order) out << pf.names[pos] << "\n";
  if (!out) throw IoError("failed writing '" + out_path + "'");
  std::cout << "ordered " << traj.order.size() << " poses -> " << out_path
            << "\n";
  return 0;
}

// plan: ordered images -> one batch directory (frames, masks, manifest)
int cmd_plan(const std::string& pose_path, const std::string& images_dir,
             const std::string& out_dir, int f, double omega_r,
             std::size_t style_index) {
  const PoseFile pf = load_pose_file(pose_path, omega_r);
  const std::size_t k = pf.set.poses.size();
  if (k < 2 || k > static_cast<std::size_t>(f))
    throw ValidationError("plan: need between 2 and " + std::to_string(f) +
                          " images in pose-file order, got " +
                          std::to_string(k));
  if (style_index >= k)
    throw ValidationError("plan: style index out of range");

  const std::vector<Image> images = load_rgb_dir(images_dir, pf.names);
  require_uniform(images, "plan");

  std::vector<double> gaps;
  for (std::size_t i = 0; i + 1 < k; ++i)
    gaps.push_back(pose_distance(pf.set.poses[i], pf.set.poses[i + 1], pf.set));
  const std::vector<int> zero_counts =
      allocate_zero_frames(gaps, static_cast<int>(k), f);
  const FramePlan plan = build_frame_plan(static_cast<int>(k), zero_counts);

  const int h = images.front().height, w = images.front().width;
  std::vector<std::size_t> sources(k);
  for (std::size_t i = 0; i < k; ++i) sources[i] = i;
  const std::size_t style_slot = plan.image_slot_indices()[style_index];

  BatchInputs batch;
  batch.manifest = make_batch_manifest(plan, style_slot, sources, h, w);
  batch.inpaint_masks = make_inpaint_masks(plan, h, w);
  batch.style_masks = make_style_masks(plan, style_slot, h, w);
  for (const FrameSlot& slot : plan.slots)
    batch.frames.push_back(slot.is_image ? images[slot.image_pos]
                                         : Image(h, w, 3, 0));
  const std::string manifest_path = materialize_batch(batch, out_dir);

  std::cout << "zero_counts:";
  for (int n : zero_counts) std::cout << " " << n;
  std::cout << "\nmanifest: " << manifest_path << "\n";
  return 0;
}

// masks: slot layout (+ optional occlusion files) -> mask set
int cmd_masks(const std::string& zeros_arg, int height, int width,
              std::size_t style_index, const std::string& occlusions_dir,
              int downsample, const std::string& out_dir) {
  std::vector<int> zero_counts;
  std::stringstream ss(zeros_arg);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      zero_counts.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ValidationError("masks: bad zero count '" + item + "'");
    }
  }
  const int n = static_cast<int>(zero_counts.size()) + 1;
  const FramePlan plan = build_frame_plan(n, zero_counts);
  if (style_index >= static_cast<std::size_t>(n))
    throw ValidationError("masks: style index out of range");

  std::vector<std::optional<BinaryMask>> occlusions;
  if (!occlusions_dir.empty()) {
    occlusions.resize(n);
    for (int i = 0; i < n; ++i) {
      const fs::path p = fs::path(occlusions_dir) / numbered("occlusion", i);
      if (fs::exists(p)) occlusions[i] = read_mask_png(p.string());
    }
  }

  const std::size_t style_slot = plan.image_slot_indices()[style_index];
  std::vector<BinaryMask> inpaint =
      make_inpaint_masks(plan, height, width, occlusions);
  std::vector<BinaryMask> style =
      make_style_masks(plan, style_slot, height, width);

  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < inpaint.size(); ++i) {
    write_mask_png((fs::path(out_dir) / numbered("inpaint", i)).string(),
                   downsample_mask(inpaint[i], downsample));
    write_mask_png((fs::path(out_dir) / numbered("style", i)).string(),
                   downsample_mask(style[i], downsample));
  }
  std::cout << "wrote " << inpaint.size() << " inpaint + style mask pairs -> "
            << out_dir << "\n";
  return 0;
}

nlohmann::ordered_json params_to_json(const DegradationParams& p) {
  nlohmann::ordered_json j;
  j["brightness_factor"] = p.brightness_factor;
  j["saturation_factor"] = p.saturation_factor;
  j["hue_shift_deg"] = p.hue_shift_deg;
  j["sharpness_factor"] = p.sharpness_factor;
  j["noise_sigma"] = p.noise_sigma;
  j["motion_blur_length"] = p.motion_blur_length;
  j["motion_blur_angle_deg"] = p.motion_blur_angle_deg;
  j["gaussian_blur_sigma"] = p.gaussian_blur_sigma;
  j["occluders"] = nlohmann::ordered_json::array();
  for (const OccluderSpec& o : p.occluders)
    j["occluders"].push_back({{"cutout_id", o.cutout_id},
                              {"center_y", o.center_y},
                              {"center_x", o.center_x},
                              {"scale", o.scale}});
  return j;
}

// degrade: clean frames + cutouts + seed -> training pair directory
int cmd_degrade(const std::string& frames_dir, const std::string& cutouts_dir,
                std::uint64_t seed, const std::string& out_dir) {
  const std::vector<std::string> frame_names = list_pngs(frames_dir);
  std::vector<Image> source = load_rgb_dir(frames_dir, frame_names);
  require_uniform(source, "degrade");

  std::vector<Image> cutouts;
  DegradationRanges ranges;
  if (!cutouts_dir.empty()) {
    for (const std::string& name : list_pngs(cutouts_dir)) {
      const Image c = read_png((fs::path(cutouts_dir) / name).string());
      if (c.channels != 4)
        throw ValidationError("cutout '" + name + "' has no alpha channel");
      cutouts.push_back(c);
    }
  }
  if (cutouts.empty()) ranges.occluder_count_hi = 0;

  Rng rng(seed);
  const std::vector<Image> clean = sample_clean_sequence(source, rng);
  const TrainingPair pair =
      make_training_pair(clean, cutouts, rng.next_u64(), ranges);

  const fs::path root(out_dir);
  fs::create_directories(root / "initial");
  fs::create_directories(root / "masks");
  fs::create_directories(root / "target");
  for (std::size_t i = 0; i < pair.initial_video.size(); ++i) {
    write_png((root / "initial" / numbered("frame", i)).string(),
              pair.initial_video[i]);
    write_mask_png((root / "masks" / numbered("inpaint", i)).string(),
                   pair.inpaint_masks[i]);
    write_mask_png((root / "masks" / numbered("style", i)).string(),
                   pair.style_masks[i]);
    write_png((root / "target" / numbered("frame", i)).string(),
              pair.target_video[i]);
  }

  nlohmann::ordered_json recipe;
  recipe["seed"] = pair.seed;
  recipe["cli_seed"] = seed;
  recipe["style_slot"] = pair.style_slot;
  recipe["zero_indices"] = pair.zero_indices;
  recipe["frames"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < pair.params.size(); ++i) {
    nlohmann::ordered_json jf = params_to_json(pair.params[i]);
    jf["zeroed"] = std::find(pair.zero_indices.begin(),
                             pair.zero_indices.end(),
                             i) != pair.zero_indices.end();
    recipe["frames"].push_back(jf);
  }
  std::ofstream rec(root / "recipe.json", std::ios::binary);
  if (!rec) throw IoError("cannot write recipe.json");
  rec << recipe.dump(2) << "\n";

  std::cout << "training pair (style slot " << pair.style_slot << ", "
            << pair.zero_indices.size() << " zeroed frames) -> " << out_dir
            << "\n";
  return 0;
}

// restore: images + poses + restorer -> restored set
int cmd_restore(const std::string& pose_path, const std::string& images_dir,
                const std::string& restorer_arg, const std::string& out_dir,
                std::string work_dir, int f, double omega_r,
                std::size_t style_index, std::size_t init_index) {
  const PoseFile pf = load_pose_file(pose_path, omega_r);
  const std::vector<Image> images = load_rgb_dir(images_dir, pf.names);
  require_uniform(images, "restore");

  if (work_dir.empty()) work_dir = (fs::path(out_dir) / "work").string();
  std::unique_ptr<Restorer> restorer;
  if (restorer_arg == "identity") {
    restorer = std::make_unique<IdentityRestorer>();
  } else if (restorer_arg == "affine-style") {
    restorer = std::make_unique<AffineStyleRestorer>();
  } else if (restorer_arg.rfind("external:", 0) == 0) {
    restorer = std::make_unique<ExternalRestorer>(restorer_arg.substr(9),
                                                  work_dir);
  } else {
    throw ValidationError("unknown restorer '" + restorer_arg +
                          "' (expected identity, affine-style, or external:<command>)");
  }

  PipelineOptions opt;
  opt.frame_capacity = f;
  opt.style_index = style_index;
  opt.init_index = init_index;
  const PipelineResult result = run_pipeline(images, pf.set, *restorer, opt);

  fs::create_directories(out_dir);
  std::ofstream order((fs::path(out_dir) / "order.txt").string(),
                      std::ios::binary);
  order << "# output position, source image name\n";
  for (std::size_t i = 0; i < result.restored.size(); ++i) {
    write_png((fs::path(out_dir) / numbered("restored", i)).string(),
              result.restored[i]);
    order << i << " " << pf.names[result.trajectory.order[i]] << "\n";
  }
  std::cout << "restored " << result.restored.size() << " images in "
            << result.iterations << " batches (O="
            << result.params.iteration_divisor
            << ", N=" << result.params.images_per_batch << ") -> " << out_dir
            << "\n";
  return 0;
}

// weights: f, N, lambda -> omega_c, omega_n
int cmd_weights(int f, int n, double lambda, const std::string& form_arg) {
  ZeroWeightForm form;
  if (form_arg == "ratio")
    form = ZeroWeightForm::ratio_to_conditioned;
  else if (form_arg == "fraction")
    form = ZeroWeightForm::fraction_of_total;
  else
    throw ValidationError("unknown zero-weight form '" + form_arg +
                          "' (expected ratio or fraction)");
  const LossWeights w = compute_weights(f, n, lambda, form);
  std::printf("omega_c %.12g\n", w.omega_c);
  std::printf("omega_n %.12g\n", w.omega_n);
  return 0;
}

// eval: prediction dir vs ground-truth dir -> metric report
int cmd_eval(const std::string& pred_dir, const std::string& gt_dir,
             bool no_align) {
  const std::vector<std::string> pred_names = list_pngs(pred_dir);
  const std::vector<std::string> gt_names = list_pngs(gt_dir);
  if (pred_names.size() != gt_names.size())
    throw ValidationError("eval: " + std::to_string(pred_names.size()) +
                          " predictions vs " + std::to_string(gt_names.size()) +
                          " ground-truth images");
  if (pred_names.empty()) throw ValidationError("eval: no images found");

  const std::vector<Image> pred = load_rgb_dir(pred_dir, pred_names);
  const std::vector<Image> gt = load_rgb_dir(gt_dir, gt_names);
  const EvalReport report = evaluate(pred, gt, !no_align);

  std::printf("%-28s %10s %8s", "image", "psnr", "ssim");
  if (!no_align) std::printf(" %10s %8s", "psnr_al", "ssim_al");
  std::printf("\n");
  for (std::size_t i = 0; i < report.per_image.size(); ++i) {
    const EvalEntry& e = report.per_image[i];
    std::printf("%-28s %10.4f %8.4f", pred_names[i].c_str(), e.psnr_raw,
                e.ssim_raw);
    if (!no_align)
      std::printf(" %10.4f %8.4f", *e.psnr_aligned, *e.ssim_aligned);
    std::printf("\n");
  }
  std::printf("%-28s %10.4f %8.4f", "mean", report.mean.psnr_raw,
              report.mean.ssim_raw);
  if (!no_align)
    std::printf(" %10.4f %8.4f", *report.mean.psnr_aligned,
                *report.mean.ssim_aligned);
  std::printf("\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"viewloom: trajectory ordering, video planning, and batch "
               "restoration tooling"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int f = 25;
  double omega_r = 0.5;
  double lambda = 0.98;
  std::size_t style_index = 0;
  app.add_option("--seed", seed, "random seed")->capture_default_str();
  app.add_option("--f", f, "video frame capacity")->capture_default_str();
  app.add_option("--omega-r", omega_r, "rotation weight in the pose metric")
      ->capture_default_str();
  app.add_option("--lambda", lambda, "minimum conditioned-frame loss share")
      ->capture_default_str();
  app.add_option("--style-index", style_index,
                 "style image position (first batch, sorted order)")
      ->capture_default_str();

  std::string poses, images_dir, out_path, occlusions_dir, cutouts_dir;
  std::string restorer_arg = "identity", work_dir, zeros_arg, form_arg = "ratio";
  std::string pred_dir, gt_dir;
  std::size_t init_index = 0;
  bool random_init = false, no_align = false;
  int n_images = 0, height = 0, width = 0, downsample = 1;

  CLI::App* sort_cmd = app.add_subcommand("sort", "order poses into a trajectory");
  sort_cmd->fallthrough();
  sort_cmd->add_option("--poses", poses, "pose file")->required();
  sort_cmd->add_option("--out", out_path, "output order file")->required();
  sort_cmd->add_option("--init-index", init_index, "initial pose (input position)");
  sort_cmd->add_flag("--random-init", random_init, "pick the initial pose from --seed");

  CLI::App* plan_cmd =
      app.add_subcommand("plan", "plan one initial video from ordered images");
  plan_cmd->fallthrough();
  plan_cmd->add_option("--poses", poses, "pose file (already in order)")->required();
  plan_cmd->add_option("--images", images_dir, "image directory")->required();
  plan_cmd->add_option("--out", out_path, "output batch directory")->required();

  CLI::App* masks_cmd = app.add_subcommand("masks", "build inpaint + style masks");
  masks_cmd->fallthrough();
  masks_cmd->add_option("--zeros", zeros_arg,
                        "comma-separated zero counts per interval")->required();
  masks_cmd->add_option("--height", height, "mask height")->required();
  masks_cmd->add_option("--width", width, "mask width")->required();
  masks_cmd->add_option("--occlusions", occlusions_dir,
                        "directory of occlusion_###.png files (by image position)");
  masks_cmd->add_option("--downsample", downsample, "max-pool factor")
      ->capture_default_str();
  masks_cmd->add_option("--out", out_path, "output directory")->required();

  CLI::App* degrade_cmd =
      app.add_subcommand("degrade", "synthesize a training pair");
  degrade_cmd->fallthrough();
  degrade_cmd->add_option("--frames", images_dir, "clean frame directory (>= 25 PNGs)")
      ->required();
  degrade_cmd->add_option("--cutouts", cutouts_dir, "RGBA cutout directory");
  degrade_cmd->add_option("--out", out_path, "output pair directory")->required();

  CLI::App* restore_cmd =
      app.add_subcommand("restore", "run the restoration pipeline");
  restore_cmd->fallthrough();
  restore_cmd->add_option("--poses", poses, "pose file")->required();
  restore_cmd->add_option("--images", images_dir, "image directory")->required();
  restore_cmd->add_option("--restorer", restorer_arg,
                          "identity | affine-style | external:<command>")
      ->capture_default_str();
  restore_cmd->add_option("--out", out_path, "output directory")->required();
  restore_cmd->add_option("--work-dir", work_dir,
                          "batch staging directory (external restorer)");
  restore_cmd->add_option("--init-index", init_index,
                          "trajectory growth starts at this input pose");

  CLI::App* weights_cmd =
      app.add_subcommand("weights", "compute consistency-loss weights");
  weights_cmd->fallthrough();
  weights_cmd->add_option("--n", n_images, "images per batch (N)")->required();
  weights_cmd->add_option("--zero-weight-form", form_arg,
                          "ratio | fraction (zero-frame numerator form)")
      ->capture_default_str();

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate restored images");
  eval_cmd->fallthrough();
  eval_cmd->add_option("--pred", pred_dir, "prediction directory")->required();
  eval_cmd->add_option("--gt", gt_dir, "ground-truth directory")->required();
  eval_cmd->add_flag("--no-align", no_align, "skip affine-aligned metrics");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sort_cmd->parsed())
      return cmd_sort(poses, out_path, omega_r, init_index, random_init, seed);
    if (plan_cmd->parsed())
      return cmd_plan(poses, images_dir, out_path, f, omega_r, style_index);
    if (masks_cmd->parsed())
      return cmd_masks(zeros_arg, height, width, style_index, occlusions_dir,
                       downsample, out_path);
    if (degrade_cmd->parsed())
      return cmd_degrade(images_dir, cutouts_dir, seed, out_path);
    if (restore_cmd->parsed())
      return cmd_restore(poses, images_dir, restorer_arg, out_path, work_dir,
                         f, omega_r, style_index, init_index);
    if (weights_cmd->parsed())
      return cmd_weights(f, n_images, lambda, form_arg);
    if (eval_cmd->parsed()) return cmd_eval(pred_dir, gt_dir, no_align);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
