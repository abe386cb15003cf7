// Batch pipeline driver: scene segmentation, descriptor extraction, classifier
// training/evaluation, and the simulated sort sequence.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cloudsort/classifier.hpp"
#include "cloudsort/descriptor.hpp"
#include "cloudsort/error.hpp"
#include "cloudsort/evaluation.hpp"
#include "cloudsort/kinematics.hpp"
#include "cloudsort/normals.hpp"
#include "cloudsort/pcd_io.hpp"
#include "cloudsort/segmentation.hpp"

namespace {

using namespace cloudsort;

std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

Eigen::Vector3d parse_triple(const std::string& text, const std::string& what) {
  Eigen::Vector3d v;
  std::istringstream in(text);
  std::string part;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(in, part, ','))
      fail(errc::io_error, what + " needs x,y,z, got '" + text + "'");
    v[i] = std::stod(part);
  }
  if (std::getline(in, part, ','))
    fail(errc::io_error, what + " needs exactly 3 values, got '" + text + "'");
  return v;
}

JointConfig parse_joints(const std::string& text) {
  JointConfig q;
  std::istringstream in(text);
  std::string part;
  for (int i = 0; i < 6; ++i) {
    if (!std::getline(in, part, ','))
      fail(errc::io_error, "--current-joints needs 6 comma-separated angles");
    q.theta[i] = std::stod(part);
  }
  return normalized(q);
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

// Bin map file: one "label -> bin_name" per line, '#' comments allowed.
std::map<std::string, std::string> load_bin_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open '" + path + "' for reading");
  std::map<std::string, std::string> bins;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string content = trim(line);
    if (content.empty() || content[0] == '#') continue;
    const auto arrow = content.find("->");
    if (arrow == std::string::npos)
      fail(errc::io_error, "bin map line needs 'label -> bin_name': " + content);
    const std::string label = trim(content.substr(0, arrow));
    const std::string bin = trim(content.substr(arrow + 2));
    if (label.empty() || bin.empty())
      fail(errc::io_error, "bin map line needs 'label -> bin_name': " + content);
    bins[label] = bin;
  }
  return bins;
}

struct SegmentationFlags {
  std::string crop_min;
  std::string crop_max;
  SegmentationConfig config;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--crop-min", crop_min, "crop box lower corner x,y,z");
    cmd->add_option("--crop-max", crop_max, "crop box upper corner x,y,z");
    cmd->add_option("--ransac-threshold", config.ransac_threshold, "plane inlier distance (m)");
    cmd->add_option("--ransac-iters", config.ransac_iterations, "RANSAC iterations");
    cmd->add_option("--cluster-dist", config.cluster_distance, "cluster connection distance (m)");
    cmd->add_option("--cluster-min", config.cluster_min_size, "minimum cluster size");
    cmd->add_option("--cluster-max", config.cluster_max_size, "maximum cluster size");
    cmd->add_option("--seed", config.rng_seed, "RNG seed");
  }

  SegmentationConfig resolve() const {
    SegmentationConfig out = config;
    if (!crop_min.empty()) out.crop_min = parse_triple(crop_min, "--crop-min");
    if (!crop_max.empty()) out.crop_max = parse_triple(crop_max, "--crop-max");
    return out;
  }
};

int cmd_segment(const std::string& scene_path, const SegmentationFlags& flags,
                const std::string& out_dir) {
  const SegmentationConfig config = flags.resolve();
  const ColorPointCloud scene = load_pcd(scene_path);
  const SegmentationResult result = segment_scene(scene, config);

  std::filesystem::create_directories(out_dir);
  std::printf("cropped %lld points; plane %s (%zu inliers)\n",
              static_cast<long long>(result.cropped_size),
              result.plane_removed ? "removed" : "kept", result.plane.inlier_indices.size());
  for (std::size_t k = 0; k < result.objects.size(); ++k) {
    const auto& object = result.objects[k];
    const std::string path = out_dir + "/object_" + std::to_string(k) + ".pcd";
    save_pcd(object, path);
    const Eigen::Vector3d c = centroid(object);
    std::printf("cluster %zu: %lld points, centroid %s %s %s -> %s\n", k,
                static_cast<long long>(object.size()), format_g9(c.x()).c_str(),
                format_g9(c.y()).c_str(), format_g9(c.z()).c_str(), path.c_str());
  }
  return 0;
}

int cmd_describe(const std::vector<std::string>& inputs, const std::string& kind_name,
                 const std::string& label, int k_normals, const std::string& out_path) {
  const DescriptorKind kind = parse_descriptor_kind(kind_name);
  std::ofstream out(out_path, std::ios::app);
  if (!out) fail(errc::io_error, "cannot open '" + out_path + "' for appending");

  int failures = 0;
  for (const auto& input : inputs) {
    try {
      const ColorPointCloud cloud = load_pcd(input);
      Descriptor descriptor;
      if (kind == DescriptorKind::kHsv) {
        descriptor = hsv_histogram(cloud);
      } else {
        const NormalSet normals = estimate_normals(cloud, k_normals);
        descriptor = kind == DescriptorKind::kCvfh ? cvfh(cloud, normals)
                                                   : color_cvfh(cloud, normals);
      }
      out << format_descriptor_line(label, descriptor) << "\n";
      std::printf("%s: %s descriptor appended\n", input.c_str(), kind_name.c_str());
    } catch (const Error& e) {
      std::fprintf(stderr, "%s: %s\n", input.c_str(), e.what());
      ++failures;
    }
  }
  if (!out) fail(errc::io_error, "failed writing '" + out_path + "'");
  return failures == 0 ? 0 : 1;
}

int cmd_train(const std::string& descriptor_path, const TrainConfig& config,
              const std::string& out_path) {
  const auto samples = read_descriptor_file(descriptor_path);
  if (samples.empty()) fail(errc::length_mismatch, "no descriptors in '" + descriptor_path + "'");
  const Eigen::Index dim = samples.front().descriptor.values.size();
  Eigen::MatrixXd features(dim, static_cast<Eigen::Index>(samples.size()));
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].descriptor.values.size() != dim)
      fail(errc::dimension_mismatch, "descriptor lines of mixed length");
    features.col(static_cast<Eigen::Index>(i)) = samples[i].descriptor.values;
    labels.push_back(samples[i].label);
  }

  const TrainingSet data = make_training_set(std::move(features), std::move(labels));
  const ClassifierModel model = train(data, config);
  save_model(model, out_path);

  for (const auto& cls : model.class_index) {
    long correct = 0;
    long total = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (data.labels[i] != cls) continue;
      ++total;
      if (predict(model, data.features.col(static_cast<Eigen::Index>(i))).label == cls) ++correct;
    }
    std::printf("class %s: training accuracy %.2f%% (%ld/%ld)\n", cls.c_str(),
                total > 0 ? 100.0 * static_cast<double>(correct) / static_cast<double>(total) : 0.0,
                correct, total);
  }
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& descriptor_path,
             const std::string& out_dir) {
  const ClassifierModel model = load_model(model_path);
  const auto samples = read_descriptor_file(descriptor_path);
  if (samples.empty()) fail(errc::length_mismatch, "no descriptors in '" + descriptor_path + "'");

  std::vector<std::string> actual, predicted;
  for (const auto& sample : samples) {
    actual.push_back(sample.label);
    predicted.push_back(predict(model, sample.descriptor.values).label);
  }
  const ConfusionMatrix cm = confusion(actual, predicted, model.class_index);

  std::filesystem::create_directories(out_dir);
  write_confusion_csv(cm, out_dir + "/confusion.csv");
  write_metrics_csv(cm, out_dir + "/metrics.csv");

  long correct = 0;
  for (Eigen::Index i = 0; i < cm.counts.rows(); ++i) correct += cm.counts(i, i);
  std::printf("%zu samples, accuracy %.2f%%; wrote %s/confusion.csv and %s/metrics.csv\n",
              samples.size(), 100.0 * static_cast<double>(correct) / static_cast<double>(samples.size()),
              out_dir.c_str(), out_dir.c_str());
  return 0;
}

int cmd_sort_sim(const std::string& scene_path, const std::string& model_path,
                 const std::string& dh_path, const std::string& bins_path,
                 const std::string& joints_text, const SegmentationFlags& flags, int k_normals,
                 const std::string& out_path) {
  const SegmentationConfig config = flags.resolve();
  const ColorPointCloud scene = load_pcd(scene_path);
  const ClassifierModel model = load_model(model_path);
  const DHParameters dh = dh_path.empty() ? DHParameters::ur5() : load_dh_table(dh_path);
  const auto bins = load_bin_map(bins_path);
  const JointConfig current = joints_text.empty() ? JointConfig{} : parse_joints(joints_text);

  // Grasp convention: approach straight down onto the centroid from 0.1 m.
  const Eigen::Vector3d approach = Eigen::Vector3d::UnitZ();
  const double standoff = 0.1;

  const SegmentationResult segmented = segment_scene(scene, config);

  std::ofstream report(out_path);
  if (!report) fail(errc::io_error, "cannot open '" + out_path + "' for writing");

  int processed = 0;
  for (std::size_t k = 0; k < segmented.objects.size(); ++k) {
    const auto& object = segmented.objects[k];
    report << "cluster " << k << "\n";
    report << "points " << object.size() << "\n";
    try {
      const Eigen::Vector3d c = centroid(object);
      report << "centroid " << format_g9(c.x()) << " " << format_g9(c.y()) << " "
             << format_g9(c.z()) << "\n";

      const NormalSet normals = estimate_normals(object, k_normals);
      const Descriptor descriptor = color_cvfh(object, normals);
      const Prediction prediction = predict(model, descriptor.values);
      report << "label " << prediction.label << "\n";
      report << "scores";
      for (std::size_t c_idx = 0; c_idx < model.class_index.size(); ++c_idx) {
        report << " " << model.class_index[c_idx] << "="
               << format_g9(prediction.scores[static_cast<Eigen::Index>(c_idx)]);
      }
      report << "\n";

      const Pose target = grasp_target(c, approach, standoff);
      const IkSolutions ik = inverse_kinematics(target, dh);
      std::string joints_line = "joints unreachable";
      std::string human_joints = "unreachable";
      if (!ik.configs.empty()) {
        const JointConfig chosen = select_solution(ik.configs, current);
        joints_line = "joints";
        human_joints.clear();
        for (int i = 0; i < 6; ++i) {
          joints_line += " " + format_g9(chosen.theta[i]);
          human_joints += (i ? "," : "") + format_g9(chosen.theta[i]);
        }
      }
      report << joints_line << "\n";

      const auto bin = bins.find(prediction.label);
      const std::string bin_name = bin != bins.end() ? bin->second : "unmapped";
      report << "bin " << bin_name << "\n\n";

      std::printf("cluster %zu: %lld points, label=%s, joints=%s, bin=%s\n", k,
                  static_cast<long long>(object.size()), prediction.label.c_str(),
                  human_joints.c_str(), bin_name.c_str());
      ++processed;
    } catch (const Error& e) {
      report << "error " << e.what() << "\n\n";
      std::fprintf(stderr, "cluster %zu: %s\n", k, e.what());
    }
  }
  if (!report) fail(errc::io_error, "failed writing '" + out_path + "'");

  if (segmented.objects.empty()) {
    std::fprintf(stderr, "no clusters found in the scene\n");
    return 1;
  }
  return processed > 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"point-cloud object sorting pipeline"};
  app.require_subcommand(1);

  // segment
  auto* segment = app.add_subcommand("segment", "split a scene into object clouds");
  std::string scene_path;
  std::string out_dir = ".";
  SegmentationFlags seg_flags;
  segment->add_option("scene", scene_path, "scene PCD file")->required();
  segment->add_option("--out", out_dir, "output directory");
  seg_flags.add_to(segment);

  // describe
  auto* describe = app.add_subcommand("describe", "append object descriptors to a training file");
  std::vector<std::string> describe_inputs;
  std::string descriptor_kind = "colorcvfh";
  std::string label;
  std::string describe_out = "descriptors.txt";
  int k_normals = 10;
  describe->add_option("objects", describe_inputs, "object PCD files")->required();
  describe->add_option("--descriptor", descriptor_kind, "cvfh | hsv | colorcvfh");
  describe->add_option("--label", label, "class label for every input")->required();
  describe->add_option("--k-normals", k_normals, "neighbors for normal estimation");
  describe->add_option("--out", describe_out, "descriptor file to append to");

  // train
  auto* train_cmd = app.add_subcommand("train", "train the one-vs-rest classifier");
  std::string train_input;
  std::string model_out = "model.txt";
  TrainConfig train_config;
  train_cmd->add_option("descriptors", train_input, "descriptor file")->required();
  train_cmd->add_option("--out", model_out, "model file to write");
  train_cmd->add_option("--lambda", train_config.lambda, "regularization strength");
  train_cmd->add_option("--epochs", train_config.epochs, "training passes");
  train_cmd->add_option("--seed", train_config.seed, "RNG seed");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a descriptor file");
  std::string eval_model;
  std::string eval_input;
  std::string eval_out = ".";
  eval_cmd->add_option("model", eval_model, "model file")->required();
  eval_cmd->add_option("descriptors", eval_input, "test descriptor file")->required();
  eval_cmd->add_option("--out", eval_out, "directory for confusion.csv and metrics.csv");

  // sort-sim
  auto* sort_sim = app.add_subcommand("sort-sim", "simulated segment/recognize/grasp sequence");
  std::string sim_scene;
  std::string sim_model;
  std::string sim_dh;
  std::string sim_bins;
  std::string sim_joints;
  std::string sim_out = "sort_report.txt";
  int sim_k_normals = 10;
  SegmentationFlags sim_flags;
  sort_sim->add_option("scene", sim_scene, "scene PCD file")->required();
  sort_sim->add_option("--model", sim_model, "classifier model file")->required();
  sort_sim->add_option("--dh-table", sim_dh, "D-H table file (built-in UR5 when omitted)");
  sort_sim->add_option("--bins", sim_bins, "label -> bin map file")->required();
  sort_sim->add_option("--current-joints", sim_joints, "six comma-separated joint angles");
  sort_sim->add_option("--k-normals", sim_k_normals, "neighbors for normal estimation");
  sort_sim->add_option("--out", sim_out, "report file to write");
  sim_flags.add_to(sort_sim);

  CLI11_PARSE(app, argc, argv);

  try {
    if (segment->parsed()) return cmd_segment(scene_path, seg_flags, out_dir);
    if (describe->parsed())
      return cmd_describe(describe_inputs, descriptor_kind, label, k_normals, describe_out);
    if (train_cmd->parsed()) return cmd_train(train_input, train_config, model_out);
    if (eval_cmd->parsed()) return cmd_eval(eval_model, eval_input, eval_out);
    if (sort_sim->parsed())
      return cmd_sort_sim(sim_scene, sim_model, sim_dh, sim_bins, sim_joints, sim_flags,
                          sim_k_normals, sim_out);
  } catch (const cloudsort::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
