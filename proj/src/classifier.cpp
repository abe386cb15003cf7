#include "cloudsort/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cloudsort/error.hpp"
#include "cloudsort/rng.hpp"

namespace cloudsort {

TrainingSet make_training_set(Eigen::MatrixXd features, std::vector<std::string> labels) {
  if (static_cast<std::size_t>(features.cols()) != labels.size())
    fail(errc::length_mismatch, "feature/label count mismatch");
  if (labels.empty()) fail(errc::length_mismatch, "empty training set");
  TrainingSet data;
  data.features = std::move(features);
  data.labels = std::move(labels);
  for (const auto& label : data.labels) {
    if (std::find(data.class_index.begin(), data.class_index.end(), label) ==
        data.class_index.end())
      data.class_index.push_back(label);
  }
  return data;
}

ClassifierModel train(const TrainingSet& data, const TrainConfig& config) {
  const Eigen::Index d = data.features.rows();
  const Eigen::Index n = data.features.cols();
  if (static_cast<std::size_t>(n) != data.labels.size())
    fail(errc::dimension_mismatch, "feature/label count mismatch");
  if (data.class_index.size() < 2) fail(errc::single_class, "training needs at least 2 classes");
  if (config.epochs < 1) fail(errc::dimension_mismatch, "epochs must be >= 1");
  if (!(config.lambda > 0)) fail(errc::dimension_mismatch, "lambda must be > 0");

  ClassifierModel model;
  model.class_index = data.class_index;
  model.config = config;
  model.feature_mean = data.features.rowwise().mean();
  Eigen::VectorXd variance = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd diff = data.features.col(i) - model.feature_mean;
    variance += diff.cwiseProduct(diff);
  }
  variance /= static_cast<double>(n);
  model.feature_scale = variance.cwiseSqrt();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(model.feature_scale[j] > 0.0)) model.feature_scale[j] = 1.0;
  }

  Eigen::MatrixXd standardized(d, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    standardized.col(i) =
        (data.features.col(i) - model.feature_mean).cwiseQuotient(model.feature_scale);
  }

  const Eigen::Index n_classes = static_cast<Eigen::Index>(data.class_index.size());
  model.weights = Eigen::MatrixXd::Zero(d, n_classes);
  model.biases = Eigen::VectorXd::Zero(n_classes);

  const long total_steps = static_cast<long>(config.epochs) * static_cast<long>(n);
  const long average_from = total_steps / 2;  // average the final half of the iterates
  const double radius = 1.0 / std::sqrt(config.lambda);

  for (Eigen::Index c = 0; c < n_classes; ++c) {
    Eigen::VectorXd sign(n);
    for (Eigen::Index i = 0; i < n; ++i)
      sign[i] = data.labels[static_cast<std::size_t>(i)] == data.class_index[static_cast<std::size_t>(c)]
                    ? 1.0
                    : -1.0;

    // Per-class generator so the binary problems stay independent.
    std::mt19937 rng(config.seed + 1000003u * (static_cast<std::uint32_t>(c) + 1u));
    std::vector<int> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = static_cast<int>(i);

    // The bias rides along as a regularized weight on a constant feature;
    // a free bias under the 1/(lambda*t) step takes unbounded early kicks
    // that the averaged iterates cannot recover from.
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
    Eigen::VectorXd w_sum = Eigen::VectorXd::Zero(d + 1);
    long averaged = 0;
    long t = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      seeded_shuffle(order, rng);
      for (int i : order) {
        ++t;
        const double step = 1.0 / (config.lambda * static_cast<double>(t));
        const double margin = sign[i] * (w.head(d).dot(standardized.col(i)) + w[d]);
        w *= 1.0 - step * config.lambda;
        if (margin < 1.0) {
          w.head(d) += step * sign[i] * standardized.col(i);
          w[d] += step * sign[i];
        }
        const double norm = w.norm();
        if (norm > radius) w *= radius / norm;
        if (t > average_from) {
          w_sum += w;
          ++averaged;
        }
      }
    }

    w_sum /= static_cast<double>(averaged);
    model.weights.col(c) = w_sum.head(d);
    model.biases[c] = w_sum[d];
  }
  return model;
}

Prediction predict(const ClassifierModel& model, const Eigen::VectorXd& feature) {
  if (feature.size() != model.dim())
    fail(errc::dimension_mismatch, "feature of length " + std::to_string(feature.size()) +
                                       ", model expects " + std::to_string(model.dim()));
  const Eigen::VectorXd standardized =
      (feature - model.feature_mean).cwiseQuotient(model.feature_scale);
  Prediction prediction;
  prediction.scores = model.weights.transpose() * standardized + model.biases;
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < prediction.scores.size(); ++c) {
    if (prediction.scores[c] > prediction.scores[best]) best = c;  // ties keep the earlier class
  }
  prediction.label = model.class_index[static_cast<std::size_t>(best)];
  return prediction;
}

namespace {

void write_vector(std::ofstream& out, const Eigen::VectorXd& values) {
  char buf[40];
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), " %.12g", values[i]);
    out << buf;
  }
}

}  // namespace

void save_model(const ClassifierModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot open '" + path + "' for writing");
  out << "cloudsort-svm v1\n";
  out << "dim " << model.dim() << "\n";
  out << "classes";
  for (const auto& c : model.class_index) out << " " << c;
  out << "\n";
  out << "mean";
  write_vector(out, model.feature_mean);
  out << "\nstd";
  write_vector(out, model.feature_scale);
  out << "\n";
  char buf[40];
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(model.class_index.size()); ++c) {
    out << "w " << model.class_index[static_cast<std::size_t>(c)];
    write_vector(out, model.weights.col(c));
    std::snprintf(buf, sizeof(buf), " %.12g", model.biases[c]);
    out << buf << "\n";
  }
  if (!out) fail(errc::io_error, "failed writing '" + path + "'");
}

ClassifierModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open '" + path + "' for reading");

  std::string line;
  if (!std::getline(in, line) || line != "cloudsort-svm v1")
    fail(errc::malformed_model, "missing 'cloudsort-svm v1' header");

  ClassifierModel model;
  long dim = 0;
  {
    std::string key;
    if (!std::getline(in, line)) fail(errc::malformed_model, "missing dim line");
    std::istringstream tokens(line);
    if (!(tokens >> key >> dim) || key != "dim" || dim < 1)
      fail(errc::malformed_model, "bad dim line");
  }
  {
    std::string key;
    if (!std::getline(in, line)) fail(errc::malformed_model, "missing classes line");
    std::istringstream tokens(line);
    if (!(tokens >> key) || key != "classes") fail(errc::malformed_model, "bad classes line");
    std::string name;
    while (tokens >> name) model.class_index.push_back(name);
    if (model.class_index.empty()) fail(errc::malformed_model, "no classes listed");
  }

  auto read_vector = [&](const std::string& expected_key, Eigen::VectorXd& values) {
    if (!std::getline(in, line)) fail(errc::malformed_model, "missing " + expected_key + " line");
    std::istringstream tokens(line);
    std::string key;
    if (!(tokens >> key) || key != expected_key)
      fail(errc::malformed_model, "bad " + expected_key + " line");
    values.resize(dim);
    for (long i = 0; i < dim; ++i) {
      if (!(tokens >> values[i]))
        fail(errc::malformed_model, expected_key + " line shorter than dim");
    }
  };
  read_vector("mean", model.feature_mean);
  read_vector("std", model.feature_scale);

  const std::size_t n_classes = model.class_index.size();
  model.weights.resize(dim, static_cast<Eigen::Index>(n_classes));
  model.biases.resize(static_cast<Eigen::Index>(n_classes));
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (!std::getline(in, line)) fail(errc::malformed_model, "missing weight line");
    std::istringstream tokens(line);
    std::string key, name;
    if (!(tokens >> key >> name) || key != "w" || name != model.class_index[c])
      fail(errc::malformed_model, "weight lines must follow the classes order");
    for (long i = 0; i < dim; ++i) {
      if (!(tokens >> model.weights(i, static_cast<Eigen::Index>(c))))
        fail(errc::malformed_model, "weight line shorter than dim");
    }
    if (!(tokens >> model.biases[static_cast<Eigen::Index>(c)]))
      fail(errc::malformed_model, "weight line missing bias");
  }
  return model;
}

}  // namespace cloudsort
