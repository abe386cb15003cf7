#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "cloudsort/classifier.hpp"
#include "cloudsort/error.hpp"
#include "cloudsort/rng.hpp"
#include "support/synthetic.hpp"

using namespace cloudsort;
using namespace cloudsort::testsupport;

namespace {

// Two Gaussian blobs around +-center with the requested separation.
TrainingSet two_blobs(int per_class, int dim, double center, double spread, std::uint32_t seed) {
  std::mt19937 rng(seed);
  Eigen::MatrixXd features(dim, 2 * per_class);
  std::vector<std::string> labels;
  for (int i = 0; i < 2 * per_class; ++i) {
    const bool positive = i % 2 == 0;
    for (int j = 0; j < dim; ++j) {
      const double base = j == 0 ? (positive ? center : -center) : 0.0;
      features(j, i) = base + spread * gaussian(rng);
    }
    labels.push_back(positive ? "A" : "B");
  }
  return make_training_set(std::move(features), std::move(labels));
}

double training_accuracy(const ClassifierModel& model, const TrainingSet& data) {
  long correct = 0;
  for (Eigen::Index i = 0; i < data.features.cols(); ++i) {
    if (predict(model, data.features.col(i)).label == data.labels[static_cast<std::size_t>(i)])
      ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.features.cols());
}

}  // namespace

TEST_CASE("train separates a 1-D two-class problem") {
  Eigen::MatrixXd features(1, 6);
  features << -1, 1, -1, 1, -1.2, 0.8;
  const TrainingSet data =
      make_training_set(features, {"A", "B", "A", "B", "A", "B"});
  const ClassifierModel model = train(data);

  Eigen::VectorXd x(1);
  x << -1.0;
  CHECK(predict(model, x).label == "A");
  x << 1.0;
  CHECK(predict(model, x).label == "B");
}

TEST_CASE("train reaches 100% on separable 2-D blobs") {
  const TrainingSet data = two_blobs(100, 2, 2.0, 0.3, 3);
  const ClassifierModel model = train(data);
  CHECK(training_accuracy(model, data) == 1.0);
}

TEST_CASE("training on identical features completes and predicts deterministically") {
  Eigen::MatrixXd features = Eigen::MatrixXd::Constant(4, 10, 0.5);
  std::vector<std::string> labels;
  for (int i = 0; i < 10; ++i) labels.push_back(i < 5 ? "A" : "B");
  const TrainingSet data = make_training_set(features, labels);
  const ClassifierModel model = train(data);
  const Prediction p = predict(model, Eigen::VectorXd::Constant(4, 0.5));
  CHECK((p.label == "A" || p.label == "B"));
  CHECK(predict(model, Eigen::VectorXd::Constant(4, 0.5)).label == p.label);
}

TEST_CASE("bias-only argmax follows class order on ties") {
  ClassifierModel model;
  model.class_index = {"A", "B"};
  model.weights = Eigen::MatrixXd::Zero(3, 2);
  model.biases = Eigen::VectorXd::Zero(2);
  model.biases << 1.0, 0.0;
  model.feature_mean = Eigen::VectorXd::Zero(3);
  model.feature_scale = Eigen::VectorXd::Ones(3);
  CHECK(predict(model, Eigen::VectorXd::Random(3)).label == "A");

  model.biases << 0.5, 0.5;  // exact tie -> first registered class
  CHECK(predict(model, Eigen::VectorXd::Random(3)).label == "A");
}

TEST_CASE("training is deterministic for a fixed seed") {
  const TrainingSet data = two_blobs(40, 5, 1.0, 0.5, 11);
  TrainConfig config;
  config.seed = 1234;
  const ClassifierModel a = train(data, config);
  const ClassifierModel b = train(data, config);
  CHECK(exact_equal(a.weights, b.weights));
  CHECK(exact_equal(a.biases, b.biases));
  CHECK(exact_equal(a.feature_mean, b.feature_mean));
  CHECK(exact_equal(a.feature_scale, b.feature_scale));
}

TEST_CASE("standardization parameters live in the model") {
  Eigen::MatrixXd features(2, 4);
  features << 10, 12, 14, 16,
      1000, 1002, 998, 1004;
  const TrainingSet data = make_training_set(features, {"A", "B", "A", "B"});
  const ClassifierModel model = train(data);
  CHECK(model.feature_mean[0] == doctest::Approx(13.0));
  CHECK(model.feature_mean[1] == doctest::Approx(1001.0));
  CHECK(model.feature_scale[0] > 0.0);
  CHECK(model.feature_scale[1] > 0.0);
  // raw and externally standardized inputs must not be interchangeable
  const Eigen::VectorXd raw = features.col(0);
  const Eigen::VectorXd pre_scaled = (raw - model.feature_mean).cwiseQuotient(model.feature_scale);
  CHECK_FALSE(exact_equal(predict(model, raw).scores, predict(model, pre_scaled).scores));
}

TEST_CASE("separable sets with margin 0.1 after standardization train to 100%") {
  // Labels follow the sign of coordinate 0, whose magnitude stays in
  // [gap, spread]; the separator x0=0 then has standardized margin
  // gap/std(x0), kept just above 0.1.
  std::mt19937 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 100 + static_cast<int>(uniform_index(rng, 900));
    const int dim = 2 + static_cast<int>(uniform_index(rng, 20));
    const double gap = 0.2;
    const double spread = 2.0;  // std(x0) ~ 1.2, margin ~ 0.16

    Eigen::MatrixXd features(dim, n);
    std::vector<std::string> labels;
    for (int i = 0; i < n; ++i) {
      const double sign = i % 2 == 0 ? 1.0 : -1.0;
      features(0, i) = sign * uniform_real(rng, gap, spread);
      for (int j = 1; j < dim; ++j) features(j, i) = gaussian(rng);
      labels.push_back(sign > 0 ? "A" : "B");
    }
    const TrainingSet data = make_training_set(std::move(features), std::move(labels));
    const ClassifierModel model = train(data);
    CHECK(training_accuracy(model, data) == 1.0);
  }
}

TEST_CASE("multi-class one-vs-rest separates three blobs") {
  std::mt19937 rng(19);
  const int per_class = 60;
  Eigen::MatrixXd features(3, 3 * per_class);
  std::vector<std::string> labels;
  const char* names[3] = {"x", "y", "z"};
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < per_class; ++i) {
      Eigen::Vector3d center = Eigen::Vector3d::Zero();
      center[c] = 2.0;
      features.col(c * per_class + i) =
          center + 0.3 * Eigen::Vector3d(gaussian(rng), gaussian(rng), gaussian(rng));
      labels.push_back(names[c]);
    }
  }
  const TrainingSet data = make_training_set(features, labels);
  const ClassifierModel model = train(data);
  CHECK(training_accuracy(model, data) == 1.0);
}

TEST_CASE("train rejects single-class data and bad dimensions") {
  Eigen::MatrixXd features = Eigen::MatrixXd::Random(3, 5);
  CHECK_THROWS_WITH_AS(train(make_training_set(features, {"A", "A", "A", "A", "A"})),
                       doctest::Contains("SingleClass"), Error);

  const TrainingSet data = two_blobs(10, 3, 1.0, 0.2, 23);
  const ClassifierModel model = train(data);
  CHECK_THROWS_WITH_AS(predict(model, Eigen::VectorXd::Zero(7)),
                       doctest::Contains("DimensionMismatch"), Error);
}

TEST_CASE("model save/load round-trips predictions") {
  TempDir dir;
  const TrainingSet data = two_blobs(30, 8, 1.0, 0.4, 29);
  const ClassifierModel model = train(data);
  const std::string path = dir.file("model.txt");
  save_model(model, path);
  const ClassifierModel loaded = load_model(path);

  std::mt19937 rng(31);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x(8);
    for (int j = 0; j < 8; ++j) x[j] = uniform_real(rng, -2, 2);
    const Prediction a = predict(model, x);
    const Prediction b = predict(loaded, x);
    CHECK(a.label == b.label);
    CHECK((a.scores - b.scores).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("model file shape: header plus one weight line per class") {
  TempDir dir;
  std::mt19937 rng(37);
  const int classes = 10;
  const int dim = 500;
  Eigen::MatrixXd features(dim, 2 * classes);
  std::vector<std::string> labels;
  for (int c = 0; c < classes; ++c) {
    for (int rep = 0; rep < 2; ++rep) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
      x[c] = 1.0;
      x[dim - 1 - c] = uniform_real(rng, 0.1, 0.9);
      features.col(2 * c + rep) = x;
      labels.push_back("class" + std::to_string(c));
    }
  }
  const ClassifierModel model = train(make_training_set(features, labels), {1e-4, 5, 0});
  const std::string path = dir.file("big.txt");
  save_model(model, path);

  std::ifstream in(path);
  std::string line;
  int lines = 0;
  int weight_lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    if (line.rfind("w ", 0) == 0) ++weight_lines;
  }
  CHECK(lines == 5 + classes);  // header, dim, classes, mean, std + weights
  CHECK(weight_lines == classes);
}

TEST_CASE("load_model rejects truncated files") {
  TempDir dir;
  const TrainingSet data = two_blobs(10, 4, 1.0, 0.3, 41);
  const ClassifierModel model = train(data);
  const std::string path = dir.file("model.txt");
  save_model(model, path);

  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  const std::string truncated_path = dir.file("truncated.txt");
  std::ofstream out(truncated_path);
  out << content.substr(0, content.size() / 2);
  out.close();
  CHECK_THROWS_WITH_AS(load_model(truncated_path), doctest::Contains("MalformedModel"), Error);
}
