#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "cloudsort/point_cloud.hpp"

namespace cloudsort {

// Labeled feature vectors of uniform dimension. class_index lists the
// distinct labels in first-appearance order; that order is the tie-break
// rule at prediction time.
struct TrainingSet {
  Eigen::MatrixXd features;  // d x n, one column per sample
  std::vector<std::string> labels;
  std::vector<std::string> class_index;
};

TrainingSet make_training_set(Eigen::MatrixXd features, std::vector<std::string> labels);

struct TrainConfig {
  double lambda = 1e-4;
  int epochs = 50;
  std::uint32_t seed = 0;
};

// One-vs-rest linear maximum-margin model. Features are standardized inside
// the model (per-dimension mean/scale from the training data), so callers
// always pass raw descriptors.
struct ClassifierModel {
  std::vector<std::string> class_index;
  Eigen::MatrixXd weights;  // d x C
  Eigen::VectorXd biases;   // C
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;
  TrainConfig config;

  Eigen::Index dim() const { return weights.rows(); }
};

// Per class: minimize lambda/2 |w|^2 + mean hinge loss by stochastic
// subgradient descent with step 1/(lambda*t), a seeded shuffle per epoch, and
// iterate averaging over the final half of the updates. Deterministic for a
// fixed seed.
ClassifierModel train(const TrainingSet& data, const TrainConfig& config = {});

struct Prediction {
  std::string label;
  Eigen::VectorXd scores;  // per class, class_index order
};

Prediction predict(const ClassifierModel& model, const Eigen::VectorXd& feature);

// Text format: header "cloudsort-svm v1", then dim/classes/mean/std lines and
// one "w <class> <d values> <bias>" line per class, 12 significant digits.
void save_model(const ClassifierModel& model, const std::string& path);
ClassifierModel load_model(const std::string& path);

}  // namespace cloudsort
