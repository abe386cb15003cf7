#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cloudsort {

// Rows are actual classes, columns predicted classes.
struct ConfusionMatrix {
  std::vector<std::string> classes;
  Eigen::MatrixXi counts;
};

ConfusionMatrix confusion(const std::vector<std::string>& actual,
                          const std::vector<std::string>& predicted,
                          const std::vector<std::string>& classes);

// One-vs-all metrics; nullopt marks a 0/0 case, which is reported as "n/a"
// and is distinct from a true zero.
struct ClassMetrics {
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<double> f1;
};

ClassMetrics class_metrics(const ConfusionMatrix& cm, const std::string& cls);

std::string format_metric(const std::optional<double>& value);  // "n/a" when undefined

void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path);
void write_metrics_csv(const ConfusionMatrix& cm, const std::string& path);

// One dataset frame: <root>/<category>/<category>_<inst>/
// <category>_<inst>_<video>_<frame>.pcd
struct DatasetRecord {
  std::string path;
  std::string category;
  std::string instance;  // "<category>_<inst>"
  int video = 0;
  int frame = 0;
};

struct DatasetIndex {
  std::vector<DatasetRecord> records;
};

DatasetIndex scan_dataset_tree(const std::string& root);

// Seeded stratified sampling without replacement: train_count then test_count
// frames per category, disjoint.
std::pair<DatasetIndex, DatasetIndex> split_category_level(const DatasetIndex& index,
                                                           int train_count, int test_count,
                                                           std::uint32_t seed);

// Each of an instance's 3 videos is cut into three contiguous thirds by frame
// order (remainder frames go to the final third); of the 9 sub-sequences a
// seeded choice assigns train_seqs to train and test_seqs to test, whole
// sub-sequences only.
std::pair<DatasetIndex, DatasetIndex> split_alternating_contiguous(const DatasetIndex& index,
                                                                   int train_seqs, int test_seqs,
                                                                   std::uint32_t seed);

}  // namespace cloudsort
