#include "cloudsort/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <unordered_map>

#include "cloudsort/error.hpp"
#include "cloudsort/rng.hpp"

namespace cloudsort {

namespace {

std::unordered_map<std::string, int> index_of(const std::vector<std::string>& classes) {
  std::unordered_map<std::string, int> map;
  for (std::size_t i = 0; i < classes.size(); ++i) map[classes[i]] = static_cast<int>(i);
  return map;
}

}  // namespace

ConfusionMatrix confusion(const std::vector<std::string>& actual,
                          const std::vector<std::string>& predicted,
                          const std::vector<std::string>& classes) {
  if (actual.size() != predicted.size())
    fail(errc::length_mismatch, "actual and predicted label lists differ in length");
  const auto lookup = index_of(classes);
  ConfusionMatrix cm;
  cm.classes = classes;
  cm.counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(classes.size()),
                                    static_cast<Eigen::Index>(classes.size()));
  for (std::size_t k = 0; k < actual.size(); ++k) {
    const auto row = lookup.find(actual[k]);
    if (row == lookup.end()) fail(errc::unknown_label, "actual label '" + actual[k] + "'");
    const auto col = lookup.find(predicted[k]);
    if (col == lookup.end()) fail(errc::unknown_label, "predicted label '" + predicted[k] + "'");
    ++cm.counts(row->second, col->second);
  }
  return cm;
}

ClassMetrics class_metrics(const ConfusionMatrix& cm, const std::string& cls) {
  const auto it = std::find(cm.classes.begin(), cm.classes.end(), cls);
  if (it == cm.classes.end()) fail(errc::unknown_label, "class '" + cls + "'");
  const Eigen::Index i = it - cm.classes.begin();

  const long tp = cm.counts(i, i);
  const long fn = cm.counts.row(i).sum() - tp;
  const long fp = cm.counts.col(i).sum() - tp;

  ClassMetrics metrics;
  if (tp + fn > 0) metrics.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (tp + fp > 0) metrics.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (metrics.recall && metrics.precision) {
    const double p = *metrics.precision;
    const double r = *metrics.recall;
    metrics.f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  return metrics;
}

std::string format_metric(const std::optional<double>& value) {
  if (!value) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", *value);
  return buf;
}

void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot open '" + path + "' for writing");
  out << "actual\\predicted";
  for (const auto& c : cm.classes) out << "," << c;
  out << "\n";
  for (Eigen::Index i = 0; i < cm.counts.rows(); ++i) {
    out << cm.classes[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < cm.counts.cols(); ++j) out << "," << cm.counts(i, j);
    out << "\n";
  }
  if (!out) fail(errc::io_error, "failed writing '" + path + "'");
}

void write_metrics_csv(const ConfusionMatrix& cm, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot open '" + path + "' for writing");
  out << "class,recall,precision,f1\n";
  for (const auto& c : cm.classes) {
    const ClassMetrics m = class_metrics(cm, c);
    out << c << "," << format_metric(m.recall) << "," << format_metric(m.precision) << ","
        << format_metric(m.f1) << "\n";
  }
  if (!out) fail(errc::io_error, "failed writing '" + path + "'");
}

DatasetIndex scan_dataset_tree(const std::string& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) fail(errc::io_error, "'" + root + "' is not a directory");

  DatasetIndex index;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".pcd") continue;
    const std::string stem = entry.path().stem().string();

    // <category>_<inst>_<video>_<frame>; the category itself may contain
    // underscores, so parse numeric fields from the right.
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t pos = stem.find('_'); pos != std::string::npos;
         start = pos + 1, pos = stem.find('_', start))
      parts.push_back(stem.substr(start, pos - start));
    parts.push_back(stem.substr(start));
    if (parts.size() < 4) continue;

    auto numeric = [](const std::string& s) {
      return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    const std::string& frame_str = parts[parts.size() - 1];
    const std::string& video_str = parts[parts.size() - 2];
    const std::string& inst_str = parts[parts.size() - 3];
    if (!numeric(frame_str) || !numeric(video_str) || !numeric(inst_str)) continue;

    DatasetRecord record;
    record.path = entry.path().string();
    record.frame = std::stoi(frame_str);
    record.video = std::stoi(video_str);
    std::string category = parts[0];
    for (std::size_t i = 1; i + 3 < parts.size(); ++i) category += "_" + parts[i];
    record.category = category;
    record.instance = category + "_" + inst_str;
    index.records.push_back(std::move(record));
  }

  std::sort(index.records.begin(), index.records.end(),
            [](const DatasetRecord& a, const DatasetRecord& b) { return a.path < b.path; });
  return index;
}

std::pair<DatasetIndex, DatasetIndex> split_category_level(const DatasetIndex& index,
                                                           int train_count, int test_count,
                                                           std::uint32_t seed) {
  std::map<std::string, std::vector<const DatasetRecord*>> by_category;
  for (const auto& record : index.records) by_category[record.category].push_back(&record);

  DatasetIndex train, test;
  std::mt19937 rng(seed);
  for (auto& [category, records] : by_category) {
    if (static_cast<int>(records.size()) < train_count + test_count)
      fail(errc::insufficient_frames,
           "category '" + category + "' has " + std::to_string(records.size()) + " frames, needs " +
               std::to_string(train_count + test_count));
    seeded_shuffle(records, rng);
    for (int i = 0; i < train_count; ++i) train.records.push_back(*records[static_cast<std::size_t>(i)]);
    for (int i = 0; i < test_count; ++i)
      test.records.push_back(*records[static_cast<std::size_t>(train_count + i)]);
  }
  return {std::move(train), std::move(test)};
}

std::pair<DatasetIndex, DatasetIndex> split_alternating_contiguous(const DatasetIndex& index,
                                                                   int train_seqs, int test_seqs,
                                                                   std::uint32_t seed) {
  if (train_seqs + test_seqs > 9)
    fail(errc::insufficient_frames, "an instance only has 9 sub-sequences");

  std::map<std::string, std::map<int, std::vector<const DatasetRecord*>>> by_instance;
  for (const auto& record : index.records)
    by_instance[record.instance][record.video].push_back(&record);

  DatasetIndex train, test;
  std::mt19937 rng(seed);
  for (auto& [instance, videos] : by_instance) {
    if (videos.size() != 3)
      fail(errc::wrong_video_count, "instance '" + instance + "' has " +
                                        std::to_string(videos.size()) + " videos, expected 3");

    std::vector<std::vector<const DatasetRecord*>> subsequences;
    for (auto& [video, frames] : videos) {
      std::sort(frames.begin(), frames.end(),
                [](const DatasetRecord* a, const DatasetRecord* b) { return a->frame < b->frame; });
      const std::size_t third = frames.size() / 3;
      // Remainder frames stay with the final third.
      const std::array<std::pair<std::size_t, std::size_t>, 3> spans = {
          std::pair<std::size_t, std::size_t>{0, third},
          {third, 2 * third},
          {2 * third, frames.size()}};
      for (const auto& [begin, end] : spans) {
        std::vector<const DatasetRecord*> seq(frames.begin() + static_cast<long>(begin),
                                              frames.begin() + static_cast<long>(end));
        subsequences.push_back(std::move(seq));
      }
    }

    std::vector<int> order(subsequences.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    seeded_shuffle(order, rng);
    for (int i = 0; i < train_seqs; ++i) {
      for (const auto* record : subsequences[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])])
        train.records.push_back(*record);
    }
    for (int i = 0; i < test_seqs; ++i) {
      const int pick = order[static_cast<std::size_t>(train_seqs + i)];
      for (const auto* record : subsequences[static_cast<std::size_t>(pick)])
        test.records.push_back(*record);
    }
  }
  return {std::move(train), std::move(test)};
}

}  // namespace cloudsort
