#pragma once

#include "aia/dataset.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace aia {

struct KeywordScore {
  std::string keyword;
  std::size_t predicted = 0;
  std::size_t relevant = 0;
  std::size_t correct = 0;
  double precision = 0.0;
  double recall = 0.0;
  bool in_precision_mean = false;  // predicted or relevant at least once
  bool in_recall_mean = false;     // relevant at least once
};

struct EvalReport {
  std::vector<KeywordScore> per_keyword;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double f_measure = 0.0;
};

/// Harmonic mean 2pr / (p + r); 0 when both are 0.
double f_measure(double precision, double recall);

using Predictions = std::vector<std::pair<std::string, std::vector<std::size_t>>>;

/// Per-keyword precision/recall over the images in `truth`. Every truth image
/// needs a prediction row with at most `tag_count` distinct tags. Precision of a
/// keyword that is relevant but never predicted is 0; a keyword never predicted
/// and never relevant is left out of both means; recall is only averaged over
/// relevant keywords. Means are unweighted.
EvalReport evaluate(const Predictions& predictions, const AnnotatedDataset& truth, std::size_t tag_count = 5);

/// `keyword,predicted,relevant,correct,precision,recall` rows.
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);
std::string summary_line(const EvalReport& report);
/// Plain-text table in the P / R / F column layout.
std::string report_table(const EvalReport& report, const std::string& model_name, const std::string& dataset_name);

}  // namespace aia
