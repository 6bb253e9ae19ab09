#include "aia/evaluator.hpp"

#include "aia/error.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace aia {

double f_measure(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0 ? 2.0 * precision * recall / sum : 0.0;
}

EvalReport evaluate(const Predictions& predictions, const AnnotatedDataset& truth, std::size_t tag_count) {
  const std::size_t m = truth.vocabulary().size();
  EvalReport report;
  report.per_keyword.resize(m);
  for (std::size_t j = 0; j < m; ++j) report.per_keyword[j].keyword = truth.vocabulary().keyword(j);

  std::vector<bool> seen(truth.size(), false);
  for (const auto& [id, tags] : predictions) {
    const auto image = truth.find_image(id);
    if (!image) throw DataError("prediction for unknown image " + id);
    if (seen[*image]) throw DataError("duplicate prediction row for image " + id);
    seen[*image] = true;
    if (tags.size() > tag_count) {
      throw DataError("image " + id + " has " + std::to_string(tags.size()) + " predicted tags, limit is " +
                      std::to_string(tag_count));
    }
    std::set<std::size_t> unique;
    for (std::size_t k : tags) {
      if (k >= m) throw DataError("image " + id + ": tag index " + std::to_string(k) + " out of range");
      if (!unique.insert(k).second) throw DataError("image " + id + ": duplicate predicted tag " + truth.vocabulary().keyword(k));
      auto& s = report.per_keyword[k];
      ++s.predicted;
      if (truth.annotations()(static_cast<Eigen::Index>(*image), static_cast<Eigen::Index>(k))) ++s.correct;
    }
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!seen[i]) throw DataError("no prediction for image " + truth.images()[i].id);
    for (std::size_t k : truth.images()[i].tag_indices) ++report.per_keyword[k].relevant;
  }

  double p_sum = 0, r_sum = 0;
  std::size_t p_n = 0, r_n = 0;
  for (auto& s : report.per_keyword) {
    s.in_precision_mean = s.predicted > 0 || s.relevant > 0;
    s.in_recall_mean = s.relevant > 0;
    s.precision = s.predicted > 0 ? static_cast<double>(s.correct) / static_cast<double>(s.predicted) : 0.0;
    s.recall = s.relevant > 0 ? static_cast<double>(s.correct) / static_cast<double>(s.relevant) : 0.0;
    if (s.in_precision_mean) {
      p_sum += s.precision;
      ++p_n;
    }
    if (s.in_recall_mean) {
      r_sum += s.recall;
      ++r_n;
    }
  }
  report.mean_precision = p_n ? p_sum / static_cast<double>(p_n) : 0.0;
  report.mean_recall = r_n ? r_sum / static_cast<double>(r_n) : 0.0;
  report.f_measure = f_measure(report.mean_precision, report.mean_recall);
  return report;
}

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "keyword,predicted,relevant,correct,precision,recall\n";
  char buf[256];
  for (const auto& s : report.per_keyword) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.6f,%.6f\n", s.predicted, s.relevant, s.correct, s.precision,
                  s.recall);
    out << s.keyword << ',' << buf;
  }
}

std::string summary_line(const EvalReport& report) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "P=%.4f R=%.4f F=%.4f", report.mean_precision, report.mean_recall,
                report.f_measure);
  return buf;
}

std::string report_table(const EvalReport& report, const std::string& model_name, const std::string& dataset_name) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %-16s %6s %6s %6s\n", "Model", "Dataset", "P", "R", "F");
  out << buf;
  std::snprintf(buf, sizeof buf, "%-24s %-16s %6.2f %6.2f %6.2f\n", model_name.c_str(), dataset_name.c_str(),
                report.mean_precision, report.mean_recall, report.f_measure);
  out << buf;
  return out.str();
}

}  // namespace aia
