// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include "aia/annotator.hpp"
#include "aia/attention.hpp"
#include "aia/dtcwt.hpp"
#include "aia/evaluator.hpp"
#include "aia/feature_file.hpp"
#include "aia/leae.hpp"
#include "aia/lowlevel.hpp"
#include "aia/pipeline.hpp"
#include "aia/recurrent_cell.hpp"
#include "../unit/gradient_fixture.hpp"
#include "../unit/helpers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

int cli(const std::vector<std::string>& args, std::string* log = nullptr) {
  std::ostringstream out, err;
  const int code = aia::run_cli(args, out, err);
  if (log) *log = out.str() + err.str();
  if (code != 0) std::fprintf(stderr, "command failed (%d): %s\n", code, err.str().c_str());
  return code;
}

// ---------------------------------------------------------------------------

Outcome logentropy_example() {
  aia::AnnotationMatrix phi(3, 3);
  phi << 1, 1, 1, 0, 1, 1, 0, 0, 1;
  const aia::EquilibriumMatrix w = aia::logentropy_weights(phi);
  const bool ok = w(0, 0) == 1.0 && w(0, 1) >= 0.36 && w(0, 1) <= 0.37 && w(0, 2) == 0.0;
  return {ok, fmt("w11=%.17g w12=%.6f", w(0, 0), w(0, 1)) + fmt(" w13=%.17g", w(0, 2))};
}

Outcome fmeasure_rows() {
  const double a = aia::f_measure(0.28, 0.96);
  const double b = aia::f_measure(0.54, 0.37);
  const bool ok = std::round(a * 100) == 43 && std::round(b * 100) == 44;
  return {ok, fmt("f(0.28,0.96)=%.4f f(0.54,0.37)=%.4f", a, b)};
}

Outcome dtcwt_round_trip() {
  aia::Rng rng(100);
  double worst = 0;
  bool dims_ok = true;
  for (int i = 0; i < 100; ++i) {
    const int size = i % 2 ? 64 : 32;
    const int rows = size, cols = (i % 4 < 2) ? size : 2 * size;
    const Eigen::MatrixXd img = testing::random_matrix(rng, rows, cols, 0, 255);
    const aia::SubbandSet s = aia::dtcwt_forward(img, 4);
    worst = std::max(worst, (aia::dtcwt_inverse(s) - img).cwiseAbs().maxCoeff());
    for (const auto& m : s.final_level_matrices()) dims_ok = dims_ok && m.rows() == rows / 16 && m.cols() == cols / 16;
  }
  return {worst < 1e-6 && dims_ok, fmt("max |x - inverse(forward(x))| = %.3e, final dims W/16 x H/16: ", worst) +
                                       (dims_ok ? "yes" : "no")};
}

Outcome svd_oracle() {
  aia::Rng rng(50);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const int rows = 1 + static_cast<int>(rng.below(16));
    const int cols = 1 + static_cast<int>(rng.below(16));
    const Eigen::MatrixXd m = testing::random_matrix(rng, rows, cols);
    const Eigen::VectorXd s = aia::svd_values(m);
    const std::vector<double> eig = testing::jacobi_eigenvalues(m.transpose() * m);
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      const double oracle = std::sqrt(std::max(0.0, eig[static_cast<std::size_t>(k)]));
      worst = std::max(worst, std::abs(s[k] - oracle) / s[k]);
    }
  }
  return {worst < 1e-8, fmt("worst relative difference %.3e", worst)};
}

Outcome attention_normalization() {
  aia::Rng rng(1000);
  double worst_norm = 0, worst_lit = 0, worst_shift = 0;
  bool nonneg = true;
  for (int i = 0; i < 1000; ++i) {
    const Eigen::VectorXd zeta = testing::random_vector(rng, 1 + static_cast<int>(rng.below(10)), -10, 10);
    const Eigen::VectorXd rho = testing::random_vector(rng, 1 + static_cast<int>(rng.below(10)), -10, 10);
    const double tau = rng.uniform();
    Eigen::VectorXd g, x, g2, x2;
    aia::attention_weights(zeta, rho, tau, aia::TauMode::normalized, g, x);
    worst_norm = std::max(worst_norm, std::abs(g.sum() + x.sum() - 1.0));
    nonneg = nonneg && g.minCoeff() >= 0 && x.minCoeff() >= 0;
    const Eigen::VectorXd shifted = (zeta.array() + rng.uniform(-100, 100)).matrix();
    aia::attention_weights(shifted, rho, tau, aia::TauMode::normalized, g2, x2);
    worst_shift = std::max(worst_shift, (g - g2).cwiseAbs().maxCoeff());
    aia::attention_weights(zeta, rho, 0.5 * tau, aia::TauMode::literal, g, x);
    worst_lit = std::max(worst_lit, std::abs(g.sum() + x.sum() - 0.5));
    nonneg = nonneg && g.minCoeff() >= 0 && x.minCoeff() >= 0;
  }
  const bool ok = worst_norm <= 1e-9 && worst_lit <= 1e-9 && worst_shift <= 1e-12 && nonneg;
  return {ok, fmt("|sum-1| %.1e, |sum-1/2| %.1e", worst_norm, worst_lit) + fmt(", shift %.1e", worst_shift)};
}

Outcome gradient_suite() {
  bool ok = true;
  std::string detail;
  for (aia::TauMode mode : {aia::TauMode::normalized, aia::TauMode::literal}) {
    testing::GradientFixture f = testing::gradient_fixture(2024, mode);
    const auto errors = testing::gradient_errors(f);
    double worst = 0;
    for (const char* group : {"attention", "tau", "leae", "cell", "output", "embedding"}) {
      const auto it = errors.find(group);
      if (it == errors.end() || it->second.analytic_norm == 0.0) {
        ok = false;
        detail += std::string(" missing ") + group;
        continue;
      }
      worst = std::max(worst, it->second.relative);
      ok = ok && it->second.relative < 1e-4;
    }
    detail += (detail.empty() ? "" : "; ") + aia::to_string(mode) + fmt(" worst group rel. error %.2e", worst);
  }
  return {ok, detail};
}

Outcome cell_limits() {
  aia::Rng rng(7);
  aia::CellParams p = aia::CellParams::random(6, 4, rng, 0.5);
  const Eigen::VectorXd h = testing::random_vector(rng, 6);
  Eigen::VectorXd x = testing::random_vector(rng, 4);
  x[3] = 1.0;
  p.w_z.setZero();
  p.w_z.col(6 + 3).setConstant(-30.0);
  const double closed = (aia::cell_step(p, h, x) - h).cwiseAbs().maxCoeff();
  p.w_z.col(6 + 3).setConstant(30.0);
  aia::CellTrace t;
  const Eigen::VectorXd open = aia::cell_step(p, h, x, &t);
  const double opened = (open - t.h_tilde).cwiseAbs().maxCoeff();
  return {closed < 1e-12 && opened < 1e-12, fmt("z->0: %.2e, z->1: %.2e", closed, opened)};
}

// ---------------------------------------------------------------------------

std::vector<double> loss_curve(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<double> out;
  while (std::getline(in, line)) out.push_back(std::stod(line.substr(line.find(',') + 1)));
  return out;
}

// Mean recall over the three keywords with the fewest relevant images.
double rare_recall(const fs::path& report_csv, std::string* names) {
  std::ifstream in(report_csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::tuple<std::size_t, std::string, double>> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::istringstream s(line);
    for (std::string c; std::getline(s, c, ',');) f.push_back(c);
    rows.emplace_back(std::stoul(f[2]), f[0], std::stod(f[5]));
  }
  std::sort(rows.begin(), rows.end());
  double sum = 0;
  for (int k = 0; k < 3; ++k) {
    sum += std::get<2>(rows[static_cast<std::size_t>(k)]);
    if (names) *names += (k ? "," : "") + std::get<1>(rows[static_cast<std::size_t>(k)]);
  }
  return sum / 3.0;
}

// synth, extract, train, annotate, eval in `dir`; returns false on any failure.
bool full_pipeline(const fs::path& dir, const std::vector<std::string>& extra = {}) {
  if (cli({"synth", "--seed", "7", "--synth_images", "60", "--synth_keywords", "10", "--synth_skew", "16",
           "--output_dir", dir.string()}) != 0) {
    return false;
  }
  const std::string cfg = (dir / "run.cfg").string();
  for (const char* cmd : {"extract", "train", "annotate", "eval"}) {
    std::vector<std::string> args{cmd, "-c", cfg};
    args.insert(args.end(), extra.begin(), extra.end());
    if (cli(args) != 0) return false;
  }
  return true;
}

struct SharedRuns {
  testing::TempDir root{"acceptance"};
  bool balanced_ok = false;
  double seconds = 0;
};

SharedRuns& runs() {
  static SharedRuns r;
  return r;
}

Outcome end_to_end() {
  SharedRuns& r = runs();
  const fs::path balanced = r.root / "balanced";
  const auto t0 = std::chrono::steady_clock::now();
  r.balanced_ok = full_pipeline(balanced);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!r.balanced_ok) return {false, "balanced pipeline failed"};

  // identical seed and features, every keyword weight 1
  const fs::path flat = r.root / "unbalanced";
  const std::string cfg = (balanced / "run.cfg").string();
  const std::vector<std::string> common{"-c", cfg, "--output_dir", flat.string(), "--balanced", "false",
                                        "--ll_features", (balanced / "lowlevel.feat").string(),
                                        "--hl_features", (balanced / "highlevel.feat").string()};
  for (const char* cmd : {"train", "annotate", "eval"}) {
    std::vector<std::string> args{cmd};
    args.insert(args.end(), common.begin(), common.end());
    if (cli(args) != 0) return {false, std::string("unbalanced ") + cmd + " failed"};
  }

  const std::vector<double> curve = loss_curve(balanced / "loss_curve.csv");
  const double drop = 1.0 - curve.back() / curve.front();
  std::string rare;
  const double rb = rare_recall(balanced / "eval_report.csv", &rare);
  const double ru = rare_recall(flat / "eval_report.csv", nullptr);
  const bool ok = r.seconds < 600 && drop >= 0.5 && rb >= ru;
  return {ok, fmt("pipeline %.1f s, loss drop %.1f%%", r.seconds, 100 * drop) +
                  fmt(", rare-3 recall balanced %.3f vs unweighted %.3f", rb, ru) + " (" + rare + ")"};
}

Outcome determinism() {
  SharedRuns& r = runs();
  if (!r.balanced_ok) return {false, "first pipeline run unavailable"};
  const fs::path again = r.root / "repeat";
  if (!full_pipeline(again)) return {false, "repeat pipeline failed"};
  std::string differing;
  for (const char* name : {"lowlevel.feat", "highlevel.feat", "model.ckpt", "predictions.tsv", "eval_report.csv",
                           "eval_summary.txt", "loss_curve.csv"}) {
    if (aia::read_bytes(r.root / "balanced" / name) != aia::read_bytes(again / name)) differing += std::string(" ") + name;
  }
  if (!differing.empty()) return {false, "differs:" + differing};
  return {true, "features, checkpoint, predictions and reports byte-identical across two runs"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"log-entropy weights of the three-image example", 1, logentropy_example},
      {"f-measure of the reported precision/recall rows", 1, fmeasure_rows},
      {"DT-CWT perfect reconstruction and final subband size", 30, dtcwt_round_trip},
      {"singular values against a Jacobi eigen oracle", 5, svd_oracle},
      {"attention weight normalization and shift invariance", 5, attention_normalization},
      {"gradient suite against central differences", 60, gradient_suite},
      {"recurrent cell update-gate limits", 1, cell_limits},
      {"end-to-end synthetic run", 600, end_to_end},
      {"determinism of the full pipeline", 600, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (seconds > c.budget_seconds) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", c.budget_seconds);
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s  %s  [%.2f s]  %s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), seconds, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
