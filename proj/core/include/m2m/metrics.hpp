#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "m2m/dataset.hpp"
#include "m2m/net.hpp"

namespace m2m {

/// Balanced evaluation summary. Confusion rows are true classes, columns
/// predictions. bACC is the arithmetic mean of per-class recall, GM the
/// geometric mean (exactly 0 when any class has zero recall; no smoothing).
struct EvalReport {
  std::vector<std::vector<long>> confusion;
  std::vector<long> test_class_counts;
  std::vector<double> recall;
  double bacc = 0.0;
  double gm = 0.0;
  std::vector<int> major_classes;
  std::vector<int> minor_classes;
  double major_bacc = 0.0;  // mean recall over major_classes (when split known)
  double minor_bacc = 0.0;
  std::vector<long> cumulative_fp;
  long test_size = 0;
};

/// Evaluates the classifier on a test set. Argmax ties break toward the
/// lower class index. Throws EvalError when a test class is empty. The
/// train_counts overload also fills the major/minor split and its recalls.
EvalReport evaluate(const DenseNet& net, const LabeledDataset& test);
EvalReport evaluate(const DenseNet& net, const LabeledDataset& test,
                    std::span<const int> train_counts);

/// Majority classes are the smallest prefix of the (non-increasing) counts
/// whose sum strictly exceeds half the total; the rest are minority.
std::pair<std::vector<int>, std::vector<int>> major_minor_split(std::span<const int> counts);

/// FP_k = column sum minus diagonal at k; the curve is the running sum from
/// the most frequent class, ending at the total off-diagonal mass.
std::vector<long> cumulative_fp_curve(const std::vector<std::vector<long>>& confusion);

/// Geometric mean of recalls; exactly 0 when any recall is 0.
double geometric_mean(std::span<const double> recalls);

/// Epsilon-smoothed variant for log-scale plotting only; never used for
/// reported metrics.
double geometric_mean_smoothed(std::span<const double> recalls, double eps = 1e-3);

/// Internal consistency checks (row sums, metric bounds, curve endpoint).
/// Throws EvalError on violation.
void validate_report(const EvalReport& report);

std::string report_to_json(const EvalReport& report);
void write_report_json(const EvalReport& report, const std::filesystem::path& file);
EvalReport read_report_json(const std::filesystem::path& file);

/// Curve as CSV rows "class_index,cumulative_false_positives".
void write_fp_curve_csv(const EvalReport& report, const std::filesystem::path& file);

}  // namespace m2m
