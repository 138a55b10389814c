#include "m2m/metrics.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "m2m/error.hpp"

namespace m2m {

namespace {

EvalReport evaluate_impl(const DenseNet& net, const LabeledDataset& test,
                         const int* train_counts, std::size_t train_count_size) {
  const int k = test.num_classes();
  if (static_cast<std::size_t>(k) != net.output_dim())
    throw EvalError("evaluate: test class count does not match net output width");
  for (int c = 0; c < k; ++c)
    if (test.indices_of_class(c).empty())
      throw EvalError("evaluate: empty test class " + std::to_string(c));

  EvalReport report;
  report.confusion.assign(static_cast<std::size_t>(k), std::vector<long>(k, 0));
  report.test_size = static_cast<long>(test.size());

  const Matrix logits = net.forward(test.inputs());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto row = logits.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
      if (row[j] > row[best]) best = j;  // ties keep the lower index
    report.confusion[static_cast<std::size_t>(test.label(i))][best] += 1;
  }

  report.test_class_counts.resize(static_cast<std::size_t>(k));
  report.recall.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    long row_sum = 0;
    for (long v : report.confusion[static_cast<std::size_t>(c)]) row_sum += v;
    report.test_class_counts[static_cast<std::size_t>(c)] = row_sum;
    report.recall[static_cast<std::size_t>(c)] =
        static_cast<double>(report.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)]) /
        static_cast<double>(row_sum);
  }
  report.bacc = std::accumulate(report.recall.begin(), report.recall.end(), 0.0) /
                static_cast<double>(k);
  report.gm = geometric_mean(report.recall);
  report.cumulative_fp = cumulative_fp_curve(report.confusion);

  if (train_counts) {
    auto [major, minor] =
        major_minor_split(std::span<const int>(train_counts, train_count_size));
    report.major_classes = std::move(major);
    report.minor_classes = std::move(minor);
    auto mean_recall = [&](const std::vector<int>& classes) {
      if (classes.empty()) return 0.0;
      double sum = 0.0;
      for (int c : classes) sum += report.recall[static_cast<std::size_t>(c)];
      return sum / static_cast<double>(classes.size());
    };
    report.major_bacc = mean_recall(report.major_classes);
    report.minor_bacc = mean_recall(report.minor_classes);
  }
  return report;
}

}  // namespace

EvalReport evaluate(const DenseNet& net, const LabeledDataset& test) {
  return evaluate_impl(net, test, nullptr, 0);
}

EvalReport evaluate(const DenseNet& net, const LabeledDataset& test,
                    std::span<const int> train_counts) {
  if (train_counts.size() != static_cast<std::size_t>(test.num_classes()))
    throw EvalError("evaluate: train counts do not match test classes");
  return evaluate_impl(net, test, train_counts.data(), train_counts.size());
}

std::pair<std::vector<int>, std::vector<int>> major_minor_split(std::span<const int> counts) {
  long total = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (k > 0 && counts[k] > counts[k - 1])
      throw DomainError("major_minor_split: counts must be non-increasing");
    total += counts[k];
  }
  std::vector<int> major, minor;
  long prefix = 0;
  std::size_t k = 0;
  for (; k < counts.size(); ++k) {
    prefix += counts[k];
    major.push_back(static_cast<int>(k));
    if (2 * prefix > total) break;  // strictly exceeds 50%
  }
  for (++k; k < counts.size(); ++k) minor.push_back(static_cast<int>(k));
  return {std::move(major), std::move(minor)};
}

std::vector<long> cumulative_fp_curve(const std::vector<std::vector<long>>& confusion) {
  const std::size_t k = confusion.size();
  for (const auto& row : confusion)
    if (row.size() != k) throw ShapeError("cumulative_fp_curve: confusion matrix not square");
  std::vector<long> curve(k, 0);
  long running = 0;
  for (std::size_t j = 0; j < k; ++j) {
    long col = 0;
    for (std::size_t i = 0; i < k; ++i) col += confusion[i][j];
    running += col - confusion[j][j];
    curve[j] = running;
  }
  return curve;
}

double geometric_mean(std::span<const double> recalls) {
  double log_sum = 0.0;
  for (double r : recalls) {
    if (r <= 0.0) return 0.0;
    log_sum += std::log(r);
  }
  return std::exp(log_sum / static_cast<double>(recalls.size()));
}

double geometric_mean_smoothed(std::span<const double> recalls, double eps) {
  double log_sum = 0.0;
  for (double r : recalls) log_sum += std::log(std::max(r, eps));
  return std::exp(log_sum / static_cast<double>(recalls.size()));
}

void validate_report(const EvalReport& report) {
  const std::size_t k = report.confusion.size();
  if (k == 0) throw EvalError("report: empty confusion matrix");
  long total = 0, trace = 0;
  for (std::size_t i = 0; i < k; ++i) {
    long row_sum = 0;
    for (long v : report.confusion[i]) {
      if (v < 0) throw EvalError("report: negative confusion entry");
      row_sum += v;
    }
    if (row_sum != report.test_class_counts[i])
      throw EvalError("report: confusion row sum does not match test class count");
    total += row_sum;
    trace += report.confusion[i][i];
  }
  if (total != report.test_size) throw EvalError("report: test size mismatch");
  if (report.bacc < 0.0 || report.bacc > 1.0 || report.gm < 0.0 || report.gm > 1.0)
    throw EvalError("report: metric out of [0, 1]");
  if (report.gm > report.bacc + 1e-12) throw EvalError("report: GM exceeds bACC");
  if (report.cumulative_fp.size() != k || report.cumulative_fp.back() != total - trace)
    throw EvalError("report: cumulative FP curve does not end at the total error count");
}

namespace {

nlohmann::json report_json(const EvalReport& r) {
  nlohmann::json j;
  j["confusion"] = r.confusion;
  j["test_class_counts"] = r.test_class_counts;
  j["recall"] = r.recall;
  j["bacc"] = r.bacc;
  j["gm"] = r.gm;
  j["major_classes"] = r.major_classes;
  j["minor_classes"] = r.minor_classes;
  j["major_bacc"] = r.major_bacc;
  j["minor_bacc"] = r.minor_bacc;
  j["cumulative_fp"] = r.cumulative_fp;
  j["test_size"] = r.test_size;
  return j;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  return report_json(report).dump(2);
}

void write_report_json(const EvalReport& report, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot open report for writing: " + file.string());
  out << report_to_json(report) << '\n';
  if (!out) throw IoError("short write on report: " + file.string());
}

EvalReport read_report_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open report: " + file.string());
  nlohmann::json j;
  try {
    in >> j;
    EvalReport r;
    r.confusion = j.at("confusion").get<std::vector<std::vector<long>>>();
    r.test_class_counts = j.at("test_class_counts").get<std::vector<long>>();
    r.recall = j.at("recall").get<std::vector<double>>();
    r.bacc = j.at("bacc").get<double>();
    r.gm = j.at("gm").get<double>();
    r.major_classes = j.at("major_classes").get<std::vector<int>>();
    r.minor_classes = j.at("minor_classes").get<std::vector<int>>();
    r.major_bacc = j.at("major_bacc").get<double>();
    r.minor_bacc = j.at("minor_bacc").get<double>();
    r.cumulative_fp = j.at("cumulative_fp").get<std::vector<long>>();
    r.test_size = j.at("test_size").get<long>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed report " + file.string() + ": " + e.what());
  }
}

void write_fp_curve_csv(const EvalReport& report, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot open curve CSV for writing: " + file.string());
  out << "class_index,cumulative_false_positives\n";
  for (std::size_t k = 0; k < report.cumulative_fp.size(); ++k)
    out << k << ',' << report.cumulative_fp[k] << '\n';
  if (!out) throw IoError("short write on curve CSV: " + file.string());
}

}  // namespace m2m
