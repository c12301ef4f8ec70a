#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vstain/objective.hpp"

namespace vstain {

/// Per-pair evaluation. Nucleus and mitochondria rows carry all five
/// metrics; tubulin and actin rows carry SSIM and PCC only.
struct MetricRow {
  std::string record_id;
  Organelle organelle = Organelle::Nucleus;
  std::optional<double> mae;
  double ssim = 0.0;
  double pcc = 0.0;
  std::optional<double> cd;
  std::optional<double> ed;  // unnormalized Euclidean norm of P - GT
};

enum class Metric { Mae, Ssim, Pcc, Cd, Ed };
inline constexpr std::array<Metric, 5> kMetrics = {Metric::Mae, Metric::Ssim, Metric::Pcc,
                                                   Metric::Cd, Metric::Ed};

inline constexpr std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::Mae: return "mae";
    case Metric::Ssim: return "ssim";
    case Metric::Pcc: return "pcc";
    case Metric::Cd: return "cd";
    case Metric::Ed: return "ed";
  }
  return "?";
}

/// True when lower values are better.
inline constexpr bool lower_is_better(Metric m) {
  return m == Metric::Mae || m == Metric::Cd || m == Metric::Ed;
}

/// Metrics reported for an organelle, in table order.
std::vector<Metric> metrics_for(Organelle o);

MetricRow evaluate_pair(const ImageF& prediction, const ImageF& target, Organelle organelle,
                        std::string record_id = {}, const SsimConfig& ssim_cfg = {});

std::optional<double> metric_value(const MetricRow& row, Metric m);

struct MetricSummary {
  Organelle organelle;
  Metric metric;
  double mean;
  std::size_t n;
};

/// Per-organelle means, organelles and metrics in table order.
class AggregateReport {
 public:
  explicit AggregateReport(std::vector<MetricSummary> entries) : entries_(std::move(entries)) {}

  const std::vector<MetricSummary>& entries() const { return entries_; }
  std::optional<double> mean(Organelle o, Metric m) const;

  /// `organelle,metric,mean,n`
  std::string to_csv() const;
  /// Aligned table with direction markers (down = lower is better).
  std::string to_text() const;

 private:
  std::vector<MetricSummary> entries_;
};

AggregateReport aggregate(std::span<const MetricRow> rows);

/// Rows of an ablation axis rendered with the organelle/metric column layout
/// of the results table: nucleus and mitochondria with five metrics, tubulin
/// and actin with SSIM and PCC. Missing cells print as "-".
std::string ablation_table(const std::string& title,
                           const std::vector<std::pair<std::string, AggregateReport>>& rows);
std::string ablation_csv(const std::string& axis,
                         const std::vector<std::pair<std::string, AggregateReport>>& rows);

class WilcoxonError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two-sided Wilcoxon signed-rank p-value for paired samples. Zero
/// differences are dropped; ties get average ranks. Exact enumeration when at
/// most 12 nonzero differences remain, otherwise the normal approximation
/// with tie-corrected variance (no continuity correction).
double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

}  // namespace vstain
