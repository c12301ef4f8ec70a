#include "vstain/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace vstain {

namespace {

bool has_full_metrics(Organelle o) { return o == Organelle::Nucleus || o == Organelle::Mitochondria; }

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string header_label(Metric m) {
  std::string s(to_string(m));
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s + (lower_is_better(m) ? "↓" : "↑");
}

// Display width, counting each UTF-8 code point once.
std::size_t display_width(const std::string& s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string pad(const std::string& s, std::size_t width, bool left_align = false) {
  const std::size_t w = display_width(s);
  const std::string fill(w < width ? width - w : 0, ' ');
  return left_align ? s + fill : fill + s;
}

}  // namespace

std::vector<Metric> metrics_for(Organelle o) {
  if (has_full_metrics(o)) return {kMetrics.begin(), kMetrics.end()};
  return {Metric::Ssim, Metric::Pcc};
}

MetricRow evaluate_pair(const ImageF& prediction, const ImageF& target, Organelle organelle,
                        std::string record_id, const SsimConfig& ssim_cfg) {
  if (prediction.rows() != target.rows() || prediction.cols() != target.cols())
    throw std::invalid_argument("evaluate_pair: dimension mismatch");
  const ImageD p = prediction.cast<double>();
  const ImageD g = target.cast<double>();
  MetricRow row;
  row.record_id = std::move(record_id);
  row.organelle = organelle;
  row.ssim = ssim_value(p, g, ssim_cfg);
  row.pcc = pcc_value(p, g);
  if (has_full_metrics(organelle)) {
    const ImageD diff = p - g;
    row.mae = diff.cwiseAbs().mean();
    row.cd = cosine_distance_value(p, g);
    row.ed = diff.norm();
  }
  return row;
}

std::optional<double> metric_value(const MetricRow& row, Metric m) {
  switch (m) {
    case Metric::Mae: return row.mae;
    case Metric::Ssim: return row.ssim;
    case Metric::Pcc: return row.pcc;
    case Metric::Cd: return row.cd;
    case Metric::Ed: return row.ed;
  }
  return std::nullopt;
}

AggregateReport aggregate(std::span<const MetricRow> rows) {
  if (rows.empty()) throw std::invalid_argument("aggregate: no rows");
  std::vector<MetricSummary> entries;
  for (Organelle o : kOrganelles) {
    for (Metric m : metrics_for(o)) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& r : rows) {
        if (r.organelle != o) continue;
        if (auto v = metric_value(r, m)) {
          sum += *v;
          ++n;
        }
      }
      if (n > 0) entries.push_back({o, m, sum / static_cast<double>(n), n});
    }
  }
  return AggregateReport(std::move(entries));
}

std::optional<double> AggregateReport::mean(Organelle o, Metric m) const {
  for (const auto& e : entries_)
    if (e.organelle == o && e.metric == m) return e.mean;
  return std::nullopt;
}

std::string AggregateReport::to_csv() const {
  std::ostringstream out;
  out << "organelle,metric,mean,n\n";
  char buf[32];
  for (const auto& e : entries_) {
    std::snprintf(buf, sizeof buf, "%.9g", e.mean);
    out << to_string(e.organelle) << ',' << to_string(e.metric) << ',' << buf << ',' << e.n << '\n';
  }
  return out.str();
}

std::string AggregateReport::to_text() const {
  std::ostringstream out;
  out << pad("organelle", 14, true) << pad("metric", 8, true) << pad("mean", 12) << pad("n", 6) << '\n';
  for (const auto& e : entries_) {
    out << pad(std::string(to_string(e.organelle)), 14, true) << pad(header_label(e.metric), 8, true)
        << pad(format_value(e.mean), 12) << pad(std::to_string(e.n), 6) << '\n';
  }
  return out.str();
}

std::string ablation_table(const std::string& title,
                           const std::vector<std::pair<std::string, AggregateReport>>& rows) {
  std::size_t name_width = 6;
  for (const auto& [name, _] : rows) name_width = std::max(name_width, display_width(name));
  constexpr std::size_t cell = 9;

  std::ostringstream out;
  out << title << '\n';
  std::string groups = pad("Method", name_width, true);
  std::string heads = pad("", name_width, true);
  for (Organelle o : kOrganelles) {
    const auto ms = metrics_for(o);
    std::string label(to_string(o));
    label[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(label[0])));
    groups += " | " + pad(label, ms.size() * cell, true);
    heads += " | ";
    for (Metric m : ms) heads += pad(header_label(m), cell);
  }
  out << groups << '\n' << heads << '\n';
  out << std::string(display_width(heads), '-') << '\n';
  for (const auto& [name, report] : rows) {
    out << pad(name, name_width, true);
    for (Organelle o : kOrganelles) {
      out << " | ";
      for (Metric m : metrics_for(o)) {
        const auto v = report.mean(o, m);
        out << pad(v ? format_value(*v) : "-", cell);
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string ablation_csv(const std::string& axis,
                         const std::vector<std::pair<std::string, AggregateReport>>& rows) {
  std::ostringstream out;
  out << "axis,method,organelle,metric,mean,n\n";
  char buf[32];
  for (const auto& [name, report] : rows) {
    for (const auto& e : report.entries()) {
      std::snprintf(buf, sizeof buf, "%.9g", e.mean);
      out << axis << ',' << name << ',' << to_string(e.organelle) << ',' << to_string(e.metric)
          << ',' << buf << ',' << e.n << '\n';
    }
  }
  return out.str();
}

}  // namespace vstain
