#include <algorithm>
#include <cstdio>
#include <sstream>

#include "mbfuse/experiment.hpp"

namespace mbfuse {

namespace {

std::string fpr_label(double fpr) { return "tpr@" + format_score(fpr); }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::vector<const MethodResult*> level_rows(const EvalReport& report, const LevelResult& level,
                                            const SummaryOptions& options) {
  std::vector<const MethodResult*> rows;
  if (options.include_baseline) rows.push_back(&report.baseline);
  for (const auto& m : level.methods) rows.push_back(&m);
  return rows;
}

std::vector<double> fpr_points(const EvalReport& report) {
  if (report.config.contains("eval")) return report.config["eval"].value("fpr_points", std::vector<double>{});
  return {};
}

std::size_t rank_count(const EvalReport& report, const SummaryOptions& options) {
  std::size_t available = 0;
  auto scan = [&](const MethodResult& m) {
    if (m.mean) available = std::max(available, m.mean->rank_accuracy.size());
  };
  scan(report.baseline);
  for (const auto& l : report.levels) {
    for (const auto& m : l.methods) scan(m);
  }
  return std::min(options.ranks, available);
}

}  // namespace

std::string summarize_csv(const EvalReport& report, const SummaryOptions& options) {
  const auto fprs = fpr_points(report);
  const std::size_t ranks = rank_count(report, options);
  std::ostringstream out;
  out << "level,method,reps_evaluated,auc_mean,auc_sd,eer_mean,eer_sd";
  for (double f : fprs) out << ',' << fpr_label(f) << "_mean," << fpr_label(f) << "_sd";
  for (std::size_t k = 1; k <= ranks; ++k) out << ",rank" << k << "_mean,rank" << k << "_sd";
  out << '\n';

  for (const auto& level : report.levels) {
    for (const MethodResult* m : level_rows(report, level, options)) {
      out << format_score(level.level) << ',' << m->method << ',' << m->reps_evaluated;
      const std::size_t cols = 4 + 2 * fprs.size() + 2 * ranks;
      if (!m->mean) {
        for (std::size_t c = 0; c < cols; ++c) out << ',';
        out << '\n';
        continue;
      }
      const Metrics& mean = *m->mean;
      const Metrics& sd = *m->sd;
      auto pair = [&](double a, double b) { out << ',' << format_score(a) << ',' << format_score(b); };
      pair(mean.auc, sd.auc);
      pair(mean.eer, sd.eer);
      for (std::size_t i = 0; i < fprs.size(); ++i) pair(mean.tpr_at_fpr.at(i), sd.tpr_at_fpr.at(i));
      for (std::size_t k = 0; k < ranks; ++k) pair(mean.rank_accuracy.at(k), sd.rank_accuracy.at(k));
      out << '\n';
    }
  }
  return out.str();
}

std::string summarize_text(const EvalReport& report, const SummaryOptions& options) {
  const auto fprs = fpr_points(report);
  const std::size_t ranks = rank_count(report, options);
  std::ostringstream out;
  bool first = true;
  for (const auto& level : report.levels) {
    std::vector<std::string> header{"method", "auc", "eer"};
    for (double f : fprs) header.push_back(fpr_label(f));
    for (std::size_t k = 1; k <= ranks; ++k) header.push_back("rank " + std::to_string(k));

    std::vector<std::vector<std::string>> table{header};
    for (const MethodResult* m : level_rows(report, level, options)) {
      std::vector<std::string> row{m->method};
      if (!m->mean) {
        row.resize(header.size(), "n/a");
      } else {
        const Metrics& mean = *m->mean;
        const Metrics& sd = *m->sd;
        auto cell = [](double a, double b) { return fixed(a, 4) + " ± " + fixed(b, 4); };
        auto pct = [](double a, double b) { return fixed(100 * a, 2) + "% ± " + fixed(100 * b, 2); };
        row.push_back(cell(mean.auc, sd.auc));
        row.push_back(cell(mean.eer, sd.eer));
        for (std::size_t i = 0; i < fprs.size(); ++i) row.push_back(cell(mean.tpr_at_fpr.at(i), sd.tpr_at_fpr.at(i)));
        for (std::size_t k = 0; k < ranks; ++k) row.push_back(pct(mean.rank_accuracy.at(k), sd.rank_accuracy.at(k)));
      }
      table.push_back(std::move(row));
    }

    // Width in code points; "±" is two bytes in UTF-8.
    auto width = [](const std::string& s) {
      return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
    };
    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& row : table) {
      for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], width(row[c]));
    }

    if (!first) out << '\n';
    first = false;
    out << "missing level " << format_score(level.level) << '\n';
    for (std::size_t r = 0; r < table.size(); ++r) {
      for (std::size_t c = 0; c < table[r].size(); ++c) {
        const std::string& s = table[r][c];
        const std::string pad(widths[c] - width(s), ' ');
        if (c > 0) out << "  ";
        if (c == 0) {
          out << s << pad;
        } else {
          out << pad << s;
        }
      }
      out << '\n';
      if (r == 0) {
        std::size_t total = 0;
        for (auto w : widths) total += w;
        out << std::string(total + 2 * (widths.size() - 1), '-') << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace mbfuse
