#include "atlantis/evaluate/report.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "atlantis/core/error.hpp"

namespace atlantis::evaluate {

namespace {

void plot_metric_bars(const std::string& metric, const std::vector<std::string>& names,
                      const std::vector<double>& values,
                      const std::filesystem::path& path) {
  const int width = 720, height = 480;
  const int margin_left = 70, margin_bottom = 110, margin_top = 50, margin_right = 20;
  cv::Mat canvas(height, width, CV_8UC3, cv::Scalar(255, 255, 255));

  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, v);
  if (vmax <= 0.0) vmax = 1.0;

  const int plot_w = width - margin_left - margin_right;
  const int plot_h = height - margin_top - margin_bottom;
  const int n = static_cast<int>(values.size());
  const int slot = plot_w / std::max(1, n);
  const int bar_w = std::max(4, slot * 2 / 3);

  cv::putText(canvas, metric, {margin_left, margin_top - 18},
              cv::FONT_HERSHEY_SIMPLEX, 0.8, {0, 0, 0}, 2);
  cv::line(canvas, {margin_left, margin_top}, {margin_left, margin_top + plot_h},
           {0, 0, 0});
  cv::line(canvas, {margin_left, margin_top + plot_h},
           {margin_left + plot_w, margin_top + plot_h}, {0, 0, 0});

  for (int i = 0; i < n; ++i) {
    const int h = static_cast<int>(std::lround(values[i] / vmax * plot_h));
    const int x0 = margin_left + i * slot + (slot - bar_w) / 2;
    const int y0 = margin_top + plot_h - h;
    cv::rectangle(canvas, {x0, y0}, {x0 + bar_w, margin_top + plot_h},
                  cv::Scalar(180, 110, 40), cv::FILLED);
    char value_text[32];
    std::snprintf(value_text, sizeof(value_text), "%.3f", values[i]);
    cv::putText(canvas, value_text, {x0 - 6, y0 - 6}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
                {0, 0, 0}, 1);
    // Bar labels, staggered to keep long model names readable.
    const int ty = margin_top + plot_h + 25 + (i % 3) * 25;
    cv::putText(canvas, names[static_cast<size_t>(i)], {x0 - 10, ty},
                cv::FONT_HERSHEY_SIMPLEX, 0.42, {0, 0, 0}, 1);
  }
  if (!cv::imwrite(path.string(), canvas))
    fail(Errc::io_failure, "cannot write " + path.string());
}

}  // namespace

std::string format_metric(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", value);
  return buf;
}

std::array<double, 9> metric_values(const MetricsReport& m) {
  return {m.rmse, m.rmse_log, m.a_rel, m.s_rel, m.log10,
          m.si_log, m.delta1, m.delta2, m.delta3};
}

ReportTable build_table(const std::vector<NamedResult>& results) {
  if (results.empty()) fail(Errc::empty_results, "no result rows");
  ReportTable table;
  for (const auto& r : results) {
    table.row_names.push_back(r.name);
    table.values.push_back(metric_values(r.metrics));
  }
  for (size_t col = 0; col < kMetricColumns.size(); ++col) {
    size_t best = 0;
    for (size_t row = 1; row < table.values.size(); ++row) {
      const double v = table.values[row][col];
      const double b = table.values[best][col];
      if (kLowerIsBetter[col] ? v < b : v > b) best = row;
    }
    table.best_row[col] = best;
  }
  return table;
}

ReportTable render_report(const std::vector<NamedResult>& results,
                          const std::filesystem::path& out_dir) {
  const ReportTable table = build_table(results);
  std::filesystem::create_directories(out_dir);
  std::filesystem::create_directories(out_dir / "plots");

  {
    std::ofstream csv(out_dir / "report.csv");
    if (!csv) fail(Errc::io_failure, "cannot write report.csv");
    csv << "model";
    for (const char* col : kMetricColumns) csv << "," << col;
    csv << "\n";
    for (size_t row = 0; row < table.row_names.size(); ++row) {
      csv << table.row_names[row];
      for (size_t col = 0; col < kMetricColumns.size(); ++col)
        csv << "," << format_metric(table.values[row][col]);
      csv << "\n";
    }
  }

  {
    std::ofstream txt(out_dir / "report.txt");
    if (!txt) fail(Errc::io_failure, "cannot write report.txt");
    size_t name_w = 5;
    for (const auto& n : table.row_names) name_w = std::max(name_w, n.size());
    txt << std::left << std::setw(static_cast<int>(name_w) + 2) << "model";
    for (size_t col = 0; col < kMetricColumns.size(); ++col) {
      std::string head = kMetricColumns[col];
      head += kLowerIsBetter[col] ? 'v' : '^';
      txt << std::right << std::setw(11) << head;
    }
    txt << "\n";
    for (size_t row = 0; row < table.row_names.size(); ++row) {
      txt << std::left << std::setw(static_cast<int>(name_w) + 2) << table.row_names[row];
      for (size_t col = 0; col < kMetricColumns.size(); ++col) {
        std::string cell = format_metric(table.values[row][col]);
        if (table.best_row[col] == row) cell += '*';  // best value per column
        txt << std::right << std::setw(11) << cell;
      }
      txt << "\n";
    }
  }

  for (size_t col = 0; col < kMetricColumns.size(); ++col) {
    std::vector<double> values;
    for (const auto& row : table.values) values.push_back(row[col]);
    plot_metric_bars(kMetricColumns[col], table.row_names, values,
                     out_dir / "plots" / (std::string(kMetricColumns[col]) + ".png"));
  }
  return table;
}

}  // namespace atlantis::evaluate
