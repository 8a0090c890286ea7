// SPDX-License-Identifier: Apache-2.0
#include "spectrarec/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <system_error>
#include <vector>

#include "spectrarec/errors.hpp"
#include "spectrarec/fileio.hpp"

namespace spectrarec::report {

using metrics::MetricReport;
using metrics::Summary;

namespace {

void add(CsvWriter& csv, const std::string& name, const Summary& s, double factor = 1.0) {
  csv.add_row({name, format_double(s.mean * factor), format_double(s.std * factor)});
}

void check_channels(const MetricReport& report, std::span<const float> wavelengths) {
  if (report.channel_mae.size() != wavelengths.size() ||
      report.channel_psnr.size() != wavelengths.size()) {
    throw ShapeError("report has " + std::to_string(report.channel_mae.size()) +
                     " channels, axis has " + std::to_string(wavelengths.size()));
  }
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string polyline(const char* id, const char* color, std::span<const float> wl,
                     const std::vector<double>& values, double top, double height, double left,
                     double width) {
  double lo = values.front();
  double hi = values.front();
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double wl_lo = wl.front();
  const double wl_span = static_cast<double>(wl.back()) - wl_lo;
  std::string pts;
  for (std::size_t c = 0; c < values.size(); ++c) {
    const double fx = wl_span > 0.0 ? (wl[c] - wl_lo) / wl_span : 0.5;
    const double fy = hi > lo ? (values[c] - lo) / (hi - lo) : 0.5;
    if (c != 0) {
      pts += ' ';
    }
    pts += fixed(left + fx * width) + ',' + fixed(top + (1.0 - fy) * height);
  }
  std::string out;
  out += "  <text x=\"" + fixed(left) + "\" y=\"" + fixed(top - 6.0) + "\" font-size=\"12\">" + id +
         " [" + format_double(lo) + ", " + format_double(hi) + "]</text>\n";
  out += "  <rect x=\"" + fixed(left) + "\" y=\"" + fixed(top) + "\" width=\"" + fixed(width) +
         "\" height=\"" + fixed(height) + "\" fill=\"none\" stroke=\"#999\"/>\n";
  out += std::string("  <polyline id=\"") + id + "\" fill=\"none\" stroke=\"" + color +
         "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
  return out;
}

}  // namespace

std::string metrics_csv(const MetricReport& report, const ReportOptions& options) {
  CsvWriter csv({"metric", "mean", "std"});
  add(csv, "mae", report.mae);
  add(csv, "rmse", report.rmse);
  add(csv, "psnr", report.psnr);
  if (options.sam_degrees) {
    add(csv, "sam_deg", report.sam, 180.0 / std::numbers::pi);
  } else {
    add(csv, "sam", report.sam);
  }
  add(csv, "ssim", report.ssim);
  add(csv, "mrae", report.mrae);
  return csv.str();
}

std::string ranges_csv(const MetricReport& report, const RangeMasks& masks) {
  CsvWriter csv({"metric", "range", "channels", "mean", "std"});
  for (std::size_t r = 0; r < metrics::kRangeKinds.size(); ++r) {
    const RangeKind kind = metrics::kRangeKinds[r];
    const Summary& s = report.range_mae[r];
    csv.add_row({"mae", to_string(kind), std::to_string(masks.get(kind).indices.size()),
                 format_double(s.mean), format_double(s.std)});
  }
  return csv.str();
}

std::string channels_csv(const MetricReport& report, std::span<const float> wavelengths) {
  check_channels(report, wavelengths);
  CsvWriter csv({"channel", "wavelength_nm", "mae_mean", "mae_std", "psnr_mean", "psnr_std"});
  for (std::size_t c = 0; c < wavelengths.size(); ++c) {
    csv.add_row({std::to_string(c), format_float(wavelengths[c]),
                 format_double(report.channel_mae[c].mean), format_double(report.channel_mae[c].std),
                 format_double(report.channel_psnr[c].mean),
                 format_double(report.channel_psnr[c].std)});
  }
  return csv.str();
}

std::string channels_svg(const MetricReport& report, std::span<const float> wavelengths) {
  check_channels(report, wavelengths);
  if (wavelengths.empty()) {
    throw ShapeError("report has no channels");
  }
  std::vector<double> mae;
  std::vector<double> psnr;
  for (std::size_t c = 0; c < wavelengths.size(); ++c) {
    mae.push_back(report.channel_mae[c].mean);
    psnr.push_back(report.channel_psnr[c].mean);
  }
  constexpr double kLeft = 60.0;
  constexpr double kWidth = 560.0;
  constexpr double kHeight = 180.0;
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
      "viewBox=\"0 0 640 480\">\n";
  svg += polyline("mae", "#c0392b", wavelengths, mae, 30.0, kHeight, kLeft, kWidth);
  svg += polyline("psnr", "#2471a3", wavelengths, psnr, 260.0, kHeight, kLeft, kWidth);
  svg += "  <text x=\"" + fixed(kLeft) + "\" y=\"470\" font-size=\"12\">wavelength " +
         format_float(wavelengths.front()) + " - " + format_float(wavelengths.back()) +
         " nm</text>\n";
  svg += "</svg>\n";
  return svg;
}

void write_report(const std::filesystem::path& dir, const MetricReport& report,
                  std::span<const float> wavelengths, const ReportOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
  write_file_atomic(dir / "metrics.csv", metrics_csv(report, options));
  write_file_atomic(dir / "ranges.csv", ranges_csv(report, make_range_masks(wavelengths)));
  write_file_atomic(dir / "channels.csv", channels_csv(report, wavelengths));
  write_file_atomic(dir / "channels.svg", channels_svg(report, wavelengths));
}

}  // namespace spectrarec::report
