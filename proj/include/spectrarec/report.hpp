// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "spectrarec/cube.hpp"
#include "spectrarec/metrics.hpp"

namespace spectrarec::report {

struct ReportOptions {
  bool sam_degrees = false;  // SAM row becomes `sam_deg`
};

/// `metric,mean,std`: mae, rmse, psnr, sam (or sam_deg), ssim, mrae.
std::string metrics_csv(const metrics::MetricReport& report, const ReportOptions& options = {});

/// `metric,range,channels,mean,std`: MAE over full, visible and extended.
/// An empty range prints nan.
std::string ranges_csv(const metrics::MetricReport& report, const RangeMasks& masks);

/// `channel,wavelength_nm,mae_mean,mae_std,psnr_mean,psnr_std`
std::string channels_csv(const metrics::MetricReport& report, std::span<const float> wavelengths);

/// Two stacked line charts (per-channel MAE, per-channel PSNR) as
/// <polyline id="mae"> and <polyline id="psnr">, one point per channel.
std::string channels_svg(const metrics::MetricReport& report, std::span<const float> wavelengths);

/// Writes metrics.csv, ranges.csv, channels.csv and channels.svg into `dir`
/// (created if missing), each atomically.
void write_report(const std::filesystem::path& dir, const metrics::MetricReport& report,
                  std::span<const float> wavelengths, const ReportOptions& options = {});

}  // namespace spectrarec::report
