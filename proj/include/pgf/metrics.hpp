// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "pgf/tensor.hpp"

namespace pgf {

struct MetricReport {
    double abs_rel = 0.0;
    double sq_rel = 0.0;
    double rmse = 0.0;
    double delta1 = 0.0;  // percent of pixels with ratio < 1.25
    double delta2 = 0.0;  // ... < 1.25^2
    double delta3 = 0.0;  // ... < 1.25^3
    int64_t valid_pixels = 0;
};

/// Depth evaluation over valid pixels: gt <= 0 is always excluded, an optional
/// mask (nonzero = keep, one byte per pixel) restricts further. Predictions
/// are clamped to 1e-6 before ratio thresholds. median_scale rescales pred by
/// median(gt)/median(pred) over the valid set first (off by default).
MetricReport depth_metrics(const Grid& pred, const Grid& gt,
                           const std::vector<uint8_t>* mask = nullptr,
                           bool median_scale = false);

}  // namespace pgf
