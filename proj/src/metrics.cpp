// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#include "pgf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pgf {

namespace {

constexpr double kMinPred = 1e-6;

double median(std::vector<double>& v) {
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<ptrdiff_t>(mid), v.end());
    return v[mid];
}

}  // namespace

MetricReport depth_metrics(const Grid& pred, const Grid& gt, const std::vector<uint8_t>* mask,
                           bool median_scale) {
    if (!pred.same_shape(gt)) {
        throw std::invalid_argument("depth_metrics: shape mismatch");
    }
    const size_t n = pred.size();
    if (mask && mask->size() != n) {
        throw std::invalid_argument("depth_metrics: mask size mismatch");
    }

    auto valid = [&](size_t i) {
        return gt.data()[i] > 0.0f && (!mask || (*mask)[i] != 0);
    };

    double scale = 1.0;
    if (median_scale) {
        std::vector<double> gts, preds;
        for (size_t i = 0; i < n; ++i) {
            if (!valid(i)) continue;
            gts.push_back(gt.data()[i]);
            preds.push_back(pred.data()[i]);
        }
        if (!gts.empty()) {
            scale = median(gts) / std::max(median(preds), kMinPred);
        }
    }

    double abs_rel = 0.0, sq_rel = 0.0, sq_err = 0.0;
    int64_t count = 0, under1 = 0, under2 = 0, under3 = 0;
    constexpr double t1 = 1.25, t2 = 1.25 * 1.25, t3 = 1.25 * 1.25 * 1.25;
    for (size_t i = 0; i < n; ++i) {
        if (!valid(i)) continue;
        const double d = gt.data()[i];
        const double dh = static_cast<double>(pred.data()[i]) * scale;
        const double diff = d - dh;
        abs_rel += std::fabs(diff) / d;
        sq_rel += diff * diff / d;
        sq_err += diff * diff;
        const double dhc = std::max(dh, kMinPred);
        const double ratio = std::max(d / dhc, dhc / d);
        under1 += ratio < t1;
        under2 += ratio < t2;
        under3 += ratio < t3;
        ++count;
    }
    if (count == 0) {
        throw std::runtime_error("depth_metrics: no valid pixels");
    }

    MetricReport report;
    report.valid_pixels = count;
    const double inv = 1.0 / static_cast<double>(count);
    report.abs_rel = abs_rel * inv;
    report.sq_rel = sq_rel * inv;
    report.rmse = std::sqrt(sq_err * inv);
    report.delta1 = 100.0 * static_cast<double>(under1) * inv;
    report.delta2 = 100.0 * static_cast<double>(under2) * inv;
    report.delta3 = 100.0 * static_cast<double>(under3) * inv;
    return report;
}

}  // namespace pgf
