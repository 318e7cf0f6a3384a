// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#include "pgf/losses.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "pgf/geometry.hpp"
#include "pgf/parallel.hpp"

namespace pgf {

namespace {

constexpr double kPi = std::numbers::pi;

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

int wrap_col(int c, int width) {
    c %= width;
    return c < 0 ? c + width : c;
}

void check_erp(const Grid& g, const char* who) {
    if (g.width() != 2 * g.height()) {
        throw std::invalid_argument(std::string(who) + ": width must equal 2 * height");
    }
}

void check_pair(const Grid& a, const Grid& b, const char* who) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(who) + ": shape mismatch");
    }
}

const std::array<double, 9>& sobel(Axis axis) {
    return axis == Axis::X ? kSobelX : kSobelY;
}

}  // namespace

namespace detail {

std::vector<double> gradient_dense(const Grid& depth, Axis axis) {
    check_erp(depth, "spherical_gradient");
    const int H = depth.height();
    const int W = depth.width();
    const double step = 2.0 * kPi / W;
    const auto& kernel = sobel(axis);

    std::vector<double> out(static_cast<size_t>(H) * W);
    parallel_for(H, [&](int64_t rb, int64_t re) {
        for (int64_t r = rb; r < re; ++r) {
            const auto taps = tangent_taps(H, W, static_cast<int>(r), 3, step);
            double* dst = out.data() + static_cast<size_t>(r) * W;
            for (int c = 0; c < W; ++c) {
                double acc = 0.0;
                for (int k = 0; k < 9; ++k) {
                    acc += kernel[static_cast<size_t>(k)] *
                           sample_tap(depth.data(), W, taps[static_cast<size_t>(k)], c);
                }
                dst[c] = acc;
            }
        }
    });
    return out;
}

}  // namespace detail

Grid spherical_gradient(const Grid& depth, Axis axis) {
    const std::vector<double> dense = detail::gradient_dense(depth, axis);
    Grid out(depth.height(), depth.width());
    for (size_t i = 0; i < dense.size(); ++i) out.data()[i] = static_cast<float>(dense[i]);
    return out;
}

double berhu_loss(const Grid& pred, const Grid& gt, const LossConfig& cfg) {
    check_pair(pred, gt, "berhu_loss");
    if (!(cfg.threshold > 0.0) || !(cfg.delta > 0.0)) {
        throw std::invalid_argument("berhu_loss: threshold and delta must be positive");
    }
    const size_t n = pred.size();
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double e = static_cast<double>(gt.data()[i]) - pred.data()[i];
        const double ae = std::fabs(e);
        acc += ae <= cfg.threshold ? ae : e * e / (2.0 * cfg.delta) + cfg.delta / 2.0;
    }
    return acc / static_cast<double>(n);
}

double spherical_gradient_loss(const Grid& pred, const Grid& gt) {
    check_pair(pred, gt, "spherical_gradient_loss");
    const std::vector<double> gx_p = detail::gradient_dense(pred, Axis::X);
    const std::vector<double> gx_g = detail::gradient_dense(gt, Axis::X);
    const std::vector<double> gy_p = detail::gradient_dense(pred, Axis::Y);
    const std::vector<double> gy_g = detail::gradient_dense(gt, Axis::Y);
    double acc = 0.0;
    for (size_t i = 0; i < gx_p.size(); ++i) {
        acc += std::fabs(gx_g[i] - gx_p[i]) + std::fabs(gy_g[i] - gy_p[i]);
    }
    return acc / static_cast<double>(gx_p.size());
}

double total_loss(const Grid& pred, const Grid& gt, const LossConfig& cfg) {
    return berhu_loss(pred, gt, cfg) + cfg.eta * spherical_gradient_loss(pred, gt);
}

Grid total_loss_grad(const Grid& pred, const Grid& gt, const LossConfig& cfg) {
    check_pair(pred, gt, "total_loss_grad");
    check_erp(pred, "total_loss_grad");
    const int H = pred.height();
    const int W = pred.width();
    const size_t n = pred.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<double> grad(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const double e = static_cast<double>(gt.data()[i]) - pred.data()[i];
        const double ae = std::fabs(e);
        grad[i] = ae < cfg.threshold ? -sgn(e) * inv_n : -e / cfg.delta * inv_n;
    }

    const std::vector<double> gx_p = detail::gradient_dense(pred, Axis::X);
    const std::vector<double> gx_g = detail::gradient_dense(gt, Axis::X);
    const std::vector<double> gy_p = detail::gradient_dense(pred, Axis::Y);
    const std::vector<double> gy_g = detail::gradient_dense(gt, Axis::Y);

    const double step = 2.0 * kPi / W;
    for (int r = 0; r < H; ++r) {
        const auto taps = detail::tangent_taps(H, W, r, 3, step);
        for (int c = 0; c < W; ++c) {
            const size_t p = static_cast<size_t>(r) * W + c;
            const int sx = sgn(gx_g[p] - gx_p[p]);
            const int sy = sgn(gy_g[p] - gy_p[p]);
            if (sx == 0 && sy == 0) continue;
            for (int k = 0; k < 9; ++k) {
                const double coeff = kSobelX[static_cast<size_t>(k)] * sx +
                                     kSobelY[static_cast<size_t>(k)] * sy;
                if (coeff == 0.0) continue;
                const double amount = -cfg.eta * coeff * inv_n;
                const auto& tap = taps[static_cast<size_t>(k)];
                if (tap.center) {
                    grad[p] += amount;
                    continue;
                }
                const int c0 = wrap_col(c + tap.dc, W);
                const int c1 = wrap_col(c + tap.dc + 1, W);
                const size_t r0 = static_cast<size_t>(tap.r0) * W;
                const size_t r1 = static_cast<size_t>(tap.r1) * W;
                grad[r0 + c0] += amount * (1.0 - tap.wr) * (1.0 - tap.wc);
                grad[r0 + c1] += amount * (1.0 - tap.wr) * tap.wc;
                grad[r1 + c0] += amount * tap.wr * (1.0 - tap.wc);
                grad[r1 + c1] += amount * tap.wr * tap.wc;
            }
        }
    }

    Grid out(H, W);
    for (size_t i = 0; i < n; ++i) out.data()[i] = static_cast<float>(grad[i]);
    return out;
}

FitResult fit_depth(const Grid& init, const Grid& gt, int steps, double lr,
                    const LossConfig& cfg) {
    check_pair(init, gt, "fit_depth");
    check_erp(init, "fit_depth");
    if (steps < 1) throw std::invalid_argument("fit_depth: steps must be >= 1");
    if (!(lr >= 0.0) || !std::isfinite(lr)) {
        throw std::invalid_argument("fit_depth: lr must be finite and >= 0");
    }

    FitResult result;
    result.depth = init;
    result.trace.reserve(static_cast<size_t>(steps) + 1);

    double loss = total_loss(result.depth, gt, cfg);
    if (!std::isfinite(loss)) throw std::runtime_error("fit_depth: loss diverged at step 0");
    result.trace.push_back(loss);

    for (int s = 1; s <= steps; ++s) {
        const Grid grad = total_loss_grad(result.depth, gt, cfg);
        for (size_t i = 0; i < result.depth.size(); ++i) {
            result.depth.data()[i] = static_cast<float>(
                static_cast<double>(result.depth.data()[i]) - lr * grad.data()[i]);
        }
        loss = total_loss(result.depth, gt, cfg);
        if (!std::isfinite(loss)) {
            throw std::runtime_error("fit_depth: loss diverged at step " + std::to_string(s));
        }
        result.trace.push_back(loss);
    }
    return result;
}

SyntheticPair make_synthetic_pair(int height, int width, double amplitude) {
    if (width != 2 * height || height < 2) {
        throw std::invalid_argument("make_synthetic_pair: width must equal 2 * height");
    }
    const LatLonGrid grid{height, width};
    SyntheticPair pair;
    pair.gt = Grid(height, width);
    double sum = 0.0;
    for (int r = 0; r < height; ++r) {
        const double lat = grid.lat(r);
        for (int c = 0; c < width; ++c) {
            const double lon = grid.lon(c);
            const double v = std::sin(2.0 * lon) * std::cos(lat) +
                             0.6 * std::cos(3.0 * lon) * std::cos(lat) +
                             0.4 * std::sin(lat);
            const double depth = 2.0 + amplitude * v;
            pair.gt.at(r, c) = static_cast<float>(depth);
            sum += pair.gt.at(r, c);
        }
    }
    const float mean = static_cast<float>(sum / static_cast<double>(pair.gt.size()));
    pair.init = Grid(height, width, mean);
    return pair;
}

GradCheckReport gradient_check(int height, int width, uint64_t seed, double h, double tol) {
    if (width != 2 * height || height < 2) {
        throw std::invalid_argument("gradient_check: width must equal 2 * height");
    }
    if (!(h > 0.0) || !(tol > 0.0)) {
        throw std::invalid_argument("gradient_check: h and tol must be positive");
    }
    const LossConfig cfg{};
    const int W = width;
    const size_t n = static_cast<size_t>(height) * width;

    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    Grid gt(height, width);
    Grid pred(height, width);
    for (size_t i = 0; i < n; ++i) {
        gt.data()[i] = static_cast<float>(uniform(0.5, 3.0));
        pred.data()[i] = static_cast<float>(static_cast<double>(gt.data()[i]) +
                                            uniform(-0.3, 0.3));
    }

    const Grid analytic = total_loss_grad(pred, gt, cfg);

    // A pixel is skipped when the step could cross a kink: the berhu absolute
    // value at its own pixel, or the sign of a gradient difference at any
    // pixel whose tangent patch touches it (one perturbation moves a
    // difference by at most sum|sobel| * h = 8h).
    std::vector<uint8_t> excluded(n, 0);
    for (size_t i = 0; i < n; ++i) {
        const double e = static_cast<double>(gt.data()[i]) - pred.data()[i];
        if (std::fabs(e) < 2.0 * h || std::fabs(std::fabs(e) - cfg.threshold) < 2.0 * h) {
            excluded[i] = 1;
        }
    }
    const std::vector<double> gx_p = detail::gradient_dense(pred, Axis::X);
    const std::vector<double> gx_g = detail::gradient_dense(gt, Axis::X);
    const std::vector<double> gy_p = detail::gradient_dense(pred, Axis::Y);
    const std::vector<double> gy_g = detail::gradient_dense(gt, Axis::Y);
    const double margin = 10.0 * h;
    const double step = 2.0 * kPi / W;
    for (int r = 0; r < height; ++r) {
        const auto taps = detail::tangent_taps(height, W, r, 3, step);
        for (int c = 0; c < W; ++c) {
            const size_t p = static_cast<size_t>(r) * W + c;
            if (std::fabs(gx_g[p] - gx_p[p]) >= margin &&
                std::fabs(gy_g[p] - gy_p[p]) >= margin) {
                continue;
            }
            for (const auto& tap : taps) {
                if (tap.center) {
                    excluded[p] = 1;
                    continue;
                }
                const int c0 = wrap_col(c + tap.dc, W);
                const int c1 = wrap_col(c + tap.dc + 1, W);
                excluded[static_cast<size_t>(tap.r0) * W + c0] = 1;
                excluded[static_cast<size_t>(tap.r0) * W + c1] = 1;
                excluded[static_cast<size_t>(tap.r1) * W + c0] = 1;
                excluded[static_cast<size_t>(tap.r1) * W + c1] = 1;
            }
        }
    }

    GradCheckReport report;
    Grid up = pred;
    Grid down = pred;
    for (size_t i = 0; i < n; ++i) {
        if (excluded[i]) {
            ++report.excluded;
            continue;
        }
        const double base = pred.data()[i];
        up.data()[i] = static_cast<float>(base + h);
        down.data()[i] = static_cast<float>(base - h);
        const double hp = static_cast<double>(up.data()[i]) - base;
        const double hm = base - static_cast<double>(down.data()[i]);
        const double fd =
            (total_loss(up, gt, cfg) - total_loss(down, gt, cfg)) / (hp + hm);
        up.data()[i] = pred.data()[i];
        down.data()[i] = pred.data()[i];
        const double err = std::fabs(fd - analytic.data()[i]);
        report.max_abs_err = std::max(report.max_abs_err, err);
        ++report.checked;
    }
    report.pass = report.checked > 0 && report.max_abs_err < tol;
    return report;
}

}  // namespace pgf
