// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#include "pgf/losses.hpp"

#include <chrono>
#include <cmath>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace pgf;
namespace tu = testutil;

TEST(SphericalGradient, ConstantMapIsExactlyZero) {
    const Grid depth(32, 64, 2.75f);
    for (Axis axis : {Axis::X, Axis::Y}) {
        const Grid g = spherical_gradient(depth, axis);
        for (size_t i = 0; i < g.size(); ++i) {
            ASSERT_EQ(g.data()[i], 0.0f);
        }
    }
}

TEST(SphericalGradient, LongitudeRampAtEquator) {
    const int h = 128, w = 256;
    Grid depth(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) depth.at(r, c) = static_cast<float>(c);
    }
    const Grid gx = spherical_gradient(depth, Axis::X);
    // skip the wrap seam where the ramp is discontinuous
    for (int r = h / 2 - 1; r <= h / 2; ++r) {
        for (int c = 3; c < w - 3; ++c) {
            EXPECT_NEAR(gx.at(r, c), 8.0, 0.16) << r << "," << c;
        }
    }
}

TEST(SphericalGradient, MatchesPlanarSobelNearEquator) {
    const Grid depth = tu::smooth_grid(128, 256);
    const Grid gx = spherical_gradient(depth, Axis::X);
    const Grid gy = spherical_gradient(depth, Axis::Y);
    const int r = 64;  // adjacent to the equator
    for (int c = 1; c < 255; ++c) {
        double px = 0.0, py = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const double v = depth.at(r + dy, c + dx);
                px += kSobelX[(dy + 1) * 3 + (dx + 1)] * v;
                py += kSobelY[(dy + 1) * 3 + (dx + 1)] * v;
            }
        }
        EXPECT_NEAR(gx.at(r, c), px, 0.02 * std::max(1.0, std::fabs(px)));
        EXPECT_NEAR(gy.at(r, c), py, 0.02 * std::max(1.0, std::fabs(py)));
    }
}

TEST(SphericalGradient, VerticalAntisymmetryForSymmetricMap) {
    const int h = 64, w = 128;
    const LatLonGrid grid = erp_grid(h, w);
    Grid depth(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            depth.at(r, c) = static_cast<float>(
                2.0 + 0.5 * std::cos(2.0 * grid.lat(r)) * std::sin(grid.lon(c)));
        }
    }
    const Grid gy = spherical_gradient(depth, Axis::Y);
    for (int r = 2; r < h / 2; ++r) {
        for (int c = 0; c < w; ++c) {
            EXPECT_NEAR(gy.at(r, c), -gy.at(h - 1 - r, c), 2e-3) << r << "," << c;
        }
    }
}

TEST(SphericalGradient, LinearOperator) {
    const Grid a = tu::random_grid(16, 32, 51, 0.0f, 2.0f);
    const Grid b = tu::random_grid(16, 32, 52, 0.0f, 2.0f);
    Grid combo(16, 32);
    for (size_t i = 0; i < a.size(); ++i) {
        combo.data()[i] = 0.5f * a.data()[i] + 2.0f * b.data()[i];
    }
    for (Axis axis : {Axis::X, Axis::Y}) {
        const Grid ga = spherical_gradient(a, axis);
        const Grid gb = spherical_gradient(b, axis);
        const Grid gc = spherical_gradient(combo, axis);
        for (size_t i = 0; i < a.size(); ++i) {
            const double want = 0.5 * ga.data()[i] + 2.0 * gb.data()[i];
            EXPECT_NEAR(gc.data()[i], want, 1e-5 * std::max(1.0, std::fabs(want)));
        }
    }
}

TEST(SphericalGradient, ShiftEquivarianceBitwise) {
    const Grid depth = tu::random_grid(16, 32, 53, 0.5f, 3.0f);
    for (Axis axis : {Axis::X, Axis::Y}) {
        const Grid base = spherical_gradient(depth, axis);
        for (int s : {1, 6, 15}) {
            const Grid shifted = spherical_gradient(tu::shift_cols(depth, s), axis);
            const Grid expect = tu::shift_cols(base, s);
            ASSERT_TRUE(shifted == expect);
        }
    }
}

TEST(BerhuLoss, ZeroWhenEqual) {
    const Grid d = tu::random_grid(8, 16, 54, 1.0f, 4.0f);
    EXPECT_EQ(berhu_loss(d, d), 0.0);
}

TEST(BerhuLoss, SinglePixelQuadraticBranch) {
    const Grid pred(1, 1, 1.0f), gt(1, 1, 1.5f);
    EXPECT_EQ(berhu_loss(pred, gt), 0.725);
}

TEST(BerhuLoss, ContinuityAtThreshold) {
    // place the branch point exactly on the representable error value
    const Grid pred(1, 1, 1.0f), gt(1, 1, 1.2f);
    const double e = static_cast<double>(1.2f) - 1.0;
    LossConfig cfg;
    cfg.threshold = cfg.delta = e;
    const double l1 = berhu_loss(pred, gt, cfg);  // |e| <= threshold branch
    EXPECT_EQ(l1, e);
    const double quad = e * e / (2.0 * e) + e / 2.0;  // the other branch at the same point
    EXPECT_NEAR(l1, quad, 1e-12);
    // nudging across the boundary moves the value continuously
    for (double nudge : {-1e-6, 1e-6}) {
        const Grid gt2(1, 1, static_cast<float>(1.2 + nudge));
        EXPECT_NEAR(berhu_loss(pred, gt2), e, 2e-6);
    }
}

TEST(BerhuLoss, L1BranchBelowThreshold) {
    const Grid pred(2, 2, 2.0f), gt(2, 2, 2.1f);
    EXPECT_NEAR(berhu_loss(pred, gt), 0.1, 1e-6);
}

TEST(BerhuLoss, RejectsShapeMismatch) {
    const Grid a(2, 2, 1.0f), b(2, 4, 1.0f);
    EXPECT_THROW(berhu_loss(a, b), std::invalid_argument);
}

TEST(GradientLoss, ZeroWhenEqualOrOffset) {
    const Grid d = tu::random_grid(8, 16, 55, 1.0f, 4.0f);
    EXPECT_EQ(spherical_gradient_loss(d, d), 0.0);
    Grid offset(8, 16);
    for (size_t i = 0; i < d.size(); ++i) offset.data()[i] = d.data()[i] + 0.5f;
    EXPECT_NEAR(spherical_gradient_loss(offset, d), 0.0, 1e-5);
}

TEST(GradientLoss, DoubledRampEqualsMeanAbsGradient) {
    const int h = 16, w = 32;
    Grid gt(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) gt.at(r, c) = static_cast<float>(c) * 0.25f;
    }
    Grid pred(h, w);
    for (size_t i = 0; i < gt.size(); ++i) pred.data()[i] = 2.0f * gt.data()[i];
    const auto dx = detail::gradient_dense(gt, Axis::X);
    const auto dy = detail::gradient_dense(gt, Axis::Y);
    double want = 0.0;
    for (size_t i = 0; i < dx.size(); ++i) {
        want += std::fabs(dx[i]) + std::fabs(dy[i]);
    }
    want /= static_cast<double>(dx.size());
    EXPECT_NEAR(spherical_gradient_loss(pred, gt), want, 1e-12 * std::max(1.0, want));
}

TEST(TotalLoss, CompositionalIdentity) {
    const Grid pred = tu::random_grid(16, 32, 56, 0.5f, 3.0f);
    const Grid gt = tu::random_grid(16, 32, 57, 0.5f, 3.0f);
    LossConfig cfg;
    const double total = total_loss(pred, gt, cfg);
    const double sum = berhu_loss(pred, gt, cfg) + 0.5 * spherical_gradient_loss(pred, gt);
    EXPECT_NEAR(total, sum, 1e-12 * std::max(1.0, sum));

    cfg.eta = 0.0;
    EXPECT_EQ(total_loss(pred, gt, cfg), berhu_loss(pred, gt, cfg));
}

TEST(TotalLossGrad, ZeroAtOptimum) {
    const Grid d = tu::random_grid(8, 16, 58, 1.0f, 4.0f);
    const Grid g = total_loss_grad(d, d);
    for (size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g.data()[i], 0.0f);
}

TEST(TotalLossGrad, QuadraticBranchFormula) {
    // eta = 0 and all |e| > theta: gradient = -e / (delta * N)
    LossConfig cfg;
    cfg.eta = 0.0;
    const int h = 4, w = 8;
    const Grid pred = tu::random_grid(h, w, 59, 0.0f, 0.2f);
    Grid gt(h, w);
    for (size_t i = 0; i < pred.size(); ++i) gt.data()[i] = pred.data()[i] + 0.5f;
    const Grid g = total_loss_grad(pred, gt, cfg);
    const double n = h * w;
    for (size_t i = 0; i < g.size(); ++i) {
        const double e = static_cast<double>(gt.data()[i]) - pred.data()[i];
        EXPECT_NEAR(g.data()[i], -e / (0.2 * n), 1e-8);
    }
}

TEST(TotalLossGrad, L1BranchSign) {
    LossConfig cfg;
    cfg.eta = 0.0;
    Grid pred(1, 2), gt(1, 2);
    pred.at(0, 0) = 1.0f;
    gt.at(0, 0) = 1.1f;  // e = +0.1, below threshold
    pred.at(0, 1) = 2.0f;
    gt.at(0, 1) = 1.9f;  // e = -0.1
    const Grid g = total_loss_grad(pred, gt, cfg);
    EXPECT_FLOAT_EQ(g.at(0, 0), -0.5f);  // -sgn(e)/N
    EXPECT_FLOAT_EQ(g.at(0, 1), 0.5f);
}

TEST(TotalLossGrad, FiniteDifferenceGate) {
    const GradCheckReport r = gradient_check(16, 32, 1);
    EXPECT_TRUE(r.pass);
    EXPECT_GT(r.checked, 0);
    EXPECT_LT(r.max_abs_err, 1e-4);
}

TEST(TotalLossGrad, GateHoldsForOtherSeeds) {
    for (uint64_t seed : {2ull, 3ull, 9ull}) {
        const GradCheckReport r = gradient_check(16, 32, seed);
        EXPECT_TRUE(r.pass) << "seed " << seed << " err " << r.max_abs_err;
    }
}

TEST(FitDepth, PerfectInitStaysPut) {
    const Grid gt = tu::random_grid(8, 16, 60, 1.0f, 3.0f);
    const FitResult r = fit_depth(gt, gt, 5, 0.1);
    ASSERT_EQ(r.trace.size(), 6u);
    for (double v : r.trace) EXPECT_EQ(v, 0.0);
    EXPECT_TRUE(r.depth == gt);
}

TEST(FitDepth, ZeroRateIsIdentity) {
    const SyntheticPair pair = make_synthetic_pair(8, 16);
    const FitResult r = fit_depth(pair.init, pair.gt, 3, 0.0);
    EXPECT_TRUE(r.depth == pair.init);
}

TEST(FitDepth, StandardPairConvergence) {
    const SyntheticPair pair = make_synthetic_pair(32, 64);
    const auto t0 = std::chrono::steady_clock::now();
    const FitResult r = fit_depth(pair.init, pair.gt, 200, 0.1);
    const auto t1 = std::chrono::steady_clock::now();
    ASSERT_EQ(r.trace.size(), 201u);
    EXPECT_LE(r.trace.back(), 0.5 * r.trace.front());
    EXPECT_LT(std::chrono::duration<double>(t1 - t0).count(), 10.0);
}

TEST(FitDepth, SmallRateMonotone) {
    const SyntheticPair pair = make_synthetic_pair(32, 64);
    const FitResult r = fit_depth(pair.init, pair.gt, 200, 1e-3);
    for (size_t i = 1; i < r.trace.size(); ++i) {
        ASSERT_LE(r.trace[i], r.trace[i - 1]) << "step " << i;
    }
}

TEST(FitDepth, RejectsBadArguments) {
    const Grid g(4, 8, 1.0f);
    EXPECT_THROW(fit_depth(g, g, 0, 0.1), std::invalid_argument);
    EXPECT_THROW(fit_depth(g, g, 5, -1.0), std::invalid_argument);
}

TEST(SyntheticPair, ShapeContract) {
    const SyntheticPair pair = make_synthetic_pair(16, 32);
    EXPECT_EQ(pair.gt.height(), 16);
    EXPECT_EQ(pair.gt.width(), 32);
    EXPECT_TRUE(pair.init.same_shape(pair.gt));
    EXPECT_THROW(make_synthetic_pair(16, 20), std::invalid_argument);
}

TEST(GradientCheck, ReportsCounts) {
    const GradCheckReport r = gradient_check(16, 32, 1);
    EXPECT_EQ(r.checked + r.excluded, 16 * 32);
}
