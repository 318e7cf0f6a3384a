// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pgf/tensor.hpp"

namespace pgf {

struct LossConfig {
    double threshold = 0.2;  // reverse-Huber branch point, meters
    double delta = 0.2;      // quadratic branch scale; equal to threshold for continuity
    double eta = 0.5;        // gradient-term weight
};

enum class Axis { X, Y };

inline constexpr std::array<double, 9> kSobelX = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
inline constexpr std::array<double, 9> kSobelY = {-1, -2, -1, 0, 0, 0, 1, 2, 1};

/// Per-pixel inner product of the 3x3 tangent patch with the Sobel kernel for
/// the axis. Depth maps must have the 2:1 equirectangular aspect.
Grid spherical_gradient(const Grid& depth, Axis axis);

/// Mean over pixels of |e| below the threshold and (e^2 + delta^2) / (2 delta)
/// above it, with e = gt - pred.
double berhu_loss(const Grid& pred, const Grid& gt, const LossConfig& cfg = {});

/// Mean over pixels of the absolute spherical gradient differences, both axes.
double spherical_gradient_loss(const Grid& pred, const Grid& gt);

/// berhu_loss + eta * spherical_gradient_loss.
double total_loss(const Grid& pred, const Grid& gt, const LossConfig& cfg = {});

/// Analytic d(total_loss)/d(pred). Absolute values take subgradient 0 at the
/// origin; |e| exactly at the threshold takes the quadratic branch.
Grid total_loss_grad(const Grid& pred, const Grid& gt, const LossConfig& cfg = {});

struct FitResult {
    Grid depth;
    std::vector<double> trace;  // trace[0] is the initial loss, one entry per step after
};

/// Plain gradient descent on total_loss. Throws if the loss becomes
/// non-finite, naming the step.
FitResult fit_depth(const Grid& init, const Grid& gt, int steps, double lr,
                    const LossConfig& cfg = {});

/// Seeded ERP-shaped pair used by the fitting demo and the gradient gate:
/// a smooth three-harmonic ground truth around 2 m and its constant-mean init.
struct SyntheticPair {
    Grid gt;
    Grid init;
};
SyntheticPair make_synthetic_pair(int height, int width, double amplitude = 0.004);

struct GradCheckReport {
    double max_abs_err = 0.0;
    int checked = 0;
    int excluded = 0;
    bool pass = false;
};

/// Central finite differences against total_loss_grad on a seeded random pair,
/// skipping pixels close enough to a kink for the step to cross it.
GradCheckReport gradient_check(int height, int width, uint64_t seed, double h = 1e-3,
                               double tol = 1e-4);

namespace detail {
/// Double-precision spherical gradient, row-major. Loss and gradient paths use
/// this so the finite-difference gate is not limited by float32 rounding.
std::vector<double> gradient_dense(const Grid& depth, Axis axis);
}  // namespace detail

}  // namespace pgf
