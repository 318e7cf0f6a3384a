// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "pgf/image.hpp"

namespace pgf {

/// How the per-latitude distortion coefficient is derived.
enum class DistortionMode { Linear, Cosine, InverseCosine };

DistortionMode distortion_mode_from_string(std::string_view name);
std::string to_string(DistortionMode mode);

struct GaborParams {
    double theta = 0.0;      // orientation, radians
    double psi = 0.0;        // phase, radians
    double frequency = 0.0;  // carrier frequency, radians per pixel
    double sigma = 0.0;      // Gaussian envelope width, pixels
};

/// Eight oriented 3x3 kernels tuned for one distortion coefficient.
struct FilterBank {
    double coefficient = 0.0;
    double epsilon = 0.0;
    std::array<GaborParams, 8> params{};
    std::array<std::array<double, 9>, 8> kernels{};  // row-major 3x3
};

/// Per-row distortion coefficients for an equirectangular image.
struct DistortionProfile {
    int height = 0;
    DistortionMode mode = DistortionMode::Linear;
    std::vector<double> coefficients;
};

/// Coefficient at a single latitude (radians, [-pi/2, pi/2]).
double distortion_coefficient(double lat, DistortionMode mode);

DistortionProfile distortion_profile(int height, DistortionMode mode);

/// 3x3 Gabor kernel on the meshgrid x, y in {-1, 0, 1}:
///   x_rot = x cos(theta) + y sin(theta), y_rot = -x sin(theta) + y cos(theta)
///   g = exp(-(x^2 + y^2) / (2 sigma^2)) * cos(frequency * x_rot + psi) / (2 pi sigma^2)
/// With psi = 0 the orientation is reduced modulo pi onto a fixed grid, which
/// makes kernel(theta) and kernel(theta + pi) bitwise identical.
std::array<double, 9> gabor_kernel(double frequency, double theta, double psi, double sigma);

/// Bank for one distortion coefficient: theta_i = pi*i/8 (i = 1..8),
/// psi = pi*epsilon, f = (pi/2) * sqrt(2)^epsilon * (1 + c), sigma = pi / (f + 0.1).
FilterBank pano_gabor_bank(double c, double epsilon = 0.0);

/// One bank per image row, driven by that row's latitude.
std::vector<FilterBank> latitude_bank_stack(int height, double epsilon = 0.0,
                                            DistortionMode mode = DistortionMode::Linear);

/// Gallery image: one row of 8 tiles per bank, each kernel min-max normalized
/// to 8 bits (constant kernels render 128) and upscaled nearest-neighbor.
ImageU8 export_bank_image(const std::vector<FilterBank>& banks, int scale = 16);

}  // namespace pgf
