// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#include "pgf/gabor.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pgf/geometry.hpp"

namespace pgf {

namespace {

constexpr double kPi = std::numbers::pi;

/// Reduces theta to [0, pi) and snaps it to a pi * 2^-40 grid. The grid step
/// (~3e-12 rad) swallows the rounding error of a caller-side theta + pi, so
/// both angles reduce to the same double.
double reduce_theta(double theta) {
    double t = std::fmod(theta, kPi);
    if (t < 0.0) t += kPi;
    const double quantum = kPi * 0x1p-40;
    t = std::nearbyint(t / quantum) * quantum;
    if (t >= kPi) t -= kPi;
    return t;
}

}  // namespace

DistortionMode distortion_mode_from_string(std::string_view name) {
    if (name == "linear") return DistortionMode::Linear;
    if (name == "cosine") return DistortionMode::Cosine;
    if (name == "inverse_cosine") return DistortionMode::InverseCosine;
    throw std::invalid_argument("unknown distortion mode: " + std::string(name));
}

std::string to_string(DistortionMode mode) {
    switch (mode) {
        case DistortionMode::Linear: return "linear";
        case DistortionMode::Cosine: return "cosine";
        case DistortionMode::InverseCosine: return "inverse_cosine";
    }
    throw std::invalid_argument("invalid distortion mode value");
}

double distortion_coefficient(double lat, DistortionMode mode) {
    if (!(lat >= -kPi / 2.0 && lat <= kPi / 2.0)) {
        throw std::invalid_argument("distortion_coefficient: lat outside [-pi/2, pi/2]");
    }
    const double a = std::fabs(lat);
    switch (mode) {
        case DistortionMode::Linear: return a * (kPi / 2.0);
        case DistortionMode::Cosine: return std::cos(a);
        case DistortionMode::InverseCosine: {
            constexpr double kMax = 10.0;
            return std::min(1.0 / std::cos(a), kMax);
        }
    }
    throw std::invalid_argument("invalid distortion mode value");
}

DistortionProfile distortion_profile(int height, DistortionMode mode) {
    if (height < 1) throw std::invalid_argument("distortion_profile: height must be >= 1");
    DistortionProfile profile;
    profile.height = height;
    profile.mode = mode;
    profile.coefficients.resize(static_cast<size_t>(height));
    const LatLonGrid grid{height, 2 * height};
    for (int r = 0; r < height; ++r) {
        profile.coefficients[r] = distortion_coefficient(grid.lat(r), mode);
    }
    return profile;
}

std::array<double, 9> gabor_kernel(double frequency, double theta, double psi, double sigma) {
    if (!(frequency > 0.0)) throw std::invalid_argument("gabor_kernel: frequency must be > 0");
    if (!(sigma > 0.0)) throw std::invalid_argument("gabor_kernel: sigma must be > 0");

    const double t = psi == 0.0 ? reduce_theta(theta) : theta;
    const double ct = std::cos(t);
    const double st = std::sin(t);
    const double inv_two_sigma2 = 0.5 / (sigma * sigma);
    const double norm = 1.0 / (2.0 * kPi * sigma * sigma);

    std::array<double, 9> k{};
    for (int i = 0; i < 3; ++i) {
        const double y = i - 1;
        for (int j = 0; j < 3; ++j) {
            const double x = j - 1;
            const double x_rot = x * ct + y * st;
            // rotation preserves x^2 + y^2, so the envelope skips it
            const double env = std::exp(-(x * x + y * y) * inv_two_sigma2);
            k[static_cast<size_t>(i) * 3 + j] = env * std::cos(frequency * x_rot + psi) * norm;
        }
    }
    return k;
}

FilterBank pano_gabor_bank(double c, double epsilon) {
    if (!(c >= 0.0)) throw std::invalid_argument("pano_gabor_bank: c must be >= 0");

    FilterBank bank;
    bank.coefficient = c;
    bank.epsilon = epsilon;
    const double psi = kPi * epsilon;
    const double f = (kPi / 2.0) * std::pow(std::numbers::sqrt2, epsilon) * (1.0 + c);
    const double sigma = kPi / (f + 0.1);
    for (int i = 0; i < 8; ++i) {
        const double theta = kPi * (i + 1) / 8.0;
        bank.params[i] = GaborParams{theta, psi, f, sigma};
        bank.kernels[i] = gabor_kernel(f, theta, psi, sigma);
    }
    return bank;
}

std::vector<FilterBank> latitude_bank_stack(int height, double epsilon, DistortionMode mode) {
    const DistortionProfile profile = distortion_profile(height, mode);
    std::vector<FilterBank> banks;
    banks.reserve(static_cast<size_t>(height));
    for (int r = 0; r < height; ++r) {
        banks.push_back(pano_gabor_bank(profile.coefficients[r], epsilon));
    }
    return banks;
}

ImageU8 export_bank_image(const std::vector<FilterBank>& banks, int scale) {
    if (banks.empty()) throw std::invalid_argument("export_bank_image: empty bank list");
    if (scale < 1) throw std::invalid_argument("export_bank_image: scale must be >= 1");

    const int tile = 3 * scale;
    ImageU8 img(static_cast<int>(banks.size()) * tile, 8 * tile, 1);
    for (size_t b = 0; b < banks.size(); ++b) {
        for (int o = 0; o < 8; ++o) {
            const auto& k = banks[b].kernels[o];
            double lo = k[0], hi = k[0];
            for (double v : k) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            const double range = hi - lo;
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    const double v = k[static_cast<size_t>(i) * 3 + j];
                    const uint8_t px =
                        range == 0.0
                            ? uint8_t{128}
                            : static_cast<uint8_t>(std::lround(255.0 * (v - lo) / range));
                    for (int dy = 0; dy < scale; ++dy) {
                        const int y = static_cast<int>(b) * tile + i * scale + dy;
                        for (int dx = 0; dx < scale; ++dx) {
                            img.at(y, o * tile + j * scale + dx) = px;
                        }
                    }
                }
            }
        }
    }
    return img;
}

}  // namespace pgf
