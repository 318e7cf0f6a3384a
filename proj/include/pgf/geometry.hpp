// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include "pgf/tensor.hpp"

namespace pgf {

/// Pixel-center latitude/longitude convention for an equirectangular grid.
/// Rows map to latitudes (top row closest to the north pole), columns to
/// longitudes. Uses half-pixel offsets so lat(r) == -lat(height-1-r) bitwise.
struct LatLonGrid {
    int height = 0;
    int width = 0;

    /// lat(r) = pi/2 - (r + 0.5) * pi / height, strictly decreasing.
    double lat(int r) const;
    /// lon(c) = -pi + (c + 0.5) * 2*pi / width, strictly increasing.
    double lon(int c) const;
};

/// Builds the lat/lon convention carrier. Requires width == 2 * height.
LatLonGrid erp_grid(int height, int width);

/// Six 90-degree perspective faces. Face order: front (+z at yaw_offset),
/// right, back, left, up, down. Each face is channels x face_size x face_size.
struct CubemapFaces {
    int face_size = 0;
    double yaw_offset = 0.0;
    std::array<Tensor, 6> faces;

    int channels() const { return faces[0].channels(); }
};

/// Gnomonic tangent-plane patch sampled around one ERP pixel.
struct TangentPatch {
    int row = 0;
    int col = 0;
    int size = 0;
    double angular_step = 0.0;
    std::vector<float> values;  // size x size, row-major, row 0 to the north

    float at(int i, int j) const { return values[static_cast<size_t>(i) * size + j]; }
};

/// Bilinear sample of an ERP image at (lat, lon), one value per channel.
/// Longitude wraps circularly; latitude beyond the first/last row clamps.
void bilinear_sample(const Tensor& img, double lat, double lon, std::span<float> out);
std::vector<float> bilinear_sample(const Tensor& img, double lat, double lon);
float bilinear_sample(const Grid& img, double lat, double lon);

/// Back-projects each face pixel through gnomonic geometry and samples the
/// ERP source bilinearly. yaw_offset rotates the face axes about the vertical.
CubemapFaces erp_to_cubemap(const Tensor& img, int face_size, double yaw_offset);

/// Assigns every ERP pixel's ray to exactly one face (largest face-normal
/// projection, ties to the first face in order) and samples it bilinearly.
Tensor cubemap_to_erp(const CubemapFaces& faces, int height, int width);

/// Samples a size x size gnomonic grid centered at the pixel's (lat, lon).
/// angular_step <= 0 selects the default equatorial pixel pitch 2*pi/width.
TangentPatch tangent_patch(const Grid& img, int row, int col, int size = 3,
                           double angular_step = 0.0);
TangentPatch tangent_patch(const Tensor& img, int row, int col, int size = 3,
                           double angular_step = 0.0, int channel = 0);

namespace detail {

/// One tangent-patch sampling position, resolved against the ERP lattice.
/// Rows are absolute (clamped); the column is stored relative to the center
/// pixel so the same table serves every column of a row, which makes every
/// consumer bitwise equivariant under circular column shifts.
struct PatchTap {
    int r0 = 0, r1 = 0;  // clamped row pair
    double wr = 0.0;     // weight of r1
    int dc = 0;          // column offset of the left tap
    double wc = 0.0;     // weight of the right column tap
    bool center = false; // exact center element, sampled directly
};

/// Taps for all size x size patch elements at the given row, row-major.
std::vector<PatchTap> tangent_taps(int height, int width, int row, int size, double step);

/// Applies one tap at (row fixed by tap, center column col).
double sample_tap(const float* plane, int width, const PatchTap& tap, int col);

struct FaceFrame {
    std::array<double, 3> f, u, v;  // center axis, right axis, down axis
};
std::array<FaceFrame, 6> face_frames(double yaw_offset);

}  // namespace detail

}  // namespace pgf
