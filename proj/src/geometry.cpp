// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#include "pgf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pgf/parallel.hpp"

namespace pgf {

namespace {

constexpr double kPi = std::numbers::pi;

int wrap_col(int c, int width) {
    c %= width;
    return c < 0 ? c + width : c;
}

int clamp_row(int r, int height) { return std::clamp(r, 0, height - 1); }

/// Continuous row coordinate of a latitude under the pixel-center convention.
double row_coord(double lat, int height) {
    return (kPi / 2.0 - lat) * height / kPi - 0.5;
}

/// Continuous (wrapped) column coordinate of a longitude.
double col_coord(double lon, int width) {
    double c = (lon + kPi) * width / (2.0 * kPi) - 0.5;
    const double w = static_cast<double>(width);
    c = std::fmod(c, w);
    if (c < 0.0) c += w;
    if (c >= w) c = 0.0;  // fmod can round up to w
    return c;
}

struct ErpTaps {
    int r0, r1, c0, c1;
    double wr, wc;
};

ErpTaps erp_taps(double lat, double lon, int height, int width) {
    const double rf = row_coord(lat, height);
    const double cf = col_coord(lon, width);
    const double rfl = std::floor(rf);
    const double cfl = std::floor(cf);
    ErpTaps t;
    t.wr = rf - rfl;
    t.wc = cf - cfl;
    const int r0 = static_cast<int>(rfl);
    t.r0 = clamp_row(r0, height);
    t.r1 = clamp_row(r0 + 1, height);
    const int c0 = static_cast<int>(cfl);
    t.c0 = wrap_col(c0, width);
    t.c1 = wrap_col(c0 + 1, width);
    return t;
}

double bilerp(const float* plane, int width, const ErpTaps& t) {
    const double v00 = plane[static_cast<size_t>(t.r0) * width + t.c0];
    const double v01 = plane[static_cast<size_t>(t.r0) * width + t.c1];
    const double v10 = plane[static_cast<size_t>(t.r1) * width + t.c0];
    const double v11 = plane[static_cast<size_t>(t.r1) * width + t.c1];
    const double top = v00 + t.wc * (v01 - v00);
    const double bot = v10 + t.wc * (v11 - v10);
    return top + t.wr * (bot - top);
}

void check_angles(double lat, double lon) {
    if (!std::isfinite(lat) || !std::isfinite(lon)) {
        throw std::invalid_argument("bilinear_sample: non-finite lat/lon");
    }
}

std::array<double, 3> rotate_yaw(const std::array<double, 3>& w, double cy, double sy) {
    return {w[0] * cy + w[2] * sy, w[1], w[2] * cy - w[0] * sy};
}

}  // namespace

double LatLonGrid::lat(int r) const {
    // (height - 2r - 1) * pi / (2 height): integer numerator keeps exact
    // row symmetry lat(r) == -lat(height-1-r)
    return (height - 2 * r - 1) * (kPi / (2.0 * height));
}

double LatLonGrid::lon(int c) const {
    return (2 * c + 1 - width) * (kPi / width);
}

LatLonGrid erp_grid(int height, int width) {
    if (height < 2 || width <= 0) {
        throw std::invalid_argument("erp_grid: height must be >= 2 and width positive");
    }
    if (width != 2 * height) {
        throw std::invalid_argument("erp_grid: width must equal 2 * height");
    }
    return LatLonGrid{height, width};
}

void bilinear_sample(const Tensor& img, double lat, double lon, std::span<float> out) {
    check_angles(lat, lon);
    const ErpTaps t = erp_taps(lat, lon, img.height(), img.width());
    for (int c = 0; c < img.channels(); ++c) {
        out[c] = static_cast<float>(bilerp(img.channel(c).data(), img.width(), t));
    }
}

std::vector<float> bilinear_sample(const Tensor& img, double lat, double lon) {
    std::vector<float> out(static_cast<size_t>(img.channels()));
    bilinear_sample(img, lat, lon, out);
    return out;
}

float bilinear_sample(const Grid& img, double lat, double lon) {
    check_angles(lat, lon);
    const ErpTaps t = erp_taps(lat, lon, img.height(), img.width());
    return static_cast<float>(bilerp(img.data(), img.width(), t));
}

namespace detail {

std::array<FaceFrame, 6> face_frames(double yaw_offset) {
    const double cy = std::cos(yaw_offset);
    const double sy = std::sin(yaw_offset);
    // Unit sphere direction of (lat, lon): x = cos(lat) sin(lon), y = sin(lat),
    // z = cos(lat) cos(lon). Front faces +z at yaw 0.
    std::array<FaceFrame, 6> frames{{
        {{{0, 0, 1}}, {{1, 0, 0}}, {{0, -1, 0}}},    // front
        {{{1, 0, 0}}, {{0, 0, -1}}, {{0, -1, 0}}},   // right
        {{{0, 0, -1}}, {{-1, 0, 0}}, {{0, -1, 0}}},  // back
        {{{-1, 0, 0}}, {{0, 0, 1}}, {{0, -1, 0}}},   // left
        {{{0, 1, 0}}, {{1, 0, 0}}, {{0, 0, 1}}},     // up
        {{{0, -1, 0}}, {{1, 0, 0}}, {{0, 0, -1}}},   // down
    }};
    for (auto& fr : frames) {
        fr.f = rotate_yaw(fr.f, cy, sy);
        fr.u = rotate_yaw(fr.u, cy, sy);
        fr.v = rotate_yaw(fr.v, cy, sy);
    }
    return frames;
}

std::vector<PatchTap> tangent_taps(int height, int width, int row, int size, double step) {
    const LatLonGrid grid{height, width};
    const double lat0 = grid.lat(row);
    const double sin_lat0 = std::sin(lat0);
    const double cos_lat0 = std::cos(lat0);
    const int half = size / 2;

    std::vector<PatchTap> taps(static_cast<size_t>(size) * size);
    for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
            PatchTap& tap = taps[static_cast<size_t>(i) * size + j];
            const double u = (j - half) * step;   // east on the tangent plane
            const double v = -(i - half) * step;  // north
            if (u == 0.0 && v == 0.0) {
                tap.center = true;
                tap.r0 = tap.r1 = clamp_row(row, height);
                continue;
            }
            // Inverse gnomonic projection of plane point (u, v) at (lat0, .).
            // The longitude offset depends only on the latitude, so it can be
            // carried as a relative column shift.
            const double rho = std::hypot(u, v);
            const double cang = std::atan(rho);
            const double sin_c = std::sin(cang);
            const double cos_c = std::cos(cang);
            const double lat = std::asin(cos_c * sin_lat0 + v * sin_c * cos_lat0 / rho);
            const double dlon = std::atan2(u * sin_c,
                                           rho * cos_lat0 * cos_c - v * sin_lat0 * sin_c);

            const double rf = row_coord(lat, height);
            const double rfl = std::floor(rf);
            tap.wr = rf - rfl;
            const int r0 = static_cast<int>(rfl);
            tap.r0 = clamp_row(r0, height);
            tap.r1 = clamp_row(r0 + 1, height);

            const double dcf = dlon * width / (2.0 * kPi);
            const double dfl = std::floor(dcf);
            tap.wc = dcf - dfl;
            tap.dc = static_cast<int>(dfl);
        }
    }
    return taps;
}

double sample_tap(const float* plane, int width, const PatchTap& tap, int col) {
    if (tap.center) {
        return plane[static_cast<size_t>(tap.r0) * width + col];
    }
    const int c0 = wrap_col(col + tap.dc, width);
    const int c1 = wrap_col(col + tap.dc + 1, width);
    const double v00 = plane[static_cast<size_t>(tap.r0) * width + c0];
    const double v01 = plane[static_cast<size_t>(tap.r0) * width + c1];
    const double v10 = plane[static_cast<size_t>(tap.r1) * width + c0];
    const double v11 = plane[static_cast<size_t>(tap.r1) * width + c1];
    const double top = v00 + tap.wc * (v01 - v00);
    const double bot = v10 + tap.wc * (v11 - v10);
    return top + tap.wr * (bot - top);
}

}  // namespace detail

CubemapFaces erp_to_cubemap(const Tensor& img, int face_size, double yaw_offset) {
    if (face_size < 2) {
        throw std::invalid_argument("erp_to_cubemap: face_size must be >= 2");
    }
    if (img.width() != 2 * img.height()) {
        throw std::invalid_argument("erp_to_cubemap: ERP width must equal 2 * height");
    }
    const auto frames = detail::face_frames(yaw_offset);
    CubemapFaces cube;
    cube.face_size = face_size;
    cube.yaw_offset = yaw_offset;

    const int S = face_size;
    const int C = img.channels();
    for (int fi = 0; fi < 6; ++fi) {
        cube.faces[fi] = Tensor(C, S, S);
        Tensor& face = cube.faces[fi];
        const auto& fr = frames[fi];
        parallel_for(S, [&](int64_t ib, int64_t ie) {
            std::vector<float> px(static_cast<size_t>(C));
            for (int64_t i = ib; i < ie; ++i) {
                const double b = (2.0 * (i + 0.5)) / S - 1.0;
                for (int j = 0; j < S; ++j) {
                    const double a = (2.0 * (j + 0.5)) / S - 1.0;
                    const double x = fr.f[0] + a * fr.u[0] + b * fr.v[0];
                    const double y = fr.f[1] + a * fr.u[1] + b * fr.v[1];
                    const double z = fr.f[2] + a * fr.u[2] + b * fr.v[2];
                    const double lat = std::asin(y / std::sqrt(x * x + y * y + z * z));
                    const double lon = std::atan2(x, z);
                    bilinear_sample(img, lat, lon, px);
                    for (int c = 0; c < C; ++c) face.at(c, static_cast<int>(i), j) = px[c];
                }
            }
        });
    }
    return cube;
}

Tensor cubemap_to_erp(const CubemapFaces& cube, int height, int width) {
    if (width != 2 * height || height < 2) {
        throw std::invalid_argument("cubemap_to_erp: width must equal 2 * height");
    }
    const int C = cube.channels();
    const int S = cube.face_size;
    for (const Tensor& f : cube.faces) {
        if (f.channels() != C || f.height() != S || f.width() != S) {
            throw std::invalid_argument("cubemap_to_erp: inconsistent face shapes");
        }
    }
    const auto frames = detail::face_frames(cube.yaw_offset);
    const LatLonGrid grid{height, width};
    Tensor out(C, height, width);

    parallel_for(height, [&](int64_t rb, int64_t re) {
        for (int64_t r = rb; r < re; ++r) {
            const double lat = grid.lat(static_cast<int>(r));
            const double cl = std::cos(lat);
            const double sl = std::sin(lat);
            for (int c = 0; c < width; ++c) {
                const double lon = grid.lon(c);
                const double dx = cl * std::sin(lon);
                const double dy = sl;
                const double dz = cl * std::cos(lon);
                int best = 0;
                double best_dot = -2.0;
                for (int fi = 0; fi < 6; ++fi) {
                    const auto& f = frames[fi].f;
                    const double dot = dx * f[0] + dy * f[1] + dz * f[2];
                    if (dot > best_dot) {
                        best_dot = dot;
                        best = fi;
                    }
                }
                const auto& fr = frames[best];
                const double a = (dx * fr.u[0] + dy * fr.u[1] + dz * fr.u[2]) / best_dot;
                const double b = (dx * fr.v[0] + dy * fr.v[1] + dz * fr.v[2]) / best_dot;
                // face-local bilinear with clamping at face borders
                const double jf = (a + 1.0) * S / 2.0 - 0.5;
                const double ifc = (b + 1.0) * S / 2.0 - 0.5;
                const double jfl = std::floor(jf);
                const double ifl = std::floor(ifc);
                const double wj = jf - jfl;
                const double wi = ifc - ifl;
                const int j0 = std::clamp(static_cast<int>(jfl), 0, S - 1);
                const int j1 = std::clamp(static_cast<int>(jfl) + 1, 0, S - 1);
                const int i0 = std::clamp(static_cast<int>(ifl), 0, S - 1);
                const int i1 = std::clamp(static_cast<int>(ifl) + 1, 0, S - 1);
                const Tensor& face = cube.faces[best];
                for (int ch = 0; ch < C; ++ch) {
                    const double v00 = face.at(ch, i0, j0);
                    const double v01 = face.at(ch, i0, j1);
                    const double v10 = face.at(ch, i1, j0);
                    const double v11 = face.at(ch, i1, j1);
                    const double top = v00 + wj * (v01 - v00);
                    const double bot = v10 + wj * (v11 - v10);
                    out.at(ch, static_cast<int>(r), c) = static_cast<float>(top + wi * (bot - top));
                }
            }
        }
    });
    return out;
}

namespace {

TangentPatch tangent_patch_plane(const float* plane, int height, int width, int row,
                                 int col, int size, double angular_step) {
    if (size < 1 || size % 2 == 0) {
        throw std::invalid_argument("tangent_patch: size must be odd");
    }
    if (row < 0 || row >= height || col < 0 || col >= width) {
        throw std::invalid_argument("tangent_patch: center out of bounds");
    }
    double step = angular_step;
    if (step <= 0.0) step = 2.0 * kPi / width;
    if (!std::isfinite(step)) {
        throw std::invalid_argument("tangent_patch: angular_step must be finite");
    }

    TangentPatch patch;
    patch.row = row;
    patch.col = col;
    patch.size = size;
    patch.angular_step = step;
    patch.values.resize(static_cast<size_t>(size) * size);

    const auto taps = detail::tangent_taps(height, width, row, size, step);
    for (size_t k = 0; k < taps.size(); ++k) {
        patch.values[k] = static_cast<float>(detail::sample_tap(plane, width, taps[k], col));
    }
    return patch;
}

}  // namespace

TangentPatch tangent_patch(const Grid& img, int row, int col, int size, double angular_step) {
    if (img.width() != 2 * img.height()) {
        throw std::invalid_argument("tangent_patch: ERP width must equal 2 * height");
    }
    return tangent_patch_plane(img.data(), img.height(), img.width(), row, col, size,
                               angular_step);
}

TangentPatch tangent_patch(const Tensor& img, int row, int col, int size,
                           double angular_step, int channel) {
    if (img.width() != 2 * img.height()) {
        throw std::invalid_argument("tangent_patch: ERP width must equal 2 * height");
    }
    if (channel < 0 || channel >= img.channels()) {
        throw std::invalid_argument("tangent_patch: channel out of range");
    }
    return tangent_patch_plane(img.channel(channel).data(), img.height(), img.width(),
                               row, col, size, angular_step);
}

}  // namespace pgf
