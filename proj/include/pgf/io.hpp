// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pgf/image.hpp"
#include "pgf/tensor.hpp"

namespace pgf {

/// Payload of a PGTN file: magic "PGTN", version u32, rank u32, dims
/// u32[rank], float32 row-major data, all little-endian.
struct TensorData {
    std::vector<uint32_t> dims;
    std::vector<float> data;

    size_t elements() const {
        size_t n = 1;
        for (uint32_t d : dims) n *= d;
        return dims.empty() ? 0 : n;
    }
};

void write_tensor(const std::string& path, const TensorData& t);
TensorData read_tensor(const std::string& path);

TensorData to_tensor_data(const Tensor& t);  // dims {C, H, W}
TensorData to_tensor_data(const Grid& g);    // dims {H, W}

/// Rank 3 required; rank 2 is accepted as a single channel.
Tensor tensor_from_data(const TensorData& t);
/// Rank 2 required; rank 3 is accepted when it has one channel.
Grid grid_from_data(const TensorData& t);

/// Grayscale PFM ("Pf"), negative scale = little-endian, rows bottom-up.
void write_pfm(const std::string& path, const Grid& depth);
Grid read_pfm(const std::string& path);

/// PNG with fixed encoder settings, so identical pixels give identical bytes.
void write_png(const std::string& path, const ImageU8& img);
ImageU8 read_png(const std::string& path);
void write_png16(const std::string& path, const ImageU16& img);
ImageU16 read_png16(const std::string& path);

/// 16-bit depth convention: one unit = one millimeter, clamped to [0, 65535].
ImageU16 depth_to_millimeters(const Grid& depth);
Grid millimeters_to_depth(const ImageU16& img);

/// 256-entry perceptual colormap baked into the binary.
const std::array<std::array<uint8_t, 3>, 256>& colormap_table();

/// Min-max normalized colormap render; constant maps take the low end.
ImageU8 colorize(const Grid& map);

/// Min-max normalized grayscale render.
ImageU8 to_gray(const Grid& map);

}  // namespace pgf
