// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pgf {

/// 8-bit image, row-major with interleaved channels (1 = gray, 3 = RGB).
struct ImageU8 {
    int height = 0;
    int width = 0;
    int channels = 1;
    std::vector<uint8_t> data;

    ImageU8() = default;
    ImageU8(int h, int w, int c) : height(h), width(w), channels(c) {
        if (h <= 0 || w <= 0 || (c != 1 && c != 3)) {
            throw std::invalid_argument("ImageU8: bad dimensions");
        }
        data.assign(static_cast<size_t>(h) * w * c, 0);
    }

    uint8_t& at(int y, int x, int c = 0) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    uint8_t at(int y, int x, int c = 0) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
};

/// 16-bit grayscale image (depth exports, millimeter convention).
struct ImageU16 {
    int height = 0;
    int width = 0;
    std::vector<uint16_t> data;

    ImageU16() = default;
    ImageU16(int h, int w) : height(h), width(w) {
        if (h <= 0 || w <= 0) throw std::invalid_argument("ImageU16: bad dimensions");
        data.assign(static_cast<size_t>(h) * w, 0);
    }

    uint16_t& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    uint16_t at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
};

}  // namespace pgf
