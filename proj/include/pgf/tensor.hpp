// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace pgf {

/// Dense C x H x W float32 tensor, channel-major row-major storage.
/// Serves both equirectangular images and feature maps.
class Tensor {
public:
    Tensor() = default;

    Tensor(int channels, int height, int width, float fill = 0.0f)
        : channels_(channels), height_(height), width_(width) {
        if (channels <= 0 || height <= 0 || width <= 0) {
            throw std::invalid_argument("Tensor: dimensions must be positive");
        }
        data_.assign(static_cast<size_t>(channels) * height * width, fill);
    }

    int channels() const { return channels_; }
    int height() const { return height_; }
    int width() const { return width_; }
    size_t size() const { return data_.size(); }

    float& at(int c, int y, int x) { return data_[index(c, y, x)]; }
    float at(int c, int y, int x) const { return data_[index(c, y, x)]; }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }

    std::span<float> channel(int c) {
        return {data_.data() + static_cast<size_t>(c) * height_ * width_,
                static_cast<size_t>(height_) * width_};
    }
    std::span<const float> channel(int c) const {
        return {data_.data() + static_cast<size_t>(c) * height_ * width_,
                static_cast<size_t>(height_) * width_};
    }

    bool same_shape(const Tensor& o) const {
        return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
    }

    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.channels_ == b.channels_ && a.height_ == b.height_ &&
               a.width_ == b.width_ && a.data_ == b.data_;
    }

private:
    size_t index(int c, int y, int x) const {
        return (static_cast<size_t>(c) * height_ + y) * width_ + x;
    }

    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<float> data_;
};

/// Dense H x W float32 grid. Depth maps, gradient maps, single planes.
class Grid {
public:
    Grid() = default;

    Grid(int height, int width, float fill = 0.0f) : height_(height), width_(width) {
        if (height <= 0 || width <= 0) {
            throw std::invalid_argument("Grid: dimensions must be positive");
        }
        data_.assign(static_cast<size_t>(height) * width, fill);
    }

    int height() const { return height_; }
    int width() const { return width_; }
    size_t size() const { return data_.size(); }

    float& at(int y, int x) { return data_[static_cast<size_t>(y) * width_ + x]; }
    float at(int y, int x) const { return data_[static_cast<size_t>(y) * width_ + x]; }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }

    bool same_shape(const Grid& o) const {
        return height_ == o.height_ && width_ == o.width_;
    }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.height_ == b.height_ && a.width_ == b.width_ && a.data_ == b.data_;
    }

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<float> data_;
};

/// Stacks two tensors of equal spatial size along the channel axis.
inline Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.height() != b.height() || a.width() != b.width()) {
        throw std::invalid_argument("concat_channels: spatial shapes differ");
    }
    Tensor out(a.channels() + b.channels(), a.height(), a.width());
    const size_t plane = static_cast<size_t>(a.height()) * a.width();
    std::copy_n(a.data(), plane * a.channels(), out.data());
    std::copy_n(b.data(), plane * b.channels(), out.data() + plane * a.channels());
    return out;
}

}  // namespace pgf
