// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#include "pgf/conv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pgf/parallel.hpp"

namespace pgf {

namespace {

int wrap_col(int c, int width) {
    c %= width;
    return c < 0 ? c + width : c;
}

void conv_plane(const float* src, int height, int width, std::span<const double> kernel,
                int ksize, float* dst) {
    const int half = ksize / 2;
    parallel_for(height, [&](int64_t rb, int64_t re) {
        for (int64_t r = rb; r < re; ++r) {
            for (int c = 0; c < width; ++c) {
                double acc = 0.0;
                for (int ki = 0; ki < ksize; ++ki) {
                    const int rr = std::clamp(static_cast<int>(r) + ki - half, 0, height - 1);
                    const float* row = src + static_cast<size_t>(rr) * width;
                    for (int kj = 0; kj < ksize; ++kj) {
                        const int cc = wrap_col(c + kj - half, width);
                        acc += kernel[static_cast<size_t>(ki) * ksize + kj] * row[cc];
                    }
                }
                dst[static_cast<size_t>(r) * width + c] = static_cast<float>(acc);
            }
        }
    });
}

double aggregate_responses(const std::array<double, 8>& resp, Aggregate aggregate) {
    switch (aggregate) {
        case Aggregate::Mean: {
            double s = 0.0;
            for (double v : resp) s += v;
            return s / 8.0;
        }
        case Aggregate::Max: {
            double m = resp[0];
            for (double v : resp) m = std::max(m, v);
            return m;
        }
        case Aggregate::Sum: {
            double s = 0.0;
            for (double v : resp) s += v;
            return s;
        }
    }
    throw std::invalid_argument("invalid aggregate value");
}

/// One output row of the 8-orientation 3x3 bank applied to a plane.
void bank_conv_row(const float* plane, int height, int width, int r, const FilterBank& bank,
                   Aggregate aggregate, float* out_row) {
    const int r0 = std::max(r - 1, 0);
    const int r2 = std::min(r + 1, height - 1);
    const float* rows[3] = {plane + static_cast<size_t>(r0) * width,
                            plane + static_cast<size_t>(r) * width,
                            plane + static_cast<size_t>(r2) * width};
    for (int c = 0; c < width; ++c) {
        const int cl = wrap_col(c - 1, width);
        const int cr = wrap_col(c + 1, width);
        double patch[9];
        for (int i = 0; i < 3; ++i) {
            patch[i * 3 + 0] = rows[i][cl];
            patch[i * 3 + 1] = rows[i][c];
            patch[i * 3 + 2] = rows[i][cr];
        }
        std::array<double, 8> resp;
        for (int o = 0; o < 8; ++o) {
            const auto& k = bank.kernels[o];
            double acc = 0.0;
            for (int t = 0; t < 9; ++t) acc += k[t] * patch[t];
            resp[o] = acc;
        }
        out_row[c] = static_cast<float>(aggregate_responses(resp, aggregate));
    }
}

}  // namespace

Aggregate aggregate_from_string(std::string_view name) {
    if (name == "mean") return Aggregate::Mean;
    if (name == "max") return Aggregate::Max;
    if (name == "sum") return Aggregate::Sum;
    throw std::invalid_argument("unknown aggregate mode: " + std::string(name));
}

std::string to_string(Aggregate aggregate) {
    switch (aggregate) {
        case Aggregate::Mean: return "mean";
        case Aggregate::Max: return "max";
        case Aggregate::Sum: return "sum";
    }
    throw std::invalid_argument("invalid aggregate value");
}

Grid conv2d_wrap(const Tensor& x, std::span<const double> kernel, int ksize, int channel) {
    if (channel < 0 || channel >= x.channels()) {
        throw std::invalid_argument("conv2d_wrap: channel out of range");
    }
    if (ksize < 1 || ksize % 2 == 0) {
        throw std::invalid_argument("conv2d_wrap: kernel size must be odd");
    }
    if (kernel.size() != static_cast<size_t>(ksize) * ksize) {
        throw std::invalid_argument("conv2d_wrap: kernel size mismatch");
    }
    Grid out(x.height(), x.width());
    conv_plane(x.channel(channel).data(), x.height(), x.width(), kernel, ksize, out.data());
    return out;
}

Grid conv2d_wrap(const Grid& img, std::span<const double> kernel, int ksize) {
    if (ksize < 1 || ksize % 2 == 0) {
        throw std::invalid_argument("conv2d_wrap: kernel size must be odd");
    }
    if (kernel.size() != static_cast<size_t>(ksize) * ksize) {
        throw std::invalid_argument("conv2d_wrap: kernel size mismatch");
    }
    Grid out(img.height(), img.width());
    conv_plane(img.data(), img.height(), img.width(), kernel, ksize, out.data());
    return out;
}

Tensor pano_gabor_conv(const Tensor& x, const std::vector<FilterBank>& banks,
                       Aggregate aggregate) {
    if (x.channels() != x.height()) {
        throw std::invalid_argument("pano_gabor_conv: channels must equal height");
    }
    if (banks.size() != static_cast<size_t>(x.channels())) {
        throw std::invalid_argument("pano_gabor_conv: need one bank per channel");
    }
    const int H = x.height();
    const int W = x.width();
    Tensor out(x.channels(), H, W);
    parallel_for(x.channels(), [&](int64_t cb, int64_t ce) {
        for (int64_t ch = cb; ch < ce; ++ch) {
            const float* plane = x.channel(static_cast<int>(ch)).data();
            float* dst = out.channel(static_cast<int>(ch)).data();
            for (int r = 0; r < H; ++r) {
                bank_conv_row(plane, H, W, r, banks[static_cast<size_t>(ch)], aggregate,
                              dst + static_cast<size_t>(r) * W);
            }
        }
    });
    return out;
}

Grid latitude_adaptive_conv(const Grid& img, const std::vector<FilterBank>& banks,
                            Aggregate aggregate) {
    if (banks.size() != static_cast<size_t>(img.height())) {
        throw std::invalid_argument("latitude_adaptive_conv: need one bank per row");
    }
    const int H = img.height();
    const int W = img.width();
    Grid out(H, W);
    parallel_for(H, [&](int64_t rb, int64_t re) {
        for (int64_t r = rb; r < re; ++r) {
            bank_conv_row(img.data(), H, W, static_cast<int>(r), banks[static_cast<size_t>(r)],
                          aggregate, out.data() + static_cast<size_t>(r) * W);
        }
    });
    return out;
}

Tensor conv1x1(const Tensor& x, const Conv1x1& w) {
    if (w.in_channels != x.channels()) {
        throw std::invalid_argument("conv1x1: input channel mismatch");
    }
    if (w.out_channels < 1 ||
        w.weight.size() != static_cast<size_t>(w.out_channels) * w.in_channels ||
        w.bias.size() != static_cast<size_t>(w.out_channels)) {
        throw std::invalid_argument("conv1x1: inconsistent weight shapes");
    }
    const int H = x.height();
    const int W = x.width();
    const size_t plane = static_cast<size_t>(H) * W;
    Tensor out(w.out_channels, H, W);
    parallel_for(w.out_channels, [&](int64_t ob, int64_t oe) {
        for (int64_t o = ob; o < oe; ++o) {
            const float* wrow = w.weight.data() + static_cast<size_t>(o) * w.in_channels;
            float* dst = out.channel(static_cast<int>(o)).data();
            for (size_t p = 0; p < plane; ++p) {
                double acc = w.bias[static_cast<size_t>(o)];
                for (int i = 0; i < w.in_channels; ++i) {
                    acc += static_cast<double>(wrow[i]) * x.data()[static_cast<size_t>(i) * plane + p];
                }
                dst[p] = static_cast<float>(acc);
            }
        }
    });
    return out;
}

int se_reduced_channels(int channels) { return std::max(1, channels / 16); }

std::vector<double> se_scales(const Tensor& x, const SeWeights& w) {
    if (w.channels != x.channels()) {
        throw std::invalid_argument("se_layer: channel mismatch");
    }
    if (w.reduced < 1 ||
        w.reduce_weight.size() != static_cast<size_t>(w.reduced) * w.channels ||
        w.reduce_bias.size() != static_cast<size_t>(w.reduced) ||
        w.expand_weight.size() != static_cast<size_t>(w.channels) * w.reduced ||
        w.expand_bias.size() != static_cast<size_t>(w.channels)) {
        throw std::invalid_argument("se_layer: inconsistent weight shapes");
    }

    const size_t plane = static_cast<size_t>(x.height()) * x.width();
    // The pooled mean feeds a per-channel gate that must not change when the
    // image is circularly shifted, so the reduction runs in a canonical
    // (sorted) order instead of scan order.
    std::vector<float> scratch(plane);
    std::vector<double> gap(static_cast<size_t>(w.channels));
    for (int c = 0; c < w.channels; ++c) {
        const auto span = x.channel(c);
        std::copy(span.begin(), span.end(), scratch.begin());
        std::sort(scratch.begin(), scratch.end());
        double acc = 0.0;
        for (float v : scratch) acc += v;
        gap[static_cast<size_t>(c)] = acc / static_cast<double>(plane);
    }

    std::vector<double> hidden(static_cast<size_t>(w.reduced));
    for (int i = 0; i < w.reduced; ++i) {
        double acc = w.reduce_bias[static_cast<size_t>(i)];
        for (int c = 0; c < w.channels; ++c) {
            acc += static_cast<double>(w.reduce_weight[static_cast<size_t>(i) * w.channels + c]) *
                   gap[static_cast<size_t>(c)];
        }
        hidden[static_cast<size_t>(i)] = std::max(acc, 0.0);
    }

    std::vector<double> scales(static_cast<size_t>(w.channels));
    for (int c = 0; c < w.channels; ++c) {
        double acc = w.expand_bias[static_cast<size_t>(c)];
        for (int i = 0; i < w.reduced; ++i) {
            acc += static_cast<double>(w.expand_weight[static_cast<size_t>(c) * w.reduced + i]) *
                   hidden[static_cast<size_t>(i)];
        }
        scales[static_cast<size_t>(c)] = 1.0 / (1.0 + std::exp(-acc));
    }
    return scales;
}

Tensor se_layer(const Tensor& x, const SeWeights& w) {
    const std::vector<double> scales = se_scales(x, w);
    const size_t plane = static_cast<size_t>(x.height()) * x.width();
    Tensor out(x.channels(), x.height(), x.width());
    parallel_for(x.channels(), [&](int64_t cb, int64_t ce) {
        for (int64_t c = cb; c < ce; ++c) {
            const double s = scales[static_cast<size_t>(c)];
            const float* src = x.channel(static_cast<int>(c)).data();
            float* dst = out.channel(static_cast<int>(c)).data();
            for (size_t p = 0; p < plane; ++p) {
                dst[p] = static_cast<float>(src[p] * s);
            }
        }
    });
    return out;
}

}  // namespace pgf
