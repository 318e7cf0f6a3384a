// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "pgf/gabor.hpp"
#include "pgf/tensor.hpp"

namespace pgf {

/// How the 8 orientation responses of a bank merge into one plane.
enum class Aggregate { Mean, Max, Sum };

Aggregate aggregate_from_string(std::string_view name);
std::string to_string(Aggregate aggregate);

/// Cross-correlation of one channel with an odd k x k kernel. Columns pad by
/// wrapping (longitude is periodic), rows pad by edge replication.
Grid conv2d_wrap(const Tensor& x, std::span<const double> kernel, int ksize, int channel);
Grid conv2d_wrap(const Grid& img, std::span<const double> kernel, int ksize);

/// Depthwise PanoGabor convolution. Requires channels == height; channel i is
/// filtered by banks[i]'s 8 kernels and the responses are aggregated in place.
Tensor pano_gabor_conv(const Tensor& x, const std::vector<FilterBank>& banks,
                       Aggregate aggregate = Aggregate::Mean);

/// Single-plane variant: output row r uses banks[r]. Equals the diagonal of
/// pano_gabor_conv applied to the plane replicated across height channels.
Grid latitude_adaptive_conv(const Grid& img, const std::vector<FilterBank>& banks,
                            Aggregate aggregate = Aggregate::Mean);

/// Pointwise affine map over channels.
struct Conv1x1 {
    int out_channels = 0;
    int in_channels = 0;
    std::vector<float> weight;  // out x in, row-major
    std::vector<float> bias;    // out
};

Tensor conv1x1(const Tensor& x, const Conv1x1& w);

/// Squeeze-and-excitation bottleneck weights.
struct SeWeights {
    int channels = 0;
    int reduced = 0;
    std::vector<float> reduce_weight;  // reduced x channels
    std::vector<float> reduce_bias;    // reduced
    std::vector<float> expand_weight;  // channels x reduced
    std::vector<float> expand_bias;    // channels
};

/// Bottleneck width for a channel count at the default reduction ratio 16,
/// clamped to at least one channel.
int se_reduced_channels(int channels);

/// Per-channel gates s = sigmoid(expand(relu(reduce(gap(x))))).
std::vector<double> se_scales(const Tensor& x, const SeWeights& w);

/// x scaled per channel by its gate.
Tensor se_layer(const Tensor& x, const SeWeights& w);

}  // namespace pgf
