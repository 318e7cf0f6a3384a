// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pgf/conv.hpp"
#include "pgf/gabor.hpp"
#include "pgf/tensor.hpp"

namespace pgf {

struct FusionConfig {
    Aggregate aggregate = Aggregate::Mean;
    float epsilon = 0.0f;
    DistortionMode mode = DistortionMode::Linear;
    int out_channels = 0;  // 0 = take from the weights
};

/// Learned tensors of the fusion forward pass. The filter banks are derived
/// state: regenerated from (height, epsilon, mode) rather than stored raw.
struct FusionWeights {
    int in_channels = 0;  // channels of each input tensor
    int height = 0;       // compressed channel count, equals image height
    float epsilon = 0.0f;
    DistortionMode mode = DistortionMode::Linear;
    Conv1x1 compress;  // 2*in_channels -> height
    std::vector<FilterBank> pg_banks;
    SeWeights se;
    Conv1x1 output;  // height -> out_channels
};

enum class InitScheme { KaimingUniform, Constant };

InitScheme init_scheme_from_string(std::string_view name);

/// Reproducible weights: same arguments and seed give bitwise identical
/// results. Constant scheme fills each matrix with 1/fan_in, biases with 0.
FusionWeights init_weights(int in_channels, int height, int out_channels,
                           const FusionConfig& cfg, uint64_t seed,
                           InitScheme scheme = InitScheme::KaimingUniform);

/// Fuses two feature tensors of equal shape: concat -> 1x1 compress to height
/// channels -> PanoGabor filtering -> gate by the per-pixel channel mean of
/// the compressed tensor -> SE recalibration -> 1x1 projection.
Tensor cs_ufm_forward(const Tensor& a, const Tensor& b, const FusionWeights& w,
                      const FusionConfig& cfg);

/// Binary weights file: magic "PGFW", version u32, then named tensor records
/// (name length u32, name bytes, rank u32, dims u32[rank], float32 payload),
/// little-endian throughout. Save/load round trips are bitwise.
void save_weights(const FusionWeights& w, const std::string& path);
FusionWeights load_weights(const std::string& path);

}  // namespace pgf
