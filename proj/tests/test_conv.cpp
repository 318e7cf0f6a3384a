// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#include "pgf/conv.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace pgf;
namespace tu = testutil;

namespace {

// reference cross-correlation with wrap columns and replicate rows
Grid reference_conv(const Grid& img, const std::array<double, 9>& k) {
    const int h = img.height(), w = img.width();
    Grid out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                const int yy = std::clamp(y + dy, 0, h - 1);
                for (int dx = -1; dx <= 1; ++dx) {
                    const int xx = ((x + dx) % w + w) % w;
                    acc += k[(dy + 1) * 3 + (dx + 1)] * img.at(yy, xx);
                }
            }
            out.at(y, x) = static_cast<float>(acc);
        }
    }
    return out;
}

FilterBank identity_bank() {
    FilterBank bank = pano_gabor_bank(0.0);
    for (auto& k : bank.kernels) {
        k.fill(0.0);
        k[4] = 1.0;
    }
    return bank;
}

}  // namespace

TEST(Conv2dWrap, MatchesReference) {
    const Grid img = tu::random_grid(5, 8, 31, -1.0f, 1.0f);
    const std::array<double, 9> k = {0.3, -0.1, 0.7, 1.2, -0.5, 0.05, -0.9, 0.4, 0.13};
    const Grid got = conv2d_wrap(img, k, 3);
    const Grid want = reference_conv(img, k);
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 8; ++x) {
            EXPECT_NEAR(got.at(y, x), want.at(y, x), 1e-6) << y << "," << x;
        }
    }
}

TEST(Conv2dWrap, IdentityKernel) {
    const Grid img = tu::random_grid(6, 12, 32);
    std::array<double, 9> k{};
    k[4] = 1.0;
    const Grid out = conv2d_wrap(img, k, 3);
    for (size_t i = 0; i < img.size(); ++i) EXPECT_EQ(out.data()[i], img.data()[i]);
}

TEST(Conv2dWrap, ConstantTimesKernelSum) {
    const Grid img(4, 8, 2.0f);
    const std::array<double, 9> k = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    const Grid out = conv2d_wrap(img, k, 3);
    for (size_t i = 0; i < out.size(); ++i) EXPECT_FLOAT_EQ(out.data()[i], 90.0f);
}

TEST(Conv2dWrap, ColumnsWrap) {
    Grid img(3, 6, 0.0f);
    img.at(1, 5) = 4.0f;
    std::array<double, 9> left_neighbor{};
    left_neighbor[3] = 1.0;  // picks (y, x-1)
    const Grid out = conv2d_wrap(img, left_neighbor, 3);
    EXPECT_FLOAT_EQ(out.at(1, 0), 4.0f);
}

TEST(Conv2dWrap, RowsReplicate) {
    Grid img(3, 4, 0.0f);
    for (int x = 0; x < 4; ++x) img.at(0, x) = 1.0f;
    std::array<double, 9> top_neighbor{};
    top_neighbor[1] = 1.0;  // picks (y-1, x)
    const Grid out = conv2d_wrap(img, top_neighbor, 3);
    for (int x = 0; x < 4; ++x) {
        EXPECT_FLOAT_EQ(out.at(0, x), 1.0f);  // clamped to row 0
        EXPECT_FLOAT_EQ(out.at(1, x), 1.0f);
        EXPECT_FLOAT_EQ(out.at(2, x), 0.0f);
    }
}

TEST(Conv2dWrap, ShiftEquivarianceBitwise) {
    const Grid img = tu::random_grid(8, 16, 33);
    const std::array<double, 9> k = {0.1, 0.2, -0.3, 0.4, 0.5, -0.6, 0.7, 0.8, 0.9};
    for (int s : {1, 5, 11}) {
        const Grid a = conv2d_wrap(tu::shift_cols(img, s), k, 3);
        const Grid b = tu::shift_cols(conv2d_wrap(img, k, 3), s);
        for (size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a.data()[i], b.data()[i]);
    }
}

TEST(Conv2dWrap, TensorChannelOverload) {
    const Tensor t = tu::random_tensor(3, 5, 10, 34);
    for (int c = 0; c < 3; ++c) {
        Grid plane(5, 10);
        std::copy(t.channel(c).begin(), t.channel(c).end(), plane.data());
        const std::array<double, 9> k = {0, 1, 0, 1, -4, 1, 0, 1, 0};
        const Grid a = conv2d_wrap(t, k, 3, c);
        const Grid b = conv2d_wrap(plane, k, 3);
        for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.data()[i], b.data()[i]);
    }
}

TEST(Conv2dWrap, RejectsEvenKernel) {
    const Grid img(4, 8, 1.0f);
    const std::vector<double> k(16, 1.0);
    EXPECT_THROW(conv2d_wrap(img, k, 4), std::invalid_argument);
}

TEST(PanoGaborConv, RequiresChannelsEqualHeight) {
    const Tensor x(4, 8, 16, 1.0f);
    const auto banks = latitude_bank_stack(8);
    EXPECT_THROW(pano_gabor_conv(x, banks), std::invalid_argument);
}

TEST(PanoGaborConv, ConstantInput) {
    const Tensor x(8, 8, 16, 3.0f);
    const auto banks = latitude_bank_stack(8);
    const Tensor out = pano_gabor_conv(x, banks, Aggregate::Mean);
    for (int c = 0; c < 8; ++c) {
        double mean_sum = 0.0;
        for (const auto& k : banks[c].kernels) {
            double s = 0.0;
            for (double v : k) s += v;
            mean_sum += s;
        }
        mean_sum /= 8.0;
        for (int y = 0; y < 8; ++y) {
            for (int x2 = 0; x2 < 16; ++x2) {
                EXPECT_NEAR(out.at(c, y, x2), 3.0 * mean_sum, 1e-5);
            }
        }
    }
}

TEST(PanoGaborConv, IdentityBankIsIdentity) {
    const Tensor x = tu::random_tensor(6, 6, 12, 35);
    const std::vector<FilterBank> banks(6, identity_bank());
    const Tensor out = pano_gabor_conv(x, banks, Aggregate::Mean);
    for (size_t i = 0; i < x.size(); ++i) {
        EXPECT_NEAR(out.data()[i], x.data()[i], 1e-6);
    }
}

TEST(PanoGaborConv, ShiftEquivarianceBitwise) {
    const Tensor x = tu::random_tensor(16, 16, 32, 36, -1.0f, 1.0f);
    const auto banks = latitude_bank_stack(16);
    const Tensor base = pano_gabor_conv(x, banks);
    for (int s : {1, 7, 13}) {
        const Tensor shifted = pano_gabor_conv(tu::shift_cols(x, s), banks);
        const Tensor expect = tu::shift_cols(base, s);
        ASSERT_TRUE(shifted == expect) << "shift " << s;
    }
}

TEST(PanoGaborConv, AggregateRelations) {
    const Tensor x = tu::random_tensor(8, 8, 16, 37, -1.0f, 1.0f);
    const auto banks = latitude_bank_stack(8);
    const Tensor mean = pano_gabor_conv(x, banks, Aggregate::Mean);
    const Tensor sum = pano_gabor_conv(x, banks, Aggregate::Sum);
    const Tensor mx = pano_gabor_conv(x, banks, Aggregate::Max);
    for (size_t i = 0; i < x.size(); ++i) {
        EXPECT_NEAR(sum.data()[i], 8.0 * mean.data()[i],
                    1e-5 * std::max(1.0f, std::fabs(sum.data()[i])));
        EXPECT_GE(mx.data()[i] + 1e-6, mean.data()[i]);
    }
}

TEST(LatitudeAdaptiveConv, MatchesDiagonalOfDepthwiseBitwise) {
    const Grid img = tu::random_grid(8, 16, 38, -2.0f, 2.0f);
    const auto banks = latitude_bank_stack(8);
    const Grid plane = latitude_adaptive_conv(img, banks);
    Tensor replicated(8, 8, 16);
    for (int c = 0; c < 8; ++c) {
        std::copy(img.data(), img.data() + img.size(), replicated.channel(c).begin());
    }
    const Tensor depthwise = pano_gabor_conv(replicated, banks);
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 16; ++c) {
            ASSERT_EQ(plane.at(r, c), depthwise.at(r, r, c));
        }
    }
}

TEST(Conv1x1, KnownMatrix) {
    Tensor x(2, 2, 2);
    x.at(0, 0, 0) = 1;
    x.at(0, 0, 1) = 2;
    x.at(0, 1, 0) = 3;
    x.at(0, 1, 1) = 4;
    x.at(1, 0, 0) = 5;
    x.at(1, 0, 1) = 6;
    x.at(1, 1, 0) = 7;
    x.at(1, 1, 1) = 8;
    Conv1x1 w;
    w.out_channels = 1;
    w.in_channels = 2;
    w.weight = {1.0f, 1.0f};
    w.bias = {0.5f};
    const Tensor out = conv1x1(x, w);
    EXPECT_FLOAT_EQ(out.at(0, 0, 0), 6.5f);
    EXPECT_FLOAT_EQ(out.at(0, 1, 1), 12.5f);
}

TEST(Conv1x1, IdentityAndBias) {
    const Tensor x = tu::random_tensor(3, 4, 8, 39);
    Conv1x1 id;
    id.out_channels = 3;
    id.in_channels = 3;
    id.weight.assign(9, 0.0f);
    for (int i = 0; i < 3; ++i) id.weight[i * 3 + i] = 1.0f;
    id.bias.assign(3, 0.0f);
    const Tensor same = conv1x1(x, id);
    for (size_t i = 0; i < x.size(); ++i) EXPECT_EQ(same.data()[i], x.data()[i]);

    Conv1x1 zero;
    zero.out_channels = 2;
    zero.in_channels = 3;
    zero.weight.assign(6, 0.0f);
    zero.bias = {1.5f, -2.5f};
    const Tensor planes = conv1x1(x, zero);
    for (int y = 0; y < 4; ++y) {
        for (int c = 0; c < 8; ++c) {
            EXPECT_FLOAT_EQ(planes.at(0, y, c), 1.5f);
            EXPECT_FLOAT_EQ(planes.at(1, y, c), -2.5f);
        }
    }
}

TEST(Conv1x1, RejectsMismatch) {
    const Tensor x(3, 4, 8, 1.0f);
    Conv1x1 w;
    w.out_channels = 2;
    w.in_channels = 4;
    w.weight.assign(8, 0.0f);
    w.bias.assign(2, 0.0f);
    EXPECT_THROW(conv1x1(x, w), std::invalid_argument);
}

TEST(SeLayer, ReducedChannels) {
    EXPECT_EQ(se_reduced_channels(16), 1);
    EXPECT_EQ(se_reduced_channels(32), 2);
    EXPECT_EQ(se_reduced_channels(256), 16);
    EXPECT_EQ(se_reduced_channels(8), 1);
    EXPECT_EQ(se_reduced_channels(1), 1);
}

namespace {
SeWeights zero_se(int channels) {
    SeWeights w;
    w.channels = channels;
    w.reduced = se_reduced_channels(channels);
    w.reduce_weight.assign(static_cast<size_t>(w.reduced) * channels, 0.0f);
    w.reduce_bias.assign(w.reduced, 0.0f);
    w.expand_weight.assign(static_cast<size_t>(channels) * w.reduced, 0.0f);
    w.expand_bias.assign(channels, 0.0f);
    return w;
}
}  // namespace

TEST(SeLayer, ZeroWeightsHalveInput) {
    const Tensor x = tu::random_tensor(4, 4, 8, 40, -3.0f, 3.0f);
    const Tensor out = se_layer(x, zero_se(4));
    for (size_t i = 0; i < x.size(); ++i) {
        EXPECT_EQ(out.data()[i], 0.5f * x.data()[i]);
    }
}

TEST(SeLayer, SaturatedGateIsNearIdentity) {
    const Tensor x = tu::random_tensor(4, 4, 8, 41, -3.0f, 3.0f);
    SeWeights w = zero_se(4);
    w.expand_bias.assign(4, 20.0f);
    const Tensor out = se_layer(x, w);
    for (size_t i = 0; i < x.size(); ++i) {
        EXPECT_NEAR(out.data()[i], x.data()[i], 1e-6);
    }
}

TEST(SeLayer, ScalesSpatialPermutationInvariant) {
    Tensor x = tu::random_tensor(2, 4, 8, 42);
    SeWeights w;
    w.channels = 2;
    w.reduced = 1;
    w.reduce_weight = {0.3f, -0.8f};
    w.reduce_bias = {0.1f};
    w.expand_weight = {1.2f, -0.4f};
    w.expand_bias = {0.0f, 0.2f};
    const auto s0 = se_scales(x, w);
    // reverse the rows of each channel; gap is unchanged
    Tensor perm(2, 4, 8);
    for (int c = 0; c < 2; ++c) {
        for (int y = 0; y < 4; ++y) {
            for (int i = 0; i < 8; ++i) perm.at(c, 3 - y, i) = x.at(c, y, i);
        }
    }
    const auto s1 = se_scales(perm, w);
    ASSERT_EQ(s0.size(), 2u);
    EXPECT_NEAR(s0[0], s1[0], 1e-12);
    EXPECT_NEAR(s0[1], s1[1], 1e-12);
}

TEST(SeLayer, HandComputedScales) {
    Tensor x(2, 1, 2);
    x.at(0, 0, 0) = 1.0f;
    x.at(0, 0, 1) = 3.0f;  // gap = 2
    x.at(1, 0, 0) = -1.0f;
    x.at(1, 0, 1) = -3.0f;  // gap = -2
    SeWeights w;
    w.channels = 2;
    w.reduced = 1;
    w.reduce_weight = {0.5f, 0.25f};
    w.reduce_bias = {0.125f};
    w.expand_weight = {2.0f, -1.0f};
    w.expand_bias = {0.0f, 0.25f};
    // reduce: 0.5*2 + 0.25*(-2) + 0.125 = 0.625; relu keeps it
    // expand: {1.25, -0.375}; sigmoid (all constants are exact in binary)
    const auto s = se_scales(x, w);
    EXPECT_NEAR(s[0], 1.0 / (1.0 + std::exp(-1.25)), 1e-12);
    EXPECT_NEAR(s[1], 1.0 / (1.0 + std::exp(0.375)), 1e-12);
}

TEST(SeLayer, ShiftEquivarianceBitwise) {
    const Tensor x = tu::random_tensor(4, 4, 8, 43);
    SeWeights w = zero_se(4);
    w.reduce_weight.assign(w.reduce_weight.size(), 0.2f);
    w.expand_weight.assign(w.expand_weight.size(), -0.4f);
    for (int s : {1, 3}) {
        const Tensor a = se_layer(tu::shift_cols(x, s), w);
        const Tensor b = tu::shift_cols(se_layer(x, w), s);
        ASSERT_TRUE(a == b);
    }
}
