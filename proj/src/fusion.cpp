// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#include "pgf/fusion.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <stdexcept>

#include "pgf/parallel.hpp"

namespace pgf {

namespace {

float uniform_float(std::mt19937_64& rng, float lo, float hi) {
    // mt19937_64 output is portable; the distribution classes are not
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return static_cast<float>(lo + (static_cast<double>(hi) - lo) * u);
}

void fill_matrix(std::vector<float>& m, size_t count, int fan_in, std::mt19937_64& rng,
                 InitScheme scheme) {
    m.resize(count);
    if (scheme == InitScheme::Constant) {
        const float v = 1.0f / static_cast<float>(fan_in);
        for (auto& x : m) x = v;
        return;
    }
    const float bound = static_cast<float>(std::sqrt(6.0 / fan_in));
    for (auto& x : m) x = uniform_float(rng, -bound, bound);
}

void check_chain(const FusionWeights& w) {
    if (w.in_channels < 1 || w.height < 1) {
        throw std::invalid_argument("fusion weights: channel counts must be positive");
    }
    if (w.compress.in_channels != 2 * w.in_channels || w.compress.out_channels != w.height) {
        throw std::invalid_argument("fusion weights: compress conv must map 2*C_in to height");
    }
    if (w.pg_banks.size() != static_cast<size_t>(w.height)) {
        throw std::invalid_argument("fusion weights: need one filter bank per height channel");
    }
    if (w.se.channels != w.height) {
        throw std::invalid_argument("fusion weights: SE layer must span height channels");
    }
    if (w.output.in_channels != w.height || w.output.out_channels < 1) {
        throw std::invalid_argument("fusion weights: output conv must map height to C_out");
    }
    const size_t h = static_cast<size_t>(w.height);
    if (w.compress.weight.size() != h * static_cast<size_t>(w.compress.in_channels) ||
        w.compress.bias.size() != h) {
        throw std::invalid_argument("fusion weights: compress tensors have the wrong size");
    }
    const size_t reduced = static_cast<size_t>(w.se.reduced);
    if (w.se.reduced < 1 || w.se.reduce_weight.size() != reduced * h ||
        w.se.reduce_bias.size() != reduced || w.se.expand_weight.size() != h * reduced ||
        w.se.expand_bias.size() != h) {
        throw std::invalid_argument("fusion weights: SE tensors have the wrong size");
    }
    if (w.output.weight.size() != static_cast<size_t>(w.output.out_channels) * h ||
        w.output.bias.size() != static_cast<size_t>(w.output.out_channels)) {
        throw std::invalid_argument("fusion weights: output tensors have the wrong size");
    }
}

struct Record {
    std::vector<uint32_t> dims;
    std::vector<float> data;
};

void write_u32(std::FILE* f, uint32_t v) {
    if (std::fwrite(&v, 4, 1, f) != 1) throw std::runtime_error("weights write failed");
}

void write_record(std::FILE* f, const std::string& name, const std::vector<uint32_t>& dims,
                  const float* data) {
    write_u32(f, static_cast<uint32_t>(name.size()));
    if (std::fwrite(name.data(), 1, name.size(), f) != name.size()) {
        throw std::runtime_error("weights write failed");
    }
    write_u32(f, static_cast<uint32_t>(dims.size()));
    size_t count = 1;
    for (uint32_t d : dims) {
        write_u32(f, d);
        count *= d;
    }
    if (count > 0 && std::fwrite(data, 4, count, f) != count) {
        throw std::runtime_error("weights write failed");
    }
}

class Reader {
public:
    Reader(std::FILE* f, std::string path) : f_(f), path_(std::move(path)) {}

    long offset() const { return std::ftell(f_); }

    bool read_u32(uint32_t& v, const char* what, const std::string& name) {
        const size_t got = std::fread(&v, 1, 4, f_);
        if (got == 0 && std::feof(f_)) return false;
        if (got != 4) fail(what, name);
        return true;
    }

    void read_bytes(void* dst, size_t n, const char* what, const std::string& name) {
        if (std::fread(dst, 1, n, f_) != n) fail(what, name);
    }

    [[noreturn]] void fail(const char* what, const std::string& name) {
        throw std::runtime_error("unexpected end of file at byte " + std::to_string(offset()) +
                                 " while reading " + what +
                                 (name.empty() ? "" : " of '" + name + "'") + " in " + path_);
    }

private:
    std::FILE* f_;
    std::string path_;
};

const Record& require(const std::map<std::string, Record>& records, const std::string& name,
                      size_t rank) {
    auto it = records.find(name);
    if (it == records.end()) {
        throw std::runtime_error("weights file is missing tensor record '" + name + "'");
    }
    if (it->second.dims.size() != rank) {
        throw std::runtime_error("tensor record '" + name + "' has wrong rank");
    }
    return it->second;
}

}  // namespace

InitScheme init_scheme_from_string(std::string_view name) {
    if (name == "kaiming") return InitScheme::KaimingUniform;
    if (name == "constant") return InitScheme::Constant;
    throw std::invalid_argument("unknown init scheme: " + std::string(name));
}

FusionWeights init_weights(int in_channels, int height, int out_channels,
                           const FusionConfig& cfg, uint64_t seed, InitScheme scheme) {
    if (in_channels < 1 || height < 1 || out_channels < 1) {
        throw std::invalid_argument("init_weights: channel counts must be positive");
    }
    std::mt19937_64 rng(seed);

    FusionWeights w;
    w.in_channels = in_channels;
    w.height = height;
    w.epsilon = cfg.epsilon;
    w.mode = cfg.mode;

    w.compress.in_channels = 2 * in_channels;
    w.compress.out_channels = height;
    fill_matrix(w.compress.weight, static_cast<size_t>(height) * 2 * in_channels,
                2 * in_channels, rng, scheme);
    w.compress.bias.assign(static_cast<size_t>(height), 0.0f);

    w.pg_banks = latitude_bank_stack(height, cfg.epsilon, cfg.mode);

    w.se.channels = height;
    w.se.reduced = se_reduced_channels(height);
    fill_matrix(w.se.reduce_weight, static_cast<size_t>(w.se.reduced) * height, height, rng,
                scheme);
    w.se.reduce_bias.assign(static_cast<size_t>(w.se.reduced), 0.0f);
    fill_matrix(w.se.expand_weight, static_cast<size_t>(height) * w.se.reduced, w.se.reduced,
                rng, scheme);
    w.se.expand_bias.assign(static_cast<size_t>(height), 0.0f);

    w.output.in_channels = height;
    w.output.out_channels = out_channels;
    fill_matrix(w.output.weight, static_cast<size_t>(out_channels) * height, height, rng,
                scheme);
    w.output.bias.assign(static_cast<size_t>(out_channels), 0.0f);

    check_chain(w);
    return w;
}

Tensor cs_ufm_forward(const Tensor& a, const Tensor& b, const FusionWeights& w,
                      const FusionConfig& cfg) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("cs_ufm_forward: input shapes differ");
    }
    check_chain(w);
    if (a.channels() != w.in_channels) {
        throw std::invalid_argument("cs_ufm_forward: input channels do not match weights");
    }
    if (a.height() != w.height) {
        throw std::invalid_argument("cs_ufm_forward: input height does not match weights");
    }
    if (cfg.out_channels > 0 && cfg.out_channels != w.output.out_channels) {
        throw std::invalid_argument("cs_ufm_forward: configured C_out does not match weights");
    }

    const Tensor x = concat_channels(a, b);
    const Tensor r = conv1x1(x, w.compress);
    const Tensor e = pano_gabor_conv(r, w.pg_banks, cfg.aggregate);

    const int H = r.height();
    const int W = r.width();
    const int C = r.channels();
    const size_t plane = static_cast<size_t>(H) * W;

    // spatial gate: per-pixel mean across the compressed channels
    std::vector<double> gate(plane);
    parallel_for(H, [&](int64_t rb, int64_t re) {
        for (int64_t row = rb; row < re; ++row) {
            for (int col = 0; col < W; ++col) {
                const size_t p = static_cast<size_t>(row) * W + col;
                double acc = 0.0;
                for (int c = 0; c < C; ++c) acc += r.data()[static_cast<size_t>(c) * plane + p];
                gate[p] = acc / static_cast<double>(C);
            }
        }
    });

    Tensor gated(C, H, W);
    parallel_for(C, [&](int64_t cb, int64_t ce) {
        for (int64_t c = cb; c < ce; ++c) {
            const float* src = e.channel(static_cast<int>(c)).data();
            float* dst = gated.channel(static_cast<int>(c)).data();
            for (size_t p = 0; p < plane; ++p) {
                dst[p] = static_cast<float>(src[p] * gate[p]);
            }
        }
    });

    const Tensor s = se_layer(gated, w.se);
    return conv1x1(s, w.output);
}

void save_weights(const FusionWeights& w, const std::string& path) {
    check_chain(w);
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    try {
        if (std::fwrite("PGFW", 1, 4, f) != 4) throw std::runtime_error("weights write failed");
        write_u32(f, 1);  // version

        const uint32_t H = static_cast<uint32_t>(w.height);
        const uint32_t C2 = static_cast<uint32_t>(w.compress.in_channels);
        const uint32_t R = static_cast<uint32_t>(w.se.reduced);
        const uint32_t K = static_cast<uint32_t>(w.output.out_channels);
        write_record(f, "compress.weight", {H, C2}, w.compress.weight.data());
        write_record(f, "compress.bias", {H}, w.compress.bias.data());
        write_record(f, "se.reduce.weight", {R, H}, w.se.reduce_weight.data());
        write_record(f, "se.reduce.bias", {R}, w.se.reduce_bias.data());
        write_record(f, "se.expand.weight", {H, R}, w.se.expand_weight.data());
        write_record(f, "se.expand.bias", {H}, w.se.expand_bias.data());
        write_record(f, "output.weight", {K, H}, w.output.weight.data());
        write_record(f, "output.bias", {K}, w.output.bias.data());
        const float params[3] = {static_cast<float>(w.height), w.epsilon,
                                 static_cast<float>(static_cast<int>(w.mode))};
        write_record(f, "pg.params", {3}, params);
    } catch (...) {
        std::fclose(f);
        throw;
    }
    if (std::fclose(f) != 0) throw std::runtime_error("cannot finish writing " + path);
}

FusionWeights load_weights(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open " + path);

    std::map<std::string, Record> records;
    try {
        Reader in(f, path);
        char magic[4];
        in.read_bytes(magic, 4, "magic", "");
        if (std::string_view(magic, 4) != "PGFW") {
            throw std::runtime_error("bad magic at byte 0 in " + path + ": expected PGFW");
        }
        uint32_t version = 0;
        if (!in.read_u32(version, "version", "")) in.fail("version", "");
        if (version != 1) {
            throw std::runtime_error("unsupported PGFW version " + std::to_string(version) +
                                     " in " + path);
        }

        uint32_t name_len = 0;
        while (in.read_u32(name_len, "record header", "")) {
            if (name_len == 0 || name_len > 4096) {
                throw std::runtime_error("implausible record name length at byte " +
                                         std::to_string(in.offset() - 4) + " in " + path);
            }
            std::string name(name_len, '\0');
            in.read_bytes(name.data(), name_len, "name", "");
            uint32_t rank = 0;
            if (!in.read_u32(rank, "rank", name)) in.fail("rank", name);
            if (rank > 8) {
                throw std::runtime_error("implausible rank for '" + name + "' in " + path);
            }
            Record rec;
            rec.dims.resize(rank);
            size_t count = 1;
            for (uint32_t& d : rec.dims) {
                if (!in.read_u32(d, "dims", name)) in.fail("dims", name);
                count *= d;
            }
            if (count > (1u << 28)) {
                throw std::runtime_error("implausible payload size for '" + name + "' in " + path);
            }
            rec.data.resize(count);
            in.read_bytes(rec.data.data(), count * 4, "payload", name);
            records[name] = std::move(rec);
        }
    } catch (...) {
        std::fclose(f);
        throw;
    }
    std::fclose(f);

    const Record& params = require(records, "pg.params", 1);
    if (params.dims[0] != 3) {
        throw std::runtime_error("tensor record 'pg.params' must hold 3 values");
    }
    const int height = static_cast<int>(params.data[0]);
    const float epsilon = params.data[1];
    const int mode_raw = static_cast<int>(params.data[2]);
    if (height < 1 || static_cast<float>(height) != params.data[0]) {
        throw std::runtime_error("pg.params holds an invalid height");
    }
    if (mode_raw < 0 || mode_raw > 2 || static_cast<float>(mode_raw) != params.data[2]) {
        throw std::runtime_error("pg.params holds an invalid distortion mode");
    }

    const Record& cw = require(records, "compress.weight", 2);
    const Record& cb = require(records, "compress.bias", 1);
    const Record& rw = require(records, "se.reduce.weight", 2);
    const Record& rb = require(records, "se.reduce.bias", 1);
    const Record& ew = require(records, "se.expand.weight", 2);
    const Record& eb = require(records, "se.expand.bias", 1);
    const Record& ow = require(records, "output.weight", 2);
    const Record& ob = require(records, "output.bias", 1);

    if (cw.dims[1] % 2 != 0) {
        throw std::runtime_error("compress.weight input width must be even (concat of two)");
    }

    FusionWeights w;
    w.height = height;
    w.in_channels = static_cast<int>(cw.dims[1] / 2);
    w.epsilon = epsilon;
    w.mode = static_cast<DistortionMode>(mode_raw);

    w.compress.out_channels = static_cast<int>(cw.dims[0]);
    w.compress.in_channels = static_cast<int>(cw.dims[1]);
    w.compress.weight = cw.data;
    w.compress.bias = cb.data;

    w.se.channels = static_cast<int>(rw.dims[1]);
    w.se.reduced = static_cast<int>(rw.dims[0]);
    w.se.reduce_weight = rw.data;
    w.se.reduce_bias = rb.data;
    w.se.expand_weight = ew.data;
    w.se.expand_bias = eb.data;

    w.output.out_channels = static_cast<int>(ow.dims[0]);
    w.output.in_channels = static_cast<int>(ow.dims[1]);
    w.output.weight = ow.data;
    w.output.bias = ob.data;

    if (cb.dims[0] != cw.dims[0] || rb.dims[0] != rw.dims[0] || eb.dims[0] != ew.dims[0] ||
        ob.dims[0] != ow.dims[0] || ew.dims[0] != rw.dims[1] || ew.dims[1] != rw.dims[0]) {
        throw std::runtime_error("weight records have inconsistent shapes in " + path);
    }

    w.pg_banks = latitude_bank_stack(height, epsilon, static_cast<DistortionMode>(mode_raw));
    check_chain(w);
    return w;
}

}  // namespace pgf
