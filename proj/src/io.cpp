// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#include "pgf/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace pgf {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) {
        throw std::runtime_error("cannot open " + path);
    }
    return f;
}

[[noreturn]] void truncated(const std::string& path, long at, const char* what) {
    throw std::runtime_error("unexpected end of file at byte " + std::to_string(at) +
                             " while reading " + what + " in " + path);
}

void write_u32(std::FILE* f, uint32_t v, const std::string& path) {
    if (std::fwrite(&v, 4, 1, f) != 1) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void write_tensor(const std::string& path, const TensorData& t) {
    if (t.dims.empty() || t.dims.size() > 8) {
        throw std::invalid_argument("write_tensor: rank must be between 1 and 8");
    }
    for (uint32_t d : t.dims) {
        if (d == 0) throw std::invalid_argument("write_tensor: zero dimension");
    }
    if (t.data.size() != t.elements()) {
        throw std::invalid_argument("write_tensor: payload size does not match dims");
    }
    FilePtr f = open_file(path, "wb");
    if (std::fwrite("PGTN", 1, 4, f.get()) != 4) {
        throw std::runtime_error("write failed: " + path);
    }
    write_u32(f.get(), 1, path);
    write_u32(f.get(), static_cast<uint32_t>(t.dims.size()), path);
    for (uint32_t d : t.dims) write_u32(f.get(), d, path);
    if (!t.data.empty() &&
        std::fwrite(t.data.data(), 4, t.data.size(), f.get()) != t.data.size()) {
        throw std::runtime_error("write failed: " + path);
    }
}

TensorData read_tensor(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    char magic[4];
    if (std::fread(magic, 1, 4, f.get()) != 4) truncated(path, 0, "magic");
    if (std::memcmp(magic, "PGTN", 4) != 0) {
        throw std::runtime_error("bad magic at byte 0 in " + path + ": expected PGTN");
    }
    uint32_t version = 0, rank = 0;
    if (std::fread(&version, 4, 1, f.get()) != 1) truncated(path, 4, "version");
    if (version != 1) {
        throw std::runtime_error("unsupported PGTN version " + std::to_string(version) +
                                 " in " + path);
    }
    if (std::fread(&rank, 4, 1, f.get()) != 1) truncated(path, 8, "rank");
    if (rank == 0 || rank > 8) {
        throw std::runtime_error("bad rank " + std::to_string(rank) + " at byte 8 in " + path);
    }
    TensorData t;
    t.dims.resize(rank);
    size_t count = 1;
    for (uint32_t i = 0; i < rank; ++i) {
        if (std::fread(&t.dims[i], 4, 1, f.get()) != 1) {
            truncated(path, 12 + 4 * static_cast<long>(i), "dims");
        }
        if (t.dims[i] == 0 || count > (1u << 28) / t.dims[i]) {
            throw std::runtime_error("bad dimension at byte " +
                                     std::to_string(12 + 4 * static_cast<long>(i)) + " in " +
                                     path);
        }
        count *= t.dims[i];
    }
    t.data.resize(count);
    const long payload_at = 12 + 4 * static_cast<long>(rank);
    if (std::fread(t.data.data(), 4, count, f.get()) != count) {
        truncated(path, payload_at, "payload");
    }
    char extra;
    if (std::fread(&extra, 1, 1, f.get()) == 1) {
        throw std::runtime_error("trailing data at byte " +
                                 std::to_string(payload_at + 4 * static_cast<long>(count)) +
                                 " in " + path);
    }
    return t;
}

TensorData to_tensor_data(const Tensor& t) {
    TensorData d;
    d.dims = {static_cast<uint32_t>(t.channels()), static_cast<uint32_t>(t.height()),
              static_cast<uint32_t>(t.width())};
    d.data.assign(t.data(), t.data() + t.size());
    return d;
}

TensorData to_tensor_data(const Grid& g) {
    TensorData d;
    d.dims = {static_cast<uint32_t>(g.height()), static_cast<uint32_t>(g.width())};
    d.data.assign(g.data(), g.data() + g.size());
    return d;
}

Tensor tensor_from_data(const TensorData& t) {
    if (t.dims.size() == 2) {
        Tensor out(1, static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]));
        std::copy(t.data.begin(), t.data.end(), out.data());
        return out;
    }
    if (t.dims.size() != 3) {
        throw std::invalid_argument("tensor_from_data: need rank 3 (or rank 2) data");
    }
    Tensor out(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]),
               static_cast<int>(t.dims[2]));
    std::copy(t.data.begin(), t.data.end(), out.data());
    return out;
}

Grid grid_from_data(const TensorData& t) {
    if (t.dims.size() == 3 && t.dims[0] == 1) {
        Grid out(static_cast<int>(t.dims[1]), static_cast<int>(t.dims[2]));
        std::copy(t.data.begin(), t.data.end(), out.data());
        return out;
    }
    if (t.dims.size() != 2) {
        throw std::invalid_argument("grid_from_data: need rank 2 (or single-channel) data");
    }
    Grid out(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]));
    std::copy(t.data.begin(), t.data.end(), out.data());
    return out;
}

void write_pfm(const std::string& path, const Grid& depth) {
    FilePtr f = open_file(path, "wb");
    if (std::fprintf(f.get(), "Pf\n%d %d\n-1.0\n", depth.width(), depth.height()) < 0) {
        throw std::runtime_error("write failed: " + path);
    }
    // PFM stores rows bottom-up
    for (int r = depth.height() - 1; r >= 0; --r) {
        const float* row = depth.data() + static_cast<size_t>(r) * depth.width();
        if (std::fwrite(row, 4, depth.width(), f.get()) !=
            static_cast<size_t>(depth.width())) {
            throw std::runtime_error("write failed: " + path);
        }
    }
}

Grid read_pfm(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    char type[3] = {0, 0, 0};
    int width = 0, height = 0;
    float scale = 0.0f;
    if (std::fscanf(f.get(), "%2s", type) != 1) truncated(path, 0, "PFM type");
    if (std::strcmp(type, "PF") == 0) {
        throw std::runtime_error("color PFM not supported in " + path + " (expected Pf)");
    }
    if (std::strcmp(type, "Pf") != 0) {
        throw std::runtime_error("bad PFM type at byte 0 in " + path + ": expected Pf");
    }
    if (std::fscanf(f.get(), "%d %d %f", &width, &height, &scale) != 3) {
        throw std::runtime_error("malformed PFM header at byte " +
                                 std::to_string(std::ftell(f.get())) + " in " + path);
    }
    if (width <= 0 || height <= 0 || scale == 0.0f) {
        throw std::runtime_error("bad PFM dimensions or scale in " + path);
    }
    int sep = std::fgetc(f.get());
    if (sep != '\n' && sep != ' ' && sep != '\r' && sep != '\t') {
        throw std::runtime_error("malformed PFM header separator at byte " +
                                 std::to_string(std::ftell(f.get())) + " in " + path);
    }

    Grid out(height, width);
    for (int r = height - 1; r >= 0; --r) {
        float* row = out.data() + static_cast<size_t>(r) * width;
        if (std::fread(row, 4, width, f.get()) != static_cast<size_t>(width)) {
            truncated(path, std::ftell(f.get()), "pixel rows");
        }
    }
    if (scale > 0.0f) {  // big-endian payload
        for (size_t i = 0; i < out.size(); ++i) {
            uint32_t bits;
            std::memcpy(&bits, out.data() + i, 4);
            bits = __builtin_bswap32(bits);
            std::memcpy(out.data() + i, &bits, 4);
        }
    }
    return out;
}

namespace {

class PngWriter {
public:
    PngWriter(const std::string& path, int height)
        : path_(path), file_(open_file(path, "wb")), rows_(static_cast<size_t>(height)) {
        png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png_) info_ = png_create_info_struct(png_);
        if (!png_ || !info_) {
            png_destroy_write_struct(&png_, &info_);
            throw std::runtime_error("cannot initialize PNG writer for " + path);
        }
    }
    ~PngWriter() { png_destroy_write_struct(&png_, &info_); }

    void write(int width, int height, int bit_depth, int color_type,
               const std::vector<png_bytep>& rows) {
        if (setjmp(png_jmpbuf(png_))) {
            throw std::runtime_error("PNG write failed for " + path_);
        }
        png_init_io(png_, file_.get());
        png_set_compression_level(png_, 6);
        png_set_filter(png_, 0, PNG_FILTER_NONE);
        png_set_IHDR(png_, info_, static_cast<png_uint_32>(width),
                     static_cast<png_uint_32>(height), bit_depth, color_type,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png_, info_);
        if (bit_depth == 16) png_set_swap(png_);  // buffers are host little-endian
        png_write_image(png_, const_cast<png_bytepp>(rows.data()));
        png_write_end(png_, nullptr);
    }

private:
    std::string path_;
    FilePtr file_;
    std::vector<png_bytep> rows_;
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

class PngReader {
public:
    explicit PngReader(const std::string& path) : path_(path), file_(open_file(path, "rb")) {
        uint8_t sig[8];
        if (std::fread(sig, 1, 8, file_.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
            throw std::runtime_error("not a PNG file: " + path);
        }
        png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png_) info_ = png_create_info_struct(png_);
        if (!png_ || !info_) {
            png_destroy_read_struct(&png_, &info_, nullptr);
            throw std::runtime_error("cannot initialize PNG reader for " + path);
        }
    }
    ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }

    const std::string& path() const { return path_; }
    png_structp png() { return png_; }
    png_infop info() { return info_; }

    void begin() {
        guarded([this] {
            png_init_io(png_, file_.get());
            png_set_sig_bytes(png_, 8);
            png_read_info(png_, info_);
        });
    }

    void read_rows(const std::vector<png_bytep>& rows) {
        guarded([&] {
            png_read_image(png_, const_cast<png_bytepp>(rows.data()));
            png_read_end(png_, nullptr);
        });
    }

    template <typename F>
    void guarded(F&& f) {
        if (setjmp(png_jmpbuf(png_))) {
            throw std::runtime_error("PNG read failed for " + path_);
        }
        f();
    }

private:
    std::string path_;
    FilePtr file_;
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

}  // namespace

void write_png(const std::string& path, const ImageU8& img) {
    if (img.height <= 0 || img.width <= 0 || (img.channels != 1 && img.channels != 3)) {
        throw std::invalid_argument("write_png: bad image dimensions");
    }
    PngWriter writer(path, img.height);
    std::vector<png_bytep> rows(static_cast<size_t>(img.height));
    const size_t stride = static_cast<size_t>(img.width) * img.channels;
    for (int r = 0; r < img.height; ++r) {
        rows[static_cast<size_t>(r)] =
            const_cast<png_bytep>(img.data.data() + static_cast<size_t>(r) * stride);
    }
    writer.write(img.width, img.height, 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, rows);
}

void write_png16(const std::string& path, const ImageU16& img) {
    if (img.height <= 0 || img.width <= 0) {
        throw std::invalid_argument("write_png16: bad image dimensions");
    }
    PngWriter writer(path, img.height);
    std::vector<png_bytep> rows(static_cast<size_t>(img.height));
    for (int r = 0; r < img.height; ++r) {
        rows[static_cast<size_t>(r)] = const_cast<png_bytep>(reinterpret_cast<const png_byte*>(
            img.data.data() + static_cast<size_t>(r) * img.width));
    }
    writer.write(img.width, img.height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

ImageU8 read_png(const std::string& path) {
    PngReader reader(path);
    reader.begin();
    png_structp png = reader.png();
    png_infop info = reader.info();

    const png_byte color_type = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);
    reader.guarded([&] {
        if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
            png_set_expand_gray_1_2_4_to_8(png);
        }
        if (bit_depth == 16) png_set_strip_16(png);
        if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
        png_read_update_info(png, info);
    });

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const int channels = static_cast<int>(png_get_channels(png, info));
    if (channels != 1 && channels != 3) {
        throw std::runtime_error("unsupported PNG channel count in " + path);
    }

    ImageU8 img(height, width, channels);
    std::vector<png_bytep> rows(static_cast<size_t>(height));
    const size_t stride = static_cast<size_t>(width) * channels;
    for (int r = 0; r < height; ++r) {
        rows[static_cast<size_t>(r)] = img.data.data() + static_cast<size_t>(r) * stride;
    }
    reader.read_rows(rows);
    return img;
}

ImageU16 read_png16(const std::string& path) {
    PngReader reader(path);
    reader.begin();
    png_structp png = reader.png();
    png_infop info = reader.info();

    if (png_get_bit_depth(png, info) != 16 ||
        png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY) {
        throw std::runtime_error("expected 16-bit grayscale PNG in " + path);
    }
    reader.guarded([&] {
        png_set_swap(png);
        png_read_update_info(png, info);
    });

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    ImageU16 img(height, width);
    std::vector<png_bytep> rows(static_cast<size_t>(height));
    for (int r = 0; r < height; ++r) {
        rows[static_cast<size_t>(r)] = reinterpret_cast<png_bytep>(
            img.data.data() + static_cast<size_t>(r) * width);
    }
    reader.read_rows(rows);
    return img;
}

ImageU16 depth_to_millimeters(const Grid& depth) {
    ImageU16 img(depth.height(), depth.width());
    for (size_t i = 0; i < depth.size(); ++i) {
        const double mm = std::lround(static_cast<double>(depth.data()[i]) * 1000.0);
        img.data[i] = static_cast<uint16_t>(std::clamp(mm, 0.0, 65535.0));
    }
    return img;
}

Grid millimeters_to_depth(const ImageU16& img) {
    Grid out(img.height, img.width);
    for (size_t i = 0; i < img.data.size(); ++i) {
        out.data()[i] = static_cast<float>(img.data[i]) / 1000.0f;
    }
    return out;
}

}  // namespace pgf
