#include "patchfill/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

namespace pf {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

[[noreturn]] void fail(const std::string& what, const std::string& path) {
    throw InputError(what + ": " + path);
}

}  // namespace

PngData read_png(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) fail("cannot open PNG", path);

    png_byte header[8];
    if (std::fread(header, 1, 8, f.get()) != 8 || png_sig_cmp(header, 0, 8))
        fail("not a PNG file", path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw InternalError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw InternalError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("corrupt PNG", path);
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    png_set_tRNS_to_alpha(png);
    // PNG stores 16-bit samples big-endian; swap to host order where needed
    if (png_get_bit_depth(png, info) == 16 && std::endian::native == std::endian::little)
        png_set_swap(png);
    png_read_update_info(png, info);

    PngData out;
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = png_get_channels(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    if (out.width <= 0 || out.height <= 0) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("empty PNG", path);
    }

    const size_t row_bytes = png_get_rowbytes(png, info);
    std::vector<png_byte> raw(row_bytes * static_cast<size_t>(out.height));
    std::vector<png_bytep> rows(static_cast<size_t>(out.height));
    for (int y = 0; y < out.height; ++y) rows[static_cast<size_t>(y)] = &raw[row_bytes * y];
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const size_t n = static_cast<size_t>(out.width) * out.height * out.channels;
    out.samples.resize(n);
    if (out.bit_depth == 16) {
        std::memcpy(out.samples.data(), raw.data(), n * 2);
    } else {
        for (size_t i = 0; i < n; ++i) out.samples[i] = raw[i];
    }
    return out;
}

PlaneImage png_to_rgb(const PngData& png) {
    PlaneImage img(png.width, png.height, 3);
    const float inv = 1.f / png.max_value();
    const size_t n = img.pixel_count();
    for (size_t i = 0; i < n; ++i) {
        const uint16_t* p = &png.samples[i * png.channels];
        if (png.channels >= 3) {
            img.data[i * 3 + 0] = p[0] * inv;
            img.data[i * 3 + 1] = p[1] * inv;
            img.data[i * 3 + 2] = p[2] * inv;
        } else {
            const float v = p[0] * inv;
            img.data[i * 3 + 0] = v;
            img.data[i * 3 + 1] = v;
            img.data[i * 3 + 2] = v;
        }
    }
    return img;
}

HoleMask png_to_mask(const PngData& png) {
    HoleMask mask(png.width, png.height);
    const size_t n = static_cast<size_t>(png.width) * png.height;
    // alpha does not make a pixel a hole
    const int cc = png.channels == 2 ? 1 : std::min(png.channels, 3);
    for (size_t i = 0; i < n; ++i) {
        const uint16_t* p = &png.samples[i * png.channels];
        uint8_t v = 0;
        for (int k = 0; k < cc; ++k) v |= p[k] != 0;
        mask.data[i] = v;
    }
    return mask;
}

PlaneImage png_to_labels(const PngData& png) {
    PlaneImage img(png.width, png.height, 1);
    const size_t n = img.pixel_count();
    for (size_t i = 0; i < n; ++i)
        img.data[i] = static_cast<float>(png.samples[i * png.channels]);
    return img;
}

PlaneImage png_to_scaled_gray(const PngData& png) {
    PlaneImage img(png.width, png.height, 1);
    // (sample+1)/(max+1) keeps the result strictly positive for depth use
    const float inv = 1.f / (png.max_value() + 1.f);
    const size_t n = img.pixel_count();
    for (size_t i = 0; i < n; ++i)
        img.data[i] = (png.samples[i * png.channels] + 1.f) * inv;
    return img;
}

PlaneImage read_png_rgb(const std::string& path) { return png_to_rgb(read_png(path)); }
HoleMask read_png_mask(const std::string& path) { return png_to_mask(read_png(path)); }

void write_png(const std::string& path, const PlaneImage& img) {
    PF_CHECK(img.channels == 1 || img.channels == 3, "write_png: 1 or 3 channels only");
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) fail("cannot write PNG", path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw InternalError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw InternalError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail("PNG write failed", path);
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const size_t row_bytes = static_cast<size_t>(img.width) * img.channels;
    std::vector<png_byte> row(row_bytes);
    for (int y = 0; y < img.height; ++y) {
        const float* src = img.row(y);
        for (size_t i = 0; i < row_bytes; ++i) {
            float v = std::clamp(src[i], 0.f, 1.f);
            row[i] = static_cast<png_byte>(std::lround(v * 255.f));
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void write_png_mask(const std::string& path, const HoleMask& mask) {
    PlaneImage img(mask.width, mask.height, 1);
    for (size_t i = 0; i < mask.data.size(); ++i) img.data[i] = mask.data[i] ? 1.f : 0.f;
    write_png(path, img);
}

PlaneImage read_pfm(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) fail("cannot open PFM", path);

    char tag[3] = {0, 0, 0};
    if (std::fscanf(f.get(), "%2s", tag) != 1) fail("bad PFM header", path);
    int channels;
    if (std::strcmp(tag, "PF") == 0)
        channels = 3;
    else if (std::strcmp(tag, "Pf") == 0)
        channels = 1;
    else
        fail("bad PFM magic", path);

    int w = 0, h = 0;
    double scale = 0;
    if (std::fscanf(f.get(), "%d %d %lf", &w, &h, &scale) != 3 || w <= 0 || h <= 0 || scale == 0)
        fail("bad PFM header", path);
    if (std::fgetc(f.get()) == EOF) fail("bad PFM header", path);  // single whitespace byte

    const bool file_le = scale < 0;
    const float mag = static_cast<float>(std::fabs(scale));
    PlaneImage img(w, h, channels);
    const size_t row_n = static_cast<size_t>(w) * channels;
    std::vector<float> row(row_n);
    for (int y = h - 1; y >= 0; --y) {  // bottom-up storage
        if (std::fread(row.data(), 4, row_n, f.get()) != row_n) fail("truncated PFM", path);
        if (file_le != (std::endian::native == std::endian::little))
            for (float& v : row) {
                uint32_t u;
                std::memcpy(&u, &v, 4);
                u = __builtin_bswap32(u);
                std::memcpy(&v, &u, 4);
            }
        float* dst = img.row(y);
        for (size_t i = 0; i < row_n; ++i) dst[i] = row[i] * mag;
    }
    return img;
}

void write_pfm(const std::string& path, const PlaneImage& img) {
    PF_CHECK(img.channels == 1 || img.channels == 3, "write_pfm: 1 or 3 channels only");
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) fail("cannot write PFM", path);
    const bool le = std::endian::native == std::endian::little;
    std::fprintf(f.get(), "%s\n%d %d\n%.1f\n", img.channels == 3 ? "PF" : "Pf", img.width,
                 img.height, le ? -1.0 : 1.0);
    const size_t row_n = static_cast<size_t>(img.width) * img.channels;
    for (int y = img.height - 1; y >= 0; --y)
        if (std::fwrite(img.row(y), 4, row_n, f.get()) != row_n) fail("PFM write failed", path);
}

namespace {
void put_u32le(FILE* f, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    std::fwrite(b, 1, 4, f);
}
uint32_t get_u32le(FILE* f, const std::string& path) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4) fail("truncated NNF", path);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}
}  // namespace

void write_nnf(const std::string& path, int width, int height,
               const std::vector<int32_t>& dx, const std::vector<int32_t>& dy,
               const std::vector<float>& dist) {
    const size_t n = static_cast<size_t>(width) * height;
    PF_ASSERT(dx.size() == n && dy.size() == n && dist.size() == n, "write_nnf size mismatch");
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) fail("cannot write NNF", path);
    put_u32le(f.get(), static_cast<uint32_t>(width));
    put_u32le(f.get(), static_cast<uint32_t>(height));
    for (size_t i = 0; i < n; ++i) {
        put_u32le(f.get(), static_cast<uint32_t>(dx[i]));
        put_u32le(f.get(), static_cast<uint32_t>(dy[i]));
        uint32_t u;
        std::memcpy(&u, &dist[i], 4);
        put_u32le(f.get(), u);
    }
}

void read_nnf(const std::string& path, int* width, int* height, std::vector<int32_t>* dx,
              std::vector<int32_t>* dy, std::vector<float>* dist) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) fail("cannot open NNF", path);
    const uint32_t w = get_u32le(f.get(), path), h = get_u32le(f.get(), path);
    const size_t n = static_cast<size_t>(w) * h;
    *width = static_cast<int>(w);
    *height = static_cast<int>(h);
    dx->resize(n);
    dy->resize(n);
    dist->resize(n);
    for (size_t i = 0; i < n; ++i) {
        (*dx)[i] = static_cast<int32_t>(get_u32le(f.get(), path));
        (*dy)[i] = static_cast<int32_t>(get_u32le(f.get(), path));
        uint32_t u = get_u32le(f.get(), path);
        std::memcpy(&(*dist)[i], &u, 4);
    }
}

}  // namespace pf
