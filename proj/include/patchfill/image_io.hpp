#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "patchfill/image.hpp"

namespace pf {

// Raw PNG samples before interpretation. Palette images are expanded to RGB,
// low-bit gray to 8 bits; 16-bit files keep their depth.
struct PngData {
    int width = 0;
    int height = 0;
    int channels = 0;  // 1 gray, 2 gray+alpha, 3 rgb, 4 rgba
    int bit_depth = 0; // 8 or 16
    std::vector<uint16_t> samples;  // interleaved, row-major

    uint16_t max_value() const { return bit_depth == 16 ? 65535 : 255; }
};

PngData read_png(const std::string& path);

// 3-channel float image in [0,1]; gray is replicated, alpha dropped.
PlaneImage png_to_rgb(const PngData& png);
// Pixel is hole iff any channel sample is nonzero.
HoleMask png_to_mask(const PngData& png);
// First channel as raw integer sample values (segmentation ids).
PlaneImage png_to_labels(const PngData& png);
// First channel scaled to (0,1] by the format maximum (depth maps).
PlaneImage png_to_scaled_gray(const PngData& png);

PlaneImage read_png_rgb(const std::string& path);
HoleMask read_png_mask(const std::string& path);

// values in [0,1] are quantized with round(v*255) after clamping
void write_png(const std::string& path, const PlaneImage& img);
void write_png_mask(const std::string& path, const HoleMask& mask);

// PFM, grayscale ("Pf") or color ("PF"). Rows are stored bottom-up; the scale
// sign encodes endianness. Absolute scale is folded into the samples on read.
PlaneImage read_pfm(const std::string& path);
void write_pfm(const std::string& path, const PlaneImage& img);

// Nearest-neighbor field dump: u32 width, u32 height, then row-major
// (i32 dx, i32 dy, f32 dist) triples, all little-endian.
void write_nnf(const std::string& path, int width, int height,
               const std::vector<int32_t>& dx, const std::vector<int32_t>& dy,
               const std::vector<float>& dist);
void read_nnf(const std::string& path, int* width, int* height, std::vector<int32_t>* dx,
              std::vector<int32_t>* dy, std::vector<float>* dist);

}  // namespace pf
