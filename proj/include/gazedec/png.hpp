#pragma once

#include "gazedec/raster.hpp"

#include <string>

namespace gazedec {
namespace raster {

// Minimal PNG support: 8-bit RGB, filter type 0, uncompressed deflate
// blocks inside a valid zlib stream. The reader handles exactly what
// the writer emits. Storage is 8-bit, so read_png(export_png(x))
// equals quantize8(x) exactly; quantized images round-trip bit-exact.
void export_png(const ScanpathImage& image, const std::string& path);
ScanpathImage read_png(const std::string& path);

// Snaps every value to the nearest 8-bit level (k/255).
ScanpathImage quantize8(const ScanpathImage& image);

// Dimensions from the IHDR chunk, without decoding pixel data.
void png_dimensions(const std::string& path, size_t& width, size_t& height);

} // namespace raster
} // namespace gazedec
