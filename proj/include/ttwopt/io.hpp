#pragma once

#include <filesystem>
#include <string>

#include "ttwopt/tensor.hpp"

namespace ttwopt {

/// Binary tensor file: magic "DTEN1", u32 mode count, u32 dims, then the
/// colexicographic payload as little-endian 64-bit floats. Writes are
/// atomic (temp file + rename) and reject non-finite values; reads verify
/// the magic and the payload length bit-exactly.
DenseTensor read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const DenseTensor& t);

/// Binary PPM (P6, maxval 255). Pixel (row r, col c, channel ch) maps to
/// tensor index (r, c, ch); values are scalars in [0, 255]. Writing rounds
/// half away from zero and clamps.
DenseTensor read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const DenseTensor& t);

/// Atomic whole-file text write (temp file + rename).
void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace ttwopt
