#pragma once

#include "instrsynth/types.hpp"

#include <filesystem>
#include <string>

namespace instrsynth {

/// Reads an 8-bit PNG. Colour, palette and 16-bit images are converted to
/// 8-bit luminance; alpha is dropped.
Image read_png(const std::filesystem::path& path);

/// Writes an 8-bit single-channel PNG. Output bytes depend only on the pixels.
void write_png(const std::filesystem::path& path, const Image& image);

/// Same encoding, returned in memory.
std::string encode_png(const Image& image);

}  // namespace instrsynth
