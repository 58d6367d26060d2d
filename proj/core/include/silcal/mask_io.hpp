#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "silcal/mask.hpp"

namespace silcal {

// Grey values above this threshold are foreground.
inline constexpr int kForegroundThreshold = 127;

// 8-bit binary PGM (P5). Comments in the header are accepted.
SilhouetteMask read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const SilhouetteMask& mask);

// Any PNG libpng can convert to 8-bit grey.
SilhouetteMask read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const SilhouetteMask& mask);

// Dispatches on the extension (.pgm or .png).
SilhouetteMask read_mask(const std::filesystem::path& path);

// A sequence directory holds numbered frames plus `manifest.txt`, one file
// name per line in frame order. Blank lines and lines starting with '#' are
// skipped.
inline constexpr const char* kManifestName = "manifest.txt";

SilhouetteSequence read_sequence(const std::filesystem::path& dir);

// Writes frame_000001.<ext> ... and the manifest. `ext` is "pgm" or "png".
void write_sequence(const std::filesystem::path& dir, const SilhouetteSequence& seq,
                    const std::string& ext = "pgm");

std::string frame_file_name(std::size_t index, const std::string& ext);

}  // namespace silcal
