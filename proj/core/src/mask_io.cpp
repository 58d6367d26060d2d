#include "silcal/mask_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "silcal/error.hpp"

namespace silcal {

namespace fs = std::filesystem;

namespace {

// Reads the next whitespace-separated header token, skipping '#' comments.
std::string next_pgm_token(std::istream& in) {
  std::string tok;
  char ch = 0;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

int parse_header_int(std::istream& in, const fs::path& path) {
  const std::string tok = next_pgm_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "bad PGM header field '" + tok + "' in " + path.string());
  }
}

SilhouetteMask threshold(int width, int height, const std::vector<std::uint8_t>& grey) {
  std::vector<std::uint8_t> bits(grey.size());
  std::transform(grey.begin(), grey.end(), bits.begin(),
                 [](std::uint8_t g) { return g > kForegroundThreshold ? 1 : 0; });
  return SilhouetteMask(width, height, std::move(bits));
}

std::vector<std::uint8_t> to_grey(const SilhouetteMask& mask) {
  std::vector<std::uint8_t> grey(mask.bits().size());
  std::transform(mask.bits().begin(), mask.bits().end(), grey.begin(),
                 [](std::uint8_t b) { return b ? 255 : 0; });
  return grey;
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

SilhouetteMask read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  if (next_pgm_token(in) != "P5") {
    throw Error(ErrorCode::kParse, path.string() + " is not a binary PGM (P5)");
  }
  const int width = parse_header_int(in, path);
  const int height = parse_header_int(in, path);
  const int maxval = parse_header_int(in, path);
  if (maxval > 255) {
    throw Error(ErrorCode::kParse, "only 8-bit PGM is supported: " + path.string());
  }
  // next_pgm_token consumed exactly one whitespace byte after maxval.
  std::vector<std::uint8_t> grey(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(grey.data()), static_cast<std::streamsize>(grey.size()));
  if (in.gcount() != static_cast<std::streamsize>(grey.size())) {
    throw Error(ErrorCode::kParse, "truncated PGM payload in " + path.string());
  }
  if (maxval != 255) {
    for (auto& g : grey) g = static_cast<std::uint8_t>(g * 255 / maxval);
  }
  return threshold(width, height, grey);
}

void write_pgm(const fs::path& path, const SilhouetteMask& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  const auto grey = to_grey(mask);
  out.write(reinterpret_cast<const char*>(grey.data()), static_cast<std::streamsize>(grey.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

SilhouetteMask read_png(const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw Error(ErrorCode::kIo, "cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> grey(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, grey.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kParse, "cannot decode PNG " + path.string() + ": " + msg);
  }
  return threshold(static_cast<int>(image.width), static_cast<int>(image.height), grey);
}

void write_png(const fs::path& path, const SilhouetteMask& mask) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(mask.width());
  image.height = static_cast<png_uint_32>(mask.height());
  image.format = PNG_FORMAT_GRAY;
  const auto grey = to_grey(mask);
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, grey.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, "cannot write PNG " + path.string() + ": " + image.message);
  }
}

SilhouetteMask read_mask(const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") return read_png(path);
  throw Error(ErrorCode::kInvalidArgument, "unsupported mask format: " + path.string());
}

std::string frame_file_name(std::size_t index, const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06zu.", index + 1);
  return buf + ext;
}

SilhouetteSequence read_sequence(const fs::path& dir) {
  const fs::path manifest = dir / kManifestName;
  std::ifstream in(manifest);
  if (!in) throw Error(ErrorCode::kIo, "missing manifest " + manifest.string());
  std::vector<SilhouetteMask> frames;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    frames.push_back(read_mask(dir / line.substr(first, last - first + 1)));
  }
  if (frames.empty()) {
    throw Error(ErrorCode::kEmptySequence, "manifest lists no frames: " + manifest.string());
  }
  return SilhouetteSequence(std::move(frames));
}

void write_sequence(const fs::path& dir, const SilhouetteSequence& seq, const std::string& ext) {
  if (ext != "pgm" && ext != "png") {
    throw Error(ErrorCode::kInvalidArgument, "unsupported mask format: " + ext);
  }
  fs::create_directories(dir);
  std::ofstream manifest(dir / kManifestName);
  if (!manifest) throw Error(ErrorCode::kIo, "cannot write manifest in " + dir.string());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const std::string name = frame_file_name(t, ext);
    if (ext == "pgm") {
      write_pgm(dir / name, seq[t]);
    } else {
      write_png(dir / name, seq[t]);
    }
    manifest << name << '\n';
  }
}

}  // namespace silcal
