#include "silcal/mask.hpp"

#include <algorithm>
#include <string>

#include "silcal/error.hpp"

namespace silcal {

SilhouetteMask::SilhouetteMask(int width, int height)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative mask dimensions");
  }
  bits_.assign(static_cast<std::size_t>(width) * height, 0);
}

SilhouetteMask::SilhouetteMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width < 0 || height < 0 ||
      bits_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kInvalidArgument,
                "mask buffer size does not match " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

void SilhouetteMask::set(int x, int y, bool value) {
  if (!contains(x, y)) {
    throw Error(ErrorCode::kInvalidArgument, "pixel outside mask");
  }
  bits_[static_cast<std::size_t>(y) * width_ + x] = value ? 1 : 0;
}

std::size_t SilhouetteMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

FrameExtent FrameExtent::of(const SilhouetteMask& mask) {
  FrameExtent e;
  const int w = mask.width(), h = mask.height();
  e.row_min.assign(h, w);
  e.row_max.assign(h, -1);
  e.col_min.assign(w, h);
  e.col_max.assign(w, -1);
  e.min_x = w;
  e.min_y = h;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      e.row_min[y] = std::min(e.row_min[y], x);
      e.row_max[y] = std::max(e.row_max[y], x);
      e.col_min[x] = std::min(e.col_min[x], y);
      e.col_max[x] = std::max(e.col_max[x], y);
      e.min_x = std::min(e.min_x, x);
      e.max_x = std::max(e.max_x, x);
      e.min_y = std::min(e.min_y, y);
      e.max_y = std::max(e.max_y, y);
      e.empty = false;
    }
  }
  if (e.empty) {
    e.min_x = e.min_y = 0;
    e.max_x = e.max_y = -1;
  }
  return e;
}

SilhouetteSequence::SilhouetteSequence(std::vector<SilhouetteMask> frames)
    : frames_(std::move(frames)) {
  extents_.reserve(frames_.size());
  for (const auto& f : frames_) {
    if (f.width() != frames_.front().width() || f.height() != frames_.front().height()) {
      throw Error(ErrorCode::kInvalidArgument, "sequence frames differ in size");
    }
    extents_.push_back(FrameExtent::of(f));
  }
}

}  // namespace silcal
