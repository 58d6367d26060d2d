#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace silcal {

// Binary silhouette of one frame. Pixel (x, y) has its center at image
// coordinates (x, y); x grows right, y grows down.
class SilhouetteMask {
 public:
  SilhouetteMask() = default;
  SilhouetteMask(int width, int height);
  SilhouetteMask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return width_ == 0 || height_ == 0; }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  // Pixels outside the image read as background.
  bool at(int x, int y) const noexcept {
    return contains(x, y) && bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }

  void set(int x, int y, bool value = true);

  // Foreground pixel with at least one 4-neighbour in the background.
  bool is_boundary(int x, int y) const noexcept {
    return at(x, y) &&
           (!at(x - 1, y) || !at(x + 1, y) || !at(x, y - 1) || !at(x, y + 1));
  }

  std::size_t count() const noexcept;
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  friend bool operator==(const SilhouetteMask&, const SilhouetteMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Bounding box and per-row / per-column foreground spans of one frame.
struct FrameExtent {
  bool empty = true;
  int min_x = 0, max_x = -1, min_y = 0, max_y = -1;
  std::vector<int> row_min, row_max;  // indexed by y; min > max when empty
  std::vector<int> col_min, col_max;  // indexed by x

  static FrameExtent of(const SilhouetteMask& mask);
};

// Time-ordered masks from one camera. Immutable after construction.
class SilhouetteSequence {
 public:
  SilhouetteSequence() = default;
  explicit SilhouetteSequence(std::vector<SilhouetteMask> frames);

  std::size_t size() const noexcept { return frames_.size(); }
  bool empty() const noexcept { return frames_.empty(); }
  int width() const noexcept { return frames_.empty() ? 0 : frames_.front().width(); }
  int height() const noexcept { return frames_.empty() ? 0 : frames_.front().height(); }

  const SilhouetteMask& operator[](std::size_t t) const { return frames_[t]; }
  const FrameExtent& extent(std::size_t t) const { return extents_[t]; }
  std::span<const SilhouetteMask> frames() const noexcept { return frames_; }

 private:
  std::vector<SilhouetteMask> frames_;
  std::vector<FrameExtent> extents_;
};

}  // namespace silcal
