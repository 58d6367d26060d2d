#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "silcal/geometry.hpp"
#include "silcal/hull.hpp"
#include "silcal/mask.hpp"

namespace silcal {

// Per-line binary time series: bit t is set when the line meets the
// silhouette at frame t.
class MotionBarcode {
 public:
  MotionBarcode() = default;
  explicit MotionBarcode(std::size_t length);
  static MotionBarcode from_bits(std::span<const int> bits);

  std::size_t size() const noexcept { return size_; }
  bool operator[](std::size_t t) const noexcept { return (words_[t / 64] >> (t % 64)) & 1u; }
  void set(std::size_t t, bool value = true);
  std::size_t count() const noexcept;
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  std::string to_string() const;  // e.g. "101"

  friend bool operator==(const MotionBarcode&, const MotionBarcode&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

// Probabilities handed to the matcher are clamped to [floor, 1 - floor].
inline constexpr double kProbabilityFloor = 1e-6;

double clamp_probability(double p) noexcept;
double log_odds(double p) noexcept;

// P(w = 1) for a trellis vertex.
struct VertexPrior {
  double p = 0.5;
  static VertexPrior clamped(double value) noexcept { return {clamp_probability(value)}; }
};

// P(w_next = 1 | w_prev = 1) for a trellis edge.
struct TransitionPrior {
  double p = 0.5;
  static TransitionPrior clamped(double value) noexcept { return {clamp_probability(value)}; }
};

// True when any foreground pixel center lies within 0.5 px of the line.
bool line_meets_silhouette(const Line2& line, const SilhouetteMask& mask, const FrameExtent& extent);

// Throws EmptySequence.
MotionBarcode motion_barcode(const Line2& line, const SilhouetteSequence& seq);

// Pearson correlation of two binary sequences; 0 when either is constant.
// Throws LengthMismatch.
double barcode_similarity(const MotionBarcode& b1, const MotionBarcode& b2);

// Best similarity over all cross pairs; -1 when either side is empty.
double best_pair_similarity(std::span<const MotionBarcode> left, std::span<const MotionBarcode> right);

// Number of 0/1 changes along the barcode.
int barcode_transitions(const MotionBarcode& b) noexcept;

// Over the cross pairs reaching the best similarity, the largest
// min(transitions). Orders candidates whose similarities tie.
int best_pair_support(std::span<const MotionBarcode> left, std::span<const MotionBarcode> right);

VertexPrior prior_from_similarity(double s) noexcept;  // (s + 1) / 2, clamped
double similarity_from_prior(VertexPrior prior) noexcept;

VertexPrior vertex_prior(const CriticalPoint& left, const CriticalPoint& right,
                         const SilhouetteSequence& left_seq, const SilhouetteSequence& right_seq);

// Gaussian kernel exp(-d^2 / 2 sigma^2) of the stacked displacement
// d = |[x - y, x' - y']|, clamped.
TransitionPrior transition_prior(const Vec2& x, const Vec2& x_prime, const Vec2& y,
                                 const Vec2& y_prime, double sigma);

// Debug dump: "a,b,c,bits" per line, with a header row.
void write_barcodes_csv(std::ostream& out, std::span<const Line2> lines,
                        std::span<const MotionBarcode> barcodes);

}  // namespace silcal
