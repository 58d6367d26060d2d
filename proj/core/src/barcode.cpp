#include "silcal/barcode.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>

#include "silcal/error.hpp"

namespace silcal {

MotionBarcode::MotionBarcode(std::size_t length)
    : size_(length), words_((length + 63) / 64, 0) {}

MotionBarcode MotionBarcode::from_bits(std::span<const int> bits) {
  MotionBarcode b(bits.size());
  for (std::size_t t = 0; t < bits.size(); ++t) b.set(t, bits[t] != 0);
  return b;
}

void MotionBarcode::set(std::size_t t, bool value) {
  const std::uint64_t mask = std::uint64_t{1} << (t % 64);
  if (value) {
    words_[t / 64] |= mask;
  } else {
    words_[t / 64] &= ~mask;
  }
}

std::size_t MotionBarcode::count() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::string MotionBarcode::to_string() const {
  std::string s(size_, '0');
  for (std::size_t t = 0; t < size_; ++t) {
    if ((*this)[t]) s[t] = '1';
  }
  return s;
}

double clamp_probability(double p) noexcept {
  if (!(p >= kProbabilityFloor)) return kProbabilityFloor;  // also catches NaN
  return std::min(p, 1.0 - kProbabilityFloor);
}

double log_odds(double p) noexcept { return std::log(p / (1.0 - p)); }

bool line_meets_silhouette(const Line2& line, const SilhouetteMask& mask, const FrameExtent& extent) {
  if (extent.empty) return false;
  constexpr double kReach = 0.5;
  const double slack = 1e-9;
  if (std::abs(line.b) >= std::abs(line.a)) {
    // y as a function of x; at most two candidate rows per column.
    const double h = kReach / std::abs(line.b);
    for (int x = extent.min_x; x <= extent.max_x; ++x) {
      if (extent.col_min[x] > extent.col_max[x]) continue;
      const double yc = -(line.a * x + line.c) / line.b;
      const int lo = std::max(static_cast<int>(std::ceil(yc - h - slack)), extent.col_min[x]);
      const int hi = std::min(static_cast<int>(std::floor(yc + h + slack)), extent.col_max[x]);
      for (int y = lo; y <= hi; ++y) {
        if (mask.at(x, y) && line.distance(Vec2(x, y)) <= kReach + 1e-12) return true;
      }
    }
  } else {
    const double h = kReach / std::abs(line.a);
    for (int y = extent.min_y; y <= extent.max_y; ++y) {
      if (extent.row_min[y] > extent.row_max[y]) continue;
      const double xc = -(line.b * y + line.c) / line.a;
      const int lo = std::max(static_cast<int>(std::ceil(xc - h - slack)), extent.row_min[y]);
      const int hi = std::min(static_cast<int>(std::floor(xc + h + slack)), extent.row_max[y]);
      for (int x = lo; x <= hi; ++x) {
        if (mask.at(x, y) && line.distance(Vec2(x, y)) <= kReach + 1e-12) return true;
      }
    }
  }
  return false;
}

MotionBarcode motion_barcode(const Line2& line, const SilhouetteSequence& seq) {
  if (seq.empty()) throw Error(ErrorCode::kEmptySequence, "cannot build a barcode over zero frames");
  MotionBarcode code(seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (line_meets_silhouette(line, seq[t], seq.extent(t))) code.set(t);
  }
  return code;
}

double barcode_similarity(const MotionBarcode& b1, const MotionBarcode& b2) {
  if (b1.size() != b2.size()) {
    throw Error(ErrorCode::kLengthMismatch, "barcodes of length " + std::to_string(b1.size()) +
                                                " and " + std::to_string(b2.size()));
  }
  const double n = static_cast<double>(b1.size());
  const double na = static_cast<double>(b1.count());
  const double nb = static_cast<double>(b2.count());
  if (na == 0.0 || na == n || nb == 0.0 || nb == n) return 0.0;
  std::size_t both = 0;
  const auto w1 = b1.words();
  const auto w2 = b2.words();
  for (std::size_t i = 0; i < w1.size(); ++i) both += std::popcount(w1[i] & w2[i]);
  const double r = (n * static_cast<double>(both) - na * nb) /
                   std::sqrt(na * (n - na) * nb * (n - nb));
  return std::clamp(r, -1.0, 1.0);
}

double best_pair_similarity(std::span<const MotionBarcode> left, std::span<const MotionBarcode> right) {
  double best = -1.0;
  for (const auto& l : left) {
    for (const auto& r : right) best = std::max(best, barcode_similarity(l, r));
  }
  return best;
}

int barcode_transitions(const MotionBarcode& b) noexcept {
  int n = 0;
  for (std::size_t t = 1; t < b.size(); ++t) n += b[t] != b[t - 1];
  return n;
}

int best_pair_support(std::span<const MotionBarcode> left, std::span<const MotionBarcode> right) {
  const double best = best_pair_similarity(left, right);
  int support = 0;
  for (const auto& l : left) {
    for (const auto& r : right) {
      if (barcode_similarity(l, r) == best) {
        support = std::max(support, std::min(barcode_transitions(l), barcode_transitions(r)));
      }
    }
  }
  return support;
}

VertexPrior prior_from_similarity(double s) noexcept { return VertexPrior::clamped(0.5 * (s + 1.0)); }

double similarity_from_prior(VertexPrior prior) noexcept { return 2.0 * prior.p - 1.0; }

VertexPrior vertex_prior(const CriticalPoint& left, const CriticalPoint& right,
                         const SilhouetteSequence& left_seq, const SilhouetteSequence& right_seq) {
  if (left.tangents.lines.empty() || right.tangents.lines.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "critical point without tangent lines");
  }
  std::vector<MotionBarcode> lb, rb;
  for (const auto& l : left.tangents.lines) lb.push_back(motion_barcode(l, left_seq));
  for (const auto& l : right.tangents.lines) rb.push_back(motion_barcode(l, right_seq));
  return prior_from_similarity(best_pair_similarity(lb, rb));
}

TransitionPrior transition_prior(const Vec2& x, const Vec2& x_prime, const Vec2& y,
                                 const Vec2& y_prime, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma must be positive");
  const double d2 = (x - y).squaredNorm() + (x_prime - y_prime).squaredNorm();
  return TransitionPrior::clamped(std::exp(-d2 / (2.0 * sigma * sigma)));
}

void write_barcodes_csv(std::ostream& out, std::span<const Line2> lines,
                        std::span<const MotionBarcode> barcodes) {
  if (lines.size() != barcodes.size()) {
    throw Error(ErrorCode::kLengthMismatch, "one barcode per line expected");
  }
  out << "a,b,c,bits\n";
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out << lines[i].a << ',' << lines[i].b << ',' << lines[i].c << ',' << barcodes[i].to_string()
        << '\n';
  }
  out.precision(old_precision);
}

}  // namespace silcal
