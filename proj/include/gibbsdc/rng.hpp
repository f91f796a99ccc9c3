#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gibbsdc {

struct Point;

/// Mixes two 64-bit words (splitmix64 finalizer over a combined state).
std::uint64_t mix(std::uint64_t a, std::uint64_t b);

/// Hash of the exact bit patterns of a point's coordinates and an optional mark.
/// Used to key auxiliary randomness by candidate identity rather than by position
/// in some container, so two runs that meet the same candidate draw the same numbers.
std::uint64_t hash_point(const Point& p, double mark = 0.0);

/// Tags for the purpose component of a stream key.
enum class StreamPurpose : std::uint64_t {
  carrier = 0x11,
  retention = 0x22,
  rejection = 0x33,
  gnz = 0x44,
  replicate = 0x55,
  perturbation = 0x66,
};

/// Philox4x32-10 counter-based generator.  A stream is identified by (seed, stream id);
/// the counter walks through the stream.  Identical (seed, stream) pairs produce
/// identical sequences independent of thread scheduling.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t poisson(double mean);
  double normal();

  /// A fresh, independent stream keyed by this stream's identity and `tag`.
  RngStream child(std::uint64_t tag) const { return RngStream(seed_, mix(stream_, tag)); }
  RngStream child(StreamPurpose p, std::uint64_t tag) const {
    return RngStream(seed_, mix(mix(stream_, static_cast<std::uint64_t>(p)), tag));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

}  // namespace gibbsdc
