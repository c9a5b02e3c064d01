#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace bornlab::rng {

/// Identifier recorded in result files so a run can be reproduced elsewhere.
inline constexpr std::string_view kAlgorithm = "philox4x32-10";

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// One Philox4x32 block with 10 rounds (Salmon et al. 2011 constants).
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// Counter-based random stream. The 64-bit seed is the Philox key, the 64-bit
/// stream id occupies the upper counter words and the lower words count blocks.
/// Copies are independent and replay the same sequence.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  std::size_t used_ = 4;
};

/// Stream for sub-run `index` of a run seeded with `seed`.
inline RngStream derive_stream(std::uint64_t seed, std::uint64_t index) {
  return RngStream(seed, index);
}

/// Inverse-CDF sampler over fixed nonnegative weights.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(std::span<const double> weights);
  std::size_t operator()(RngStream& rng) const;
  std::size_t size() const noexcept { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
  std::size_t last_positive_ = 0;
};

/// Index i with probability weights[i] / sum(weights).
std::size_t sample_categorical(std::span<const double> weights, RngStream& rng);

}  // namespace bornlab::rng
