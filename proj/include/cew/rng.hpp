#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace cew {

// What a stream is used for. Each tag gets its own counter space so that
// changing how many draws one consumer makes never shifts another.
enum class Purpose : std::uint32_t {
  context = 1,
  adversary = 2,
  policy = 3,
  arm = 4,
  covariance = 5,
  covariance_truncated = 6,
  mgr = 7,
  linexp3 = 8,
  diagnostics = 9,
  environment_check = 10,
  test = 11,
};

// Philox4x32-10 used as a keyed, seekable stream.
//   key     = master seed
//   counter = (block, purpose | substream << 16, round, replication)
// Satisfies UniformRandomBitGenerator so std distributions can sit on top.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng(std::uint64_t seed, std::uint64_t replication, std::uint64_t round,
      Purpose purpose, std::uint32_t substream = 0);

  // Convenience for tests and one-off tools.
  explicit Rng(std::uint64_t seed) : Rng(seed, 0, 0, Purpose::test) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform on the open interval (0, 1); safe for log().
  double uniform();
  double normal();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  // A new independent stream derived from this one's key and position.
  Rng split(std::uint32_t substream) const;

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  std::normal_distribution<double> normal_{};
};

// Raw Philox4x32-10 block function, exposed for the known-answer test.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

}  // namespace cew
