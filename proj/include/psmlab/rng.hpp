#pragma once

#include <cstdint>
#include <vector>

namespace psmlab {

// Counter-based random stream with keyed splitting.
//
// Every stream is identified by a 64-bit key; the k-th draw is a SplitMix64
// finalizer applied to key + k*golden, so a stream is a pure function of
// (key, counter). child(id) derives a new key by hashing (key, id), which
// makes the whole tree of streams reproducible from the master seed alone,
// independent of scheduling or thread count.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed);

  // Derived stream for a fixed role or index. Does not consume draws.
  RngStream child(std::uint64_t id) const;

  std::uint64_t next_u64();

  // Uniform on [0, 1).
  double uniform();

  // Uniform on (0, 1] (safe for log()).
  double uniform_pos();

  // Standard normal (Box-Muller, second value cached).
  double normal();

  // Unbiased integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  // Marsaglia-Tsang gamma(shape, scale=1), shape > 0.
  double gamma(double shape);

  double chisq(double df) { return 2.0 * gamma(0.5 * df); }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t key() const { return key_; }

private:
  RngStream(std::uint64_t key, int);  // internal: key is already mixed

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace psmlab
