#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace alforge {

/// Seeded random stream scoped by a string id.
///
/// Two streams built from the same (seed, stream_id) produce the same draws
/// for the same call sequence. Distributions are computed from raw engine
/// bits here rather than through <random> distribution objects, whose output
/// is implementation-defined, so draws are reproducible across toolchains.
/// A stream must not be shared across threads; derive a child instead.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::string stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& stream_id() const noexcept { return stream_id_; }

  /// Independent stream whose id is `stream_id()/suffix`.
  RngStream child(std::string_view suffix) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  int uniform_int(int lo, int hi);  // inclusive bounds
  double normal();
  double normal(double mean, double stddev);
  bool bernoulli(double p);

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[uniform_index(i)]);
    }
  }

  /// Serialized engine state; restoring it resumes the exact call sequence.
  std::string save_state() const;
  void restore_state(const std::string& state);

private:
  std::uint64_t seed_;
  std::string stream_id_;
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

std::uint64_t fnv1a64(std::string_view text);

}  // namespace alforge
