#include "alforge/core/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "alforge/core/error.hpp"

namespace alforge {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RngStream::RngStream(std::uint64_t seed, std::string stream_id)
    : seed_(seed), stream_id_(std::move(stream_id)) {
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(seed)),
                    static_cast<std::uint32_t>(splitmix64(seed) >> 32),
                    static_cast<std::uint32_t>(fnv1a64(stream_id_)),
                    static_cast<std::uint32_t>(fnv1a64(stream_id_) >> 32)};
  engine_.seed(seq);
}

RngStream RngStream::child(std::string_view suffix) const {
  std::string id = stream_id_;
  id += '/';
  id += suffix;
  return RngStream(seed_, std::move(id));
}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw_error(ErrorCategory::Config, "uniform_index: empty range");
  // Lemire-style rejection keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

int RngStream::uniform_int(int lo, int hi) {
  if (hi < lo) throw_error(ErrorCategory::Config, "uniform_int: hi < lo");
  const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo + 1);
  return lo + static_cast<int>(uniform_index(span));
}

double RngStream::normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_normal_ = true;
  return r * std::cos(theta);
}

double RngStream::normal(double mean, double stddev) { return mean + stddev * normal(); }

bool RngStream::bernoulli(double p) { return uniform() < p; }

std::string RngStream::save_state() const {
  std::ostringstream out;
  out << engine_ << ' ' << (has_spare_normal_ ? 1 : 0) << ' ';
  out.precision(17);
  out << std::hexfloat << spare_normal_;
  return out.str();
}

void RngStream::restore_state(const std::string& state) {
  std::istringstream in(state);
  int spare = 0;
  std::string spare_text;
  in >> engine_ >> spare >> spare_text;
  if (!in && !in.eof()) throw_error(ErrorCategory::Data, "corrupt rng state");
  has_spare_normal_ = spare != 0;
  spare_normal_ = std::strtod(spare_text.c_str(), nullptr);
}

}  // namespace alforge
