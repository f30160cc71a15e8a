#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace sceneforge {

// Input violates a documented contract (bad file, dangling reference, bad
// argument). The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A JSON document does not conform to its schema.
class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Numerical or runtime failure (non-finite loss etc). Exit code 2.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

struct Box3 {
  Vec3 min;
  Vec3 max;

  bool contains(const Vec3& p, double tol = 1e-6) const {
    return p.x >= min.x - tol && p.x <= max.x + tol && p.y >= min.y - tol &&
           p.y <= max.y + tol && p.z >= min.z - tol && p.z <= max.z + tol;
  }
  double width() const { return max.x - min.x; }
  double depth() const { return max.y - min.y; }
  double height() const { return max.z - min.z; }

  friend bool operator==(const Box3&, const Box3&) = default;
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Deterministic random source. The standard distributions are
// implementation-defined, so bounded draws are done by hand on top of
// splitmix64 to keep outputs byte-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling avoids modulo bias.
  std::size_t index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::index: empty range");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do {
      r = next();
    } while (r >= limit);
    return static_cast<std::size_t>(r % bound);
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[index(v.size())];
  }

 private:
  std::uint64_t state_;
};

// Independent stream for a (seed, stream) pair, e.g. one per layout sample.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
  Rng mixer(seed ^ (0xd1b54a32d192ed03ULL * (stream + 1)));
  return Rng(mixer.next());
}

// Snap a yaw to the nearest quarter turn, returned as 0..3.
inline int quarter_turns(double yaw) {
  double t = std::fmod(yaw, kTwoPi);
  if (t < 0) t += kTwoPi;
  return static_cast<int>(std::lround(t / (std::numbers::pi / 2.0))) % 4;
}

}  // namespace sceneforge
