#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace rom {

// Counter-based generator built on the SplitMix64 finalizer. Each draw is a
// pure function of (seed, stream, counter), so a run that consumes fewer
// draws sees a prefix of the sequence of a longer run with the same seed.
class CounterRng {
 public:
  enum Stream : std::uint64_t {
    kOfflineTrials = 1,
    kOnlineSamples = 2,
    kAudit = 7,
  };

  // Vector draws with the same index use counters [index*kStride, ...),
  // which caps vector length at kStride/2 (normals burn two counters each).
  static constexpr std::uint64_t kStride = 1ULL << 20;

  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
    // Two mixing rounds decorrelate (seed, stream, counter) triples.
    std::uint64_t x = seed_ + 0x9e3779b97f4a7c15ULL * (stream + 1);
    x = mix(x + counter);
    return mix(x + 0xbf58476d1ce4e5b9ULL * stream);
  }

  // Uniform on [0,1) with 53-bit resolution.
  double uniform01(std::uint64_t stream, std::uint64_t counter) const {
    return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
  }

  double uniform(std::uint64_t stream, std::uint64_t counter, double lo,
                 double hi) const {
    return lo + (hi - lo) * uniform01(stream, counter);
  }

  // Standard normal via Box-Muller.
  double normal(std::uint64_t stream, std::uint64_t counter) const;

  Eigen::VectorXd uniform_vector(std::uint64_t stream, std::uint64_t index,
                                 int size, double lo, double hi) const {
    Eigen::VectorXd v(size);
    for (int j = 0; j < size; ++j) {
      v[j] = uniform(stream, index * kStride + static_cast<std::uint64_t>(j),
                     lo, hi);
    }
    return v;
  }

  Eigen::VectorXd normal_vector(std::uint64_t stream, std::uint64_t index,
                                int size) const {
    Eigen::VectorXd v(size);
    for (int j = 0; j < size; ++j) {
      v[j] = normal(stream, index * kStride + static_cast<std::uint64_t>(j));
    }
    return v;
  }

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace rom
