#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace confsym {

/// Counter-based pseudo-random generator (splitmix64 of seed + counter).
/// Stateless apart from the counter, so a (seed, draw-index) pair pins every
/// value and experiments replay bit-exactly.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_raw() {
    std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * ++counter_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_raw() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Eigen::VectorXd vector_in_box(
      const std::vector<std::pair<double, double>>& box) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(box.size()));
    for (std::size_t i = 0; i < box.size(); ++i)
      v(static_cast<Eigen::Index>(i)) = uniform(box[i].first, box[i].second);
    return v;
  }

  /// Direction vector with components in [-1, 1], redrawn if nearly zero.
  Eigen::VectorXd direction(int dim) {
    Eigen::VectorXd v(dim);
    do {
      for (int i = 0; i < dim; ++i) v(i) = uniform(-1.0, 1.0);
    } while (v.norm() < 1e-3);
    return v;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace confsym
