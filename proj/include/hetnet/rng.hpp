#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace hetnet {

// Counter-based RNG: Philox-4x32-10. A stream is keyed by (seed, stream index);
// draws within a stream advance only a local counter. Sample i of a Monte Carlo
// run always sees the same values no matter how work is split across threads,
// which is what makes parallel runs merge byte-identically.
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        ctr2_(static_cast<std::uint32_t>(stream)),
        ctr3_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::uint32_t next_u32() {
    if (have_ == 0) {
      fill_block();
      have_ = 4;
    }
    return out_[--have_];
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform on (0,1), never exactly 0 or 1.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; pairs are buffered.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Eigen::VectorXd gaussian_vector(int dim) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = gaussian();
    return v;
  }

  // Uniform over the solid ball of the given radius: normalized Gaussian
  // direction scaled by radius * U^(1/dim).
  Eigen::VectorXd ball_point(int dim, double radius) {
    Eigen::VectorXd g = gaussian_vector(dim);
    double n = g.norm();
    if (n < 1e-300) g[0] = 1.0, n = 1.0;
    double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(dim));
    return g * (r / n);
  }

 private:
  static std::uint32_t mulhi(std::uint32_t a, std::uint32_t b) {
    return static_cast<std::uint32_t>((static_cast<std::uint64_t>(a) * b) >> 32);
  }
  static std::uint32_t mullo(std::uint32_t a, std::uint32_t b) {
    return a * b;
  }

  void fill_block() {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    std::uint32_t c0 = ctr0_, c1 = ctr1_, c2 = ctr2_, c3 = ctr3_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0 = mulhi(kM0, c0), lo0 = mullo(kM0, c0);
      std::uint32_t hi1 = mulhi(kM1, c2), lo1 = mullo(kM1, c2);
      std::uint32_t n0 = hi1 ^ c1 ^ k0;
      std::uint32_t n1 = lo1;
      std::uint32_t n2 = hi0 ^ c3 ^ k1;
      std::uint32_t n3 = lo0;
      c0 = n0, c1 = n1, c2 = n2, c3 = n3;
      k0 += kW0;
      k1 += kW1;
    }
    out_[0] = c0, out_[1] = c1, out_[2] = c2, out_[3] = c3;
    if (++ctr0_ == 0) ++ctr1_;  // block counter, 64-bit
  }

  std::uint32_t key0_, key1_;
  std::uint32_t ctr0_ = 0, ctr1_ = 0;  // advances per block
  std::uint32_t ctr2_, ctr3_;          // stream index, fixed
  std::uint32_t out_[4] = {0, 0, 0, 0};
  int have_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// splitmix64: used to expand one top-level seed into per-subsystem seeds.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + tag * 0x9E3779B97F4A7C15ull + 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace hetnet
