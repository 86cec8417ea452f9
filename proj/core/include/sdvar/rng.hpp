#pragma once

#include <cstdint>
#include <random>

namespace sdvar {

// Source of uniforms on the open interval (0, 1). Values are of the form
// (2k+1)/2^53 so that u -> 1-u is an exact involution, which antithetic
// sampling relies on.
struct UniformSource {
  virtual double uniform() = 0;
  virtual ~UniformSource() = default;
};

class RngStream final : public UniformSource {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  double uniform() override {
    const std::uint64_t k = eng_() >> 12;  // top 52 bits
    return static_cast<double>(2 * k + 1) * 0x1p-53;
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

// Reflects the underlying stream; consumes uniforms one for one.
class AntitheticSource final : public UniformSource {
 public:
  explicit AntitheticSource(UniformSource& base) : base_(base) {}
  double uniform() override { return 1.0 - base_.uniform(); }

 private:
  UniformSource& base_;
};

double standard_normal(UniformSource& u);
double chi_squared(double nu, UniformSource& u);

// Decorrelated child seed for worker/replication streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace sdvar
