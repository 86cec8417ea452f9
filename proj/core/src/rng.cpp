#include "sdvar/rng.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace sdvar {

double standard_normal(UniformSource& u) {
  return 1.4142135623730951 * boost::math::erf_inv(2.0 * u.uniform() - 1.0);
}

double chi_squared(double nu, UniformSource& u) {
  return 2.0 * boost::math::gamma_p_inv(0.5 * nu, u.uniform());
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace sdvar
