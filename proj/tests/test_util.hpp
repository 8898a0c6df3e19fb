#pragma once

#include <random>

#include "hmflow/hyperbolic.hpp"

namespace hmflow::testing {

inline cplx random_cplx(std::mt19937_64& rng, double scale = 1.0)
{
  std::normal_distribution<double> n(0.0, scale);
  return {n(rng), n(rng)};
}

inline MobiusMap random_mobius(std::mt19937_64& rng, double scale = 1.0)
{
  for (;;) {
    const cplx a = random_cplx(rng, scale), b = random_cplx(rng, scale), c = random_cplx(rng, scale),
               d = random_cplx(rng, scale);
    if (std::abs(a * d - b * c) > 0.1) return MobiusMap::normalized(a, b, c, d);
  }
}

inline H3Point random_h3(std::mt19937_64& rng)
{
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> h(-2.0, 2.0);
  return {n(rng), n(rng), std::exp(h(rng))};
}

}  // namespace hmflow::testing
