#pragma once

// Seeded generators for small random transport instances.

#include <random>
#include <vector>

#include "rcs/domain.hpp"
#include "rcs/measure.hpp"

namespace testing_support {

/// Weights are multiples of 1/8 so LP and flow solvers see exact inputs.
inline double dyadic_weight(std::mt19937_64& rng) { return static_cast<double>(1 + rng() % 16) / 8.0; }

/// Positive measure with up to `max_atoms` atoms (at least `min_atoms`).
inline rcs::SignedMeasure random_positive(const rcs::Domain& d, std::mt19937_64& rng, std::size_t max_atoms,
                                          std::size_t min_atoms = 0) {
  const std::size_t k = min_atoms + rng() % (max_atoms - min_atoms + 1);
  rcs::SignedMeasure::Atoms pos;
  while (pos.size() < std::min(k, d.size())) pos[static_cast<rcs::Site>(rng() % d.size())] = dyadic_weight(rng);
  return rcs::SignedMeasure::from_parts(d.name(), pos, {});
}

/// Signed measure with up to `max_atoms` atoms in each Jordan part.
inline rcs::SignedMeasure random_signed(const rcs::Domain& d, std::mt19937_64& rng, std::size_t max_atoms) {
  std::vector<std::pair<rcs::Site, double>> raw;
  const std::size_t kp = rng() % (max_atoms + 1), kn = rng() % (max_atoms + 1);
  for (std::size_t i = 0; i < kp; ++i) raw.emplace_back(rng() % d.size(), dyadic_weight(rng));
  for (std::size_t i = 0; i < kn; ++i) raw.emplace_back(rng() % d.size(), -dyadic_weight(rng));
  return rcs::jordan(d, raw);
}

/// Small domain of 2..6 sites: a 1-D torus or square grid, or a 2x2/2x3-ish grid.
inline rcs::Domain random_small_domain(std::mt19937_64& rng) {
  switch (rng() % 4) {
    case 0: return rcs::build_domain(rcs::DomainKind::TorusGrid, 2 + static_cast<int>(rng() % 5), 1);
    case 1: return rcs::build_domain(rcs::DomainKind::SquareGrid, 2 + static_cast<int>(rng() % 5), 1);
    case 2: return rcs::build_domain(rcs::DomainKind::TorusGrid, 2, 2);
    default: return rcs::build_domain(rcs::DomainKind::SpherePoints, 3 + static_cast<int>(rng() % 4), 2);
  }
}

}  // namespace testing_support
