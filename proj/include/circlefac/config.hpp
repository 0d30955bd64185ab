#pragma once

// Run configuration: an INI file with sections
//
//   [run]       type, lambda, lambda1, lambda2, r, max_stages, seed, offset
//   [oracle]    kind, base, value
//   [precision] bits, window_samples, commutation_points, boundary_samples,
//               birkhoff_iterates, norm_grid, norm_tolerance
//   [budgets]   denominator_digits, denominator_cap, component_cap, orbit_cap,
//               boundary_enumeration_limit
//   [schedule]  target_product, deltas (comma separated, optional)
//
// Rationals are written "p/q" or as integers. CIRCLEFAC_PRECISION_BITS
// overrides precision.bits.

#include "circlefac/construction.hpp"

#include <stdexcept>
#include <string>

namespace circlefac {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    ConstructionConfig construction;
    std::size_t component_cap = 1000000;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Throws ConfigError naming the violated invariant.
void validate(const RunConfig& cfg);
/// Applies CIRCLEFAC_PRECISION_BITS when set.
void apply_environment(RunConfig& cfg);

}  // namespace circlefac
