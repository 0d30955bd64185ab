#pragma once

// C^r norms and distances of circle maps by adaptive sampling.
//
// Samples are taken piece by piece between composite breakpoints. Pieces on
// which every factor is affine contribute exact values (the displacement is
// affine there, so its extremes sit at the ends). Other pieces are sampled
// on nested grids that double until the maxima settle.
//
// Every chain of lifts and rotations commutes with R_{1/P}, P the gcd of the
// covers, so only one period [0, 1/P) is ever sampled.

#include "circlefac/circle_map.hpp"

#include <vector>

namespace circlefac {

enum class NormMode { DifferenceFromIdentity, MapAbs };

struct NormOptions {
    std::size_t initial_grid = 1024;
    std::size_t max_grid = 1 << 15;
    double rel_tol = 1e-6;
    std::size_t breakpoint_budget = 1 << 14;
};

struct NormReport {
    unsigned order = 0;
    Real value;
    std::size_t grid_size = 0;
    unsigned refinement_passes = 0;
    bool certified = true;
    std::vector<Real> per_order;  // sup of the i-th derivative, i = 0..order
};

/// Raw sampled data of f - g on one period.
struct DifferenceProfile {
    Real disp_min, disp_max;       // f - g (lift values)
    std::vector<Real> diff_sup;    // sup |(f-g)^(i)|, i = 0..r (i = 0 normalised)
    std::vector<Real> f_sup;       // sup |f^(i)|, i = 0..r (i = 0 unused)
    std::size_t grid_size = 0;
    unsigned passes = 0;
    bool certified = true;
};

DifferenceProfile difference_profile(const PiecewiseMap& f, const PiecewiseMap& g, unsigned r,
                                     const NormOptions& opt = {});

/// Profile of f^-1 - id, sampled at f-images of points so that no inverse
/// has to be solved.
DifferenceProfile inverse_profile(const PiecewiseMap& f, unsigned r, const NormOptions& opt = {});

/// ||f - id||_r or |f|_r.
NormReport cr_norm(const PiecewiseMap& f, unsigned r, NormMode mode, const NormOptions& opt = {});

/// d_r(f, g) = max(||f - g||_r, ||f^-1 - g^-1||_r).
NormReport cr_dist(const PiecewiseMap& f, const PiecewiseMap& g, unsigned r, const NormOptions& opt = {});

/// sup |f^(j)| for j = 1..max_order (index 0 holds j = 1).
std::vector<Real> derivative_sups(const PiecewiseMap& f, unsigned max_order, const NormOptions& opt = {});

/// sup |(f^-1)^(j)| for j = 1..max_order.
std::vector<Real> inverse_derivative_sups(const PiecewiseMap& f, unsigned max_order, const NormOptions& opt = {});

/// Period P of the chain (gcd of covers; 1 when there are none).
BigInt chain_period(const PiecewiseMap& f);

/// True when every factor is evaluated on an affine piece at x.
bool affine_at(const PiecewiseMap& f, const Real& x);

}  // namespace circlefac
