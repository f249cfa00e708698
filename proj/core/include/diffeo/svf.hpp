#pragma once

#include "diffeo/fields.hpp"

namespace diffeo {

inline constexpr int kDefaultSquaringSteps = 7;

/// Exponential of a stationary velocity field by scaling and squaring:
/// φ ← id + z / 2^steps, then φ ← φ∘φ repeated `steps` times.
///
/// Composition clamps to the lattice edge, so the outermost voxels carry most of the
/// boundary error. `steps` must lie in [1, 12].
VectorField exponentiate(const VectorField& velocity, int steps = kDefaultSquaringSteps);

/// exp(−z), the inverse flow of exponentiate(z).
VectorField exponentiate_inverse(const VectorField& velocity, int steps = kDefaultSquaringSteps);

}  // namespace diffeo
