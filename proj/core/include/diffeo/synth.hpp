#pragma once

// Deterministic synthetic inputs: smooth random velocities, a brain-like phantom,
// ball masks and pure translations.
//
// Random draws use std::mt19937_64, whose output sequence is fixed by the standard, and
// a local Box-Muller transform, so a seed produces the same volume on every platform.

#include <cstdint>
#include <optional>

#include "diffeo/fields.hpp"

namespace diffeo {

inline constexpr double kSynthVelocitySigma = 4.0;

// Gaussian-smoothed white noise, rescaled so the largest voxel magnitude equals
// `amplitude` (voxels). A positive `taper` fades the field to zero over that many voxels
// next to every face (smoothstep profile) before rescaling, which makes the flow fix the
// lattice boundary.
VectorField random_velocity(const Grid3& grid, double amplitude, std::uint64_t seed,
                            double sigma = kSynthVelocitySigma, double taper = 0.0);

// Smooth piecewise intensity phantom: head ellipsoid, brain ellipsoid, two ventricles and
// a seeded scatter of small blobs, blurred with sigma = 1 voxel. Values lie in [0, 1].
ScalarVolume phantom(const Grid3& grid, std::uint64_t seed);

// Label volume, 1 inside the ball of `radius` voxels around `center` (grid centre by
// default), 0 outside.
ScalarVolume ball_mask(const Grid3& grid, double radius, std::optional<Vec3> center = std::nullopt);

// φ(p) = p + shift.
VectorField translation(const Grid3& grid, const Vec3& shift);

Vec3 grid_center(const Grid3& grid);

}  // namespace diffeo
