#pragma once

#include "diffeo/fields.hpp"

namespace diffeo {

// Separable Gaussian smoothing with clamp-to-edge boundary handling. The kernel is
// truncated at ceil(3 sigma) and renormalised. sigma <= 0 returns the input unchanged.
ScalarVolume gaussian_smooth(const ScalarVolume& vol, double sigma);
VectorField gaussian_smooth(const VectorField& field, double sigma);

// Smooths in place over raw interleaved storage with `components` values per voxel.
void gaussian_smooth_inplace(const Grid3& grid, std::vector<double>& data, int components,
                             double sigma);

// Grid obtained by keeping every other voxel along each axis: n -> (n + 1) / 2, spacing x2.
Grid3 coarser_grid(const Grid3& grid);

// Smooth with sigma = 1 then decimate on even voxel indices.
ScalarVolume downsample(const ScalarVolume& vol);

// Velocity/displacement upsampling: coarse voxel c maps to fine voxel 2c, values scaled by 2.
VectorField upsample_vectors(const VectorField& coarse, const Grid3& fine);

// Zero mean, unit variance. Returns the input shifted to zero when the variance vanishes.
struct Normalization {
    double mean = 0.0;
    double stddev = 1.0;
};
ScalarVolume normalize_intensity(const ScalarVolume& vol, Normalization* stats = nullptr);

}  // namespace diffeo
