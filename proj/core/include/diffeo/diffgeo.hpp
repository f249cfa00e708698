#pragma once

// Jacobian determinant and curl of a transformation.
//
// Derivatives are taken in voxel units with central differences in the interior and
// one-sided differences on the boundary faces. The same stencil, and its transpose, is
// used by the variational solver, so it is exposed here.

#include <array>
#include <optional>
#include <span>

#include "diffeo/fields.hpp"

namespace diffeo {

using Mat3 = std::array<std::array<double, 3>, 3>;

// Stencil coefficient D[p][q] of the 1-D derivative along an axis of length n.
double derivative_weight(std::size_t n, std::size_t p, std::size_t q);

// ∂/∂axis of component c of interleaved storage (`comps` values per voxel) at voxel idx.
double partial(const Grid3& grid, std::span<const double> data, int comps, int c, int axis,
               std::size_t idx);

// out[comps * q + c] += scale * (Dᵀ r)(q) along `axis`, for every voxel q.
void add_partial_transpose(const Grid3& grid, std::span<const double> r, int axis, double scale,
                           std::span<double> out, int comps, int c);

// M[c][a] = ∂φ_c / ∂x_a at voxel idx.
Mat3 jacobian_matrix(const VectorField& phi, std::size_t idx);
double determinant(const Mat3& m);
// ∂det(M)/∂M[c][a].
Mat3 cofactor(const Mat3& m);

// Displacement inputs are converted by adding the identity first.
ScalarVolume jacobian_determinant(const VectorField& phi);

// Curl of a transformation or displacement; both give the same result because the
// identity map is curl-free.
VectorField curl(const VectorField& phi);

// Fraction of masked voxels with jd <= 0. A missing mask means every voxel counts.
// Throws InvalidArgument when the mask selects no voxel.
double negative_jacobian_fraction(const ScalarVolume& jd,
                                  const std::optional<ScalarVolume>& mask = std::nullopt);

}  // namespace diffeo
