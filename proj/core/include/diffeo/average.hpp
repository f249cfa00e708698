#pragma once

// Average of a set of transformations: average their Jacobian determinants and curls,
// then reconstruct the transformation that realises the averaged pair.
//
// Pure translations have the same Jacobian (1) and curl (0) as the identity, so any
// translation shared by the inputs is invisible to this average. Pre-centre inputs
// when translation matters.

#include <vector>

#include "diffeo/varsolve.hpp"

namespace diffeo {

// f0 = mean of J(φ_i), g0 = mean of curl(φ_i). Each voxel's values are summed in sorted
// order, so the result does not depend on the order of `phis` at all.
MonitorPair average_monitor(const std::vector<VectorField>& phis);

ReconstructResult average_transformations(const std::vector<VectorField>& phis,
                                          const SolveOptions& opts = {});

}  // namespace diffeo
