#pragma once

// Intensity registration by gradient descent on a stationary velocity field.
//
// Objective at each pyramid level, with both images normalised to zero mean and unit
// variance:
//
//     E(z) = ½ mean (T(exp(z)) − R)² + λ_reg · mean ‖∇z‖²
//
// The data-term gradient uses the chain rule through the warp, (T(φ) − R) · ∇T(φ), and
// the search direction is Gaussian-smoothed before each backtracking line search.

#include <vector>

#include "diffeo/filters.hpp"
#include "diffeo/svf.hpp"
#include "diffeo/varsolve.hpp"

namespace diffeo {

struct RegistrationOptions {
    int levels = 3;             // pyramid depth, x2 downsampling per level, at most 5
    int iterations = 100;       // per level
    double step = 1.0;
    double sigma = 1.5;         // smoothing of the update, voxels
    int svf_steps = kDefaultSquaringSteps;
    double regularization = 0.1;  // λ_reg on mean ‖∇z‖²; 0 gives the bare SSD
    // Largest per-iteration velocity change, in voxels of the current level.
    double max_update = 2.0;
    // Per-level early stop on relative objective decrease over `window` iterations.
    double tolerance = 1e-5;
    int window = 10;

    void validate() const;
};

struct LevelReport {
    Grid3 grid;
    SolveReport solve;  // history holds the objective E(z) per accepted iteration
};

struct RegistrationReport {
    Normalization moving_normalization;
    Normalization fixed_normalization;
    double initial_ssd = 0.0;  // ½ mean (T − R)² on the normalised full-resolution images
    double final_ssd = 0.0;    // same, after warping T by the returned φ
    std::vector<LevelReport> levels;
};

struct RegistrationResult {
    VectorField velocity;
    VectorField phi;
    RegistrationReport report;
};

// Registers `moving` onto `fixed`: moving(φ(p)) ≈ fixed(p).
RegistrationResult register_images(const ScalarVolume& moving, const ScalarVolume& fixed,
                                   const RegistrationOptions& opts = {});

}  // namespace diffeo
