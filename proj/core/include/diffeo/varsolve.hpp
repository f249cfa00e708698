#pragma once

// Reconstruction of a transformation from a prescribed Jacobian determinant (f0) and curl
// (g0) by minimising
//
//     F(u) = 1/(2N) Σ_voxels [ (J(id + u) − f0)² + λ |curl(u) − g0|² ]
//
// over displacements u that vanish on the lattice boundary.

#include <string>
#include <vector>

#include "diffeo/fields.hpp"

namespace diffeo {

struct MonitorPair {
    ScalarVolume f0;  // prescribed Jacobian determinant
    VectorField g0;   // prescribed curl

    const Grid3& grid() const { return f0.grid(); }

    // Throws on grid mismatch or non-positive f0. Returns a warning message when the mean
    // of f0 lies outside [0.2, 5.0], empty otherwise.
    std::string validate() const;
};

struct SolveOptions {
    int max_iters = 500;
    double step = 0.5;
    // Gaussian preconditioner applied to the gradient, in voxels; 0 disables it.
    double sigma = 1.0;
    // Stop when the relative decrease over `window` iterations drops below this.
    double tolerance = 1e-6;
    int window = 10;
    // Stop as soon as the functional falls below this.
    double functional_floor = 1e-8;
    // λ, the weight of the curl residual.
    double curl_weight = 1.0;
    int max_halvings = 20;
};

struct SolveReport {
    int iterations = 0;
    double final_value = 0.0;
    // history[0] is the functional at the initial iterate, then one entry per accepted step.
    std::vector<double> history;
    bool converged = false;
    std::vector<std::string> warnings;
};

// Discretised functional and its exact gradient with respect to every displacement value.
class MonitorFunctional {
public:
    MonitorFunctional(const MonitorPair& monitor, double curl_weight = 1.0);

    const Grid3& grid() const { return monitor_.grid(); }

    // `u` is a displacement field (interleaved, 3 values per voxel).
    double value(const std::vector<double>& u) const;
    // dF/du for every entry of u, boundary included.
    std::vector<double> gradient(const std::vector<double>& u) const;

    // Residual norms ‖J(id + u) − f0‖₂ / ‖f0‖₂ and ‖curl(u) − g0‖₂ / ‖g0‖₂. The curl
    // ratio falls back to the absolute norm per voxel when g0 vanishes.
    struct Residuals {
        double jacobian_relative = 0.0;
        double curl_relative = 0.0;
    };
    Residuals residuals(const std::vector<double>& u) const;

private:
    MonitorPair monitor_;
    double curl_weight_;
};

struct ReconstructResult {
    VectorField phi;  // transformation
    SolveReport report;
};

// Gradient descent from u = 0 with backtracking. The returned field is the best iterate;
// report.converged is false when max_iters ran out first.
ReconstructResult reconstruct(const MonitorPair& monitor, const SolveOptions& opts = {});

// Relative L2 residuals of a transformation against a monitor pair.
MonitorFunctional::Residuals monitor_residuals(const MonitorPair& monitor, const VectorField& phi);

}  // namespace diffeo
