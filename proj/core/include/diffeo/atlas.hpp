#pragma once

// Unbiased template construction.
//
// Each subject y_i starts as a candidate template. One outer iteration registers every
// candidate (moving) to every subject (fixed), averages the resulting transformations
// through their Jacobian/curl monitors, and warps the candidate by that average. The
// loop stops once every average is within `epsilon` voxels (mean displacement) of the
// identity, or after `max_outer_iters` iterations.

#include <optional>
#include <vector>

#include "diffeo/registration.hpp"
#include "diffeo/varsolve.hpp"

namespace diffeo {

struct AtlasOptions {
    double epsilon = 0.05;
    int max_outer_iters = 5;
    RegistrationOptions registration;
    SolveOptions solve;
    // Only iterate this candidate (index into the subject list), the cheap variant.
    std::optional<std::size_t> single_candidate;
    // Keep every per-iteration average transformation in the result.
    bool keep_fields = false;
};

struct AtlasReport {
    // deviations[t][c]: mean |avg − id| for candidate c at outer iteration t. Candidates
    // are listed in `candidates` order.
    std::vector<std::vector<double>> deviations;
    std::vector<double> max_deviation;
    // Mean displacement of the candidate registered to its own subject, per iteration.
    std::vector<std::vector<double>> self_displacement;
    std::vector<std::size_t> candidates;  // subject indices, input order
    std::size_t chosen = 0;               // subject index of the returned template
    int iterations = 0;
    bool converged = false;
};

struct AtlasResult {
    ScalarVolume atlas;
    // Composition of every average applied to the chosen candidate: atlas = y_chosen(cumulative).
    VectorField cumulative;
    AtlasReport report;
    // fields[t][c] when keep_fields is set.
    std::vector<std::vector<VectorField>> fields;
};

AtlasResult build_atlas(const std::vector<ScalarVolume>& subjects, const AtlasOptions& opts = {});

}  // namespace diffeo
