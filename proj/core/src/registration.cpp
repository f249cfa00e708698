#include "diffeo/registration.hpp"

#include <algorithm>
#include <cmath>

#include "diffeo/diffgeo.hpp"
#include "diffeo/metrics.hpp"
#include "diffeo/parallel.hpp"

namespace diffeo {

void RegistrationOptions::validate() const {
    if (levels < 1 || levels > 5) throw InvalidArgument("levels must be in [1, 5]");
    if (iterations < 1) throw InvalidArgument("iterations must be positive");
    if (!(step > 0.0) || !(sigma > 0.0) || !(max_update > 0.0))
        throw InvalidArgument("step, sigma and max_update must be positive");
    if (svf_steps < 1 || svf_steps > 12) throw InvalidArgument("svf steps must be in [1, 12]");
    if (!(regularization >= 0.0)) throw InvalidArgument("regularization must be non-negative");
    if (window < 1 || !(tolerance >= 0.0)) throw InvalidArgument("invalid stopping rule");
}

namespace {

void require_finite(const ScalarVolume& v, const char* what) {
    for (double x : v.data())
        if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + " holds non-finite intensities");
}

class LevelProblem {
public:
    LevelProblem(const ScalarVolume& moving, const ScalarVolume& fixed, const RegistrationOptions& opts)
        : moving_(moving), fixed_(fixed), opts_(opts) {}

    const Grid3& grid() const { return moving_.grid(); }

    double smoothness(const VectorField& z) const {
        if (opts_.regularization == 0.0) return 0.0;
        const Grid3& g = grid();
        const std::span<const double> d(z.data());
        const double total = parallel_sum(g.size(), [&](std::size_t idx) {
            double s = 0.0;
            for (int c = 0; c < 3; ++c)
                for (int a = 0; a < 3; ++a) {
                    const double v = partial(g, d, 3, c, a, idx);
                    s += v * v;
                }
            return s;
        });
        return opts_.regularization * total / static_cast<double>(g.size());
    }

    struct Evaluation {
        double objective = 0.0;
        VectorField phi;
        ScalarVolume warped;
    };

    Evaluation evaluate(const VectorField& z) const {
        Evaluation e;
        e.phi = exponentiate(z, opts_.svf_steps);
        e.warped = warp(moving_, e.phi);
        e.objective = ssd_value(e.warped, fixed_) + smoothness(z);
        return e;
    }

    // Per-voxel descent direction (N times the gradient of E), smoothed.
    std::vector<double> direction(const VectorField& z, const Evaluation& at) const {
        const Grid3& g = grid();
        const std::size_t n = g.size();
        std::vector<double> dir(3 * n, 0.0);
        const std::span<const double> w(at.warped.data());
        parallel_for(n, [&](std::size_t b, std::size_t e) {
            for (std::size_t idx = b; idx < e; ++idx) {
                const double residual = at.warped[idx] - fixed_[idx];
                for (int a = 0; a < 3; ++a) dir[3 * idx + a] = residual * partial(g, w, 1, 0, a, idx);
            }
        });
        if (opts_.regularization > 0.0) {
            const std::span<const double> zd(z.data());
            std::vector<double> dz(n);
            for (int c = 0; c < 3; ++c)
                for (int a = 0; a < 3; ++a) {
                    for (std::size_t idx = 0; idx < n; ++idx) dz[idx] = partial(g, zd, 3, c, a, idx);
                    add_partial_transpose(g, dz, a, 2.0 * opts_.regularization, dir, 3, c);
                }
        }
        gaussian_smooth_inplace(g, dir, 3, opts_.sigma);
        return dir;
    }

private:
    const ScalarVolume& moving_;
    const ScalarVolume& fixed_;
    const RegistrationOptions& opts_;
};

SolveReport solve_level(const LevelProblem& problem, VectorField& z, const RegistrationOptions& opts) {
    SolveReport report;
    auto current = problem.evaluate(z);
    report.history.push_back(current.objective);
    double step = opts.step;
    int it = 0;
    while (it < opts.iterations) {
        const std::vector<double> dir = problem.direction(z, current);
        double peak = 0.0;
        for (std::size_t idx = 0; idx < z.voxels(); ++idx)
            peak = std::max(peak, std::sqrt(dir[3 * idx] * dir[3 * idx] + dir[3 * idx + 1] * dir[3 * idx + 1] +
                                            dir[3 * idx + 2] * dir[3 * idx + 2]));
        if (!(peak > 0.0)) {
            report.converged = true;
            break;
        }
        // Limit the largest velocity change to max_update voxels.
        step = std::min(step, opts.max_update / peak);

        bool accepted = false;
        VectorField trial = z;
        for (int h = 0; h <= 20; ++h) {
            for (std::size_t i = 0; i < dir.size(); ++i) trial.data()[i] = z.data()[i] - step * dir[i];
            auto candidate = problem.evaluate(trial);
            if (candidate.objective < current.objective) {
                z = std::move(trial);
                current = std::move(candidate);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            report.converged = true;
            break;
        }
        ++it;
        report.history.push_back(current.objective);
        step *= 1.5;
        if (it >= opts.window) {
            const double before = report.history[report.history.size() - 1 - opts.window];
            if (before > 0.0 && (before - current.objective) / before < opts.tolerance) {
                report.converged = true;
                break;
            }
        }
    }
    report.iterations = it;
    report.final_value = current.objective;
    return report;
}

}  // namespace

RegistrationResult register_images(const ScalarVolume& moving, const ScalarVolume& fixed,
                                   const RegistrationOptions& opts) {
    opts.validate();
    require_same_grid(fixed.grid(), moving.grid(), "register");
    require_finite(moving, "moving image");
    require_finite(fixed, "fixed image");

    RegistrationResult result;
    RegistrationReport& report = result.report;
    const ScalarVolume m0 = normalize_intensity(moving, &report.moving_normalization);
    const ScalarVolume f0 = normalize_intensity(fixed, &report.fixed_normalization);
    report.initial_ssd = ssd_value(m0, f0);

    // Build the pyramid, stopping before any axis drops below 8 voxels.
    std::vector<ScalarVolume> movings{m0}, fixeds{f0};
    while (static_cast<int>(movings.size()) < opts.levels) {
        const Grid3& g = movings.back().grid();
        if (std::min({g.nx(), g.ny(), g.nz()}) < 16) break;
        movings.push_back(downsample(movings.back()));
        fixeds.push_back(downsample(fixeds.back()));
    }

    VectorField z;
    for (std::size_t level = movings.size(); level-- > 0;) {
        const Grid3& g = movings[level].grid();
        z = z.data().empty() ? VectorField(g, FieldKind::velocity) : upsample_vectors(z, g);
        z.set_kind(FieldKind::velocity);
        const LevelProblem problem(movings[level], fixeds[level], opts);
        LevelReport lr{g, solve_level(problem, z, opts)};
        report.levels.push_back(std::move(lr));
    }

    result.phi = exponentiate(z, opts.svf_steps);
    report.final_ssd = ssd_value(warp(m0, result.phi), f0);
    result.velocity = std::move(z);
    return result;
}

}  // namespace diffeo
