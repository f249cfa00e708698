#include "diffeo/varsolve.hpp"

#include <cmath>
#include <sstream>

#include "diffeo/diffgeo.hpp"
#include "diffeo/filters.hpp"
#include "diffeo/parallel.hpp"

namespace diffeo {

std::string MonitorPair::validate() const {
    require_same_grid(f0.grid(), g0.grid(), "monitor pair");
    if (g0.kind() != FieldKind::curl)
        throw InvalidArgument("monitor g0 must be a curl field");
    double total = 0.0;
    for (double v : f0.data()) {
        if (!(v > 0.0)) throw InvalidArgument("prescribed Jacobian f0 must be positive everywhere");
        total += v;
    }
    for (double v : g0.data())
        if (!std::isfinite(v)) throw InvalidArgument("prescribed curl g0 holds non-finite values");
    const double mean = total / static_cast<double>(f0.size());
    if (mean < 0.2 || mean > 5.0) {
        std::ostringstream os;
        os << "mean prescribed Jacobian " << mean << " is far from 1; the monitor may not be "
           << "realisable on a fixed domain";
        return os.str();
    }
    return {};
}

MonitorFunctional::MonitorFunctional(const MonitorPair& monitor, double curl_weight)
    : monitor_(monitor), curl_weight_(curl_weight) {
    require_same_grid(monitor_.f0.grid(), monitor_.g0.grid(), "monitor pair");
}

namespace {

Mat3 displacement_jacobian(const Grid3& g, std::span<const double> u, std::size_t idx) {
    Mat3 m{};
    for (int c = 0; c < 3; ++c)
        for (int a = 0; a < 3; ++a) m[c][a] = partial(g, u, 3, c, a, idx);
    for (int c = 0; c < 3; ++c) m[c][c] += 1.0;
    return m;
}

Vec3 displacement_curl(const Grid3& g, std::span<const double> u, std::size_t idx) {
    auto D = [&](int c, int a) { return partial(g, u, 3, c, a, idx); };
    return {D(2, 1) - D(1, 2), D(0, 2) - D(2, 0), D(1, 0) - D(0, 1)};
}

}  // namespace

double MonitorFunctional::value(const std::vector<double>& u) const {
    const Grid3& g = grid();
    const std::span<const double> us(u);
    const double total = parallel_sum(g.size(), [&](std::size_t idx) {
        const double r = determinant(displacement_jacobian(g, us, idx)) - monitor_.f0[idx];
        const Vec3 s = displacement_curl(g, us, idx) - monitor_.g0.get(idx);
        return r * r + curl_weight_ * (s.x * s.x + s.y * s.y + s.z * s.z);
    });
    return 0.5 * total / static_cast<double>(g.size());
}

std::vector<double> MonitorFunctional::gradient(const std::vector<double>& u) const {
    const Grid3& g = grid();
    const std::size_t n = g.size();
    const std::span<const double> us(u);

    // weighted[c][a] = (J − f0) · cof[c][a]; s[c] = curl_c − g0_c.
    std::vector<std::vector<double>> weighted(9, std::vector<double>(n));
    std::vector<std::vector<double>> s(3, std::vector<double>(n));
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t idx = b; idx < e; ++idx) {
            const Mat3 m = displacement_jacobian(g, us, idx);
            const double r = determinant(m) - monitor_.f0[idx];
            const Mat3 cof = cofactor(m);
            for (int c = 0; c < 3; ++c)
                for (int a = 0; a < 3; ++a) weighted[3 * c + a][idx] = r * cof[c][a];
            const Vec3 cv = displacement_curl(g, us, idx) - monitor_.g0.get(idx);
            for (int c = 0; c < 3; ++c) s[c][idx] = cv[c];
        }
    });

    const double inv_n = 1.0 / static_cast<double>(n);
    const double lam = curl_weight_ * inv_n;
    std::vector<double> grad(3 * n, 0.0);
    const std::span<double> gs(grad);
    for (int c = 0; c < 3; ++c)
        for (int a = 0; a < 3; ++a) add_partial_transpose(g, weighted[3 * c + a], a, inv_n, gs, 3, c);
    // curl_x = D_y u_z − D_z u_y, curl_y = D_z u_x − D_x u_z, curl_z = D_x u_y − D_y u_x.
    add_partial_transpose(g, s[1], 2, lam, gs, 3, 0);
    add_partial_transpose(g, s[2], 1, -lam, gs, 3, 0);
    add_partial_transpose(g, s[2], 0, lam, gs, 3, 1);
    add_partial_transpose(g, s[0], 2, -lam, gs, 3, 1);
    add_partial_transpose(g, s[0], 1, lam, gs, 3, 2);
    add_partial_transpose(g, s[1], 0, -lam, gs, 3, 2);
    return grad;
}

MonitorFunctional::Residuals MonitorFunctional::residuals(const std::vector<double>& u) const {
    const Grid3& g = grid();
    const std::span<const double> us(u);
    const std::size_t n = g.size();
    const double jr = parallel_sum(n, [&](std::size_t idx) {
        const double r = determinant(displacement_jacobian(g, us, idx)) - monitor_.f0[idx];
        return r * r;
    });
    const double jf = parallel_sum(n, [&](std::size_t idx) { return monitor_.f0[idx] * monitor_.f0[idx]; });
    const double cr = parallel_sum(n, [&](std::size_t idx) {
        const Vec3 s = displacement_curl(g, us, idx) - monitor_.g0.get(idx);
        return s.x * s.x + s.y * s.y + s.z * s.z;
    });
    const double cg = parallel_sum(n, [&](std::size_t idx) {
        const Vec3 v = monitor_.g0.get(idx);
        return v.x * v.x + v.y * v.y + v.z * v.z;
    });
    Residuals out;
    out.jacobian_relative = std::sqrt(jr / jf);
    out.curl_relative = cg > 0.0 ? std::sqrt(cr / cg) : std::sqrt(cr / static_cast<double>(n));
    return out;
}

namespace {

void zero_boundary(const Grid3& g, std::vector<double>& v) {
    for (std::size_t k = 0; k < g.nz(); ++k)
        for (std::size_t j = 0; j < g.ny(); ++j)
            for (std::size_t i = 0; i < g.nx(); ++i)
                if (g.on_boundary(i, j, k)) {
                    const std::size_t idx = g.index(i, j, k);
                    v[3 * idx] = v[3 * idx + 1] = v[3 * idx + 2] = 0.0;
                }
}

}  // namespace

ReconstructResult reconstruct(const MonitorPair& monitor, const SolveOptions& opts) {
    if (opts.max_iters < 0 || !(opts.step > 0.0) || opts.sigma < 0.0 || opts.window < 1 ||
        opts.max_halvings < 0 || opts.curl_weight < 0.0)
        throw InvalidArgument("invalid solver options");
    SolveReport report;
    if (auto warning = monitor.validate(); !warning.empty()) report.warnings.push_back(warning);

    const Grid3& g = monitor.grid();
    const MonitorFunctional functional(monitor, opts.curl_weight);
    std::vector<double> u(3 * g.size(), 0.0);
    double value = functional.value(u);
    report.history.push_back(value);

    const double n = static_cast<double>(g.size());
    double step = opts.step;
    bool converged = value <= opts.functional_floor;
    int it = 0;
    while (!converged && it < opts.max_iters) {
        // Per-voxel scaling (N ∇F) keeps the step size independent of the grid size.
        std::vector<double> dir = functional.gradient(u);
        for (double& v : dir) v *= n;
        zero_boundary(g, dir);
        gaussian_smooth_inplace(g, dir, 3, opts.sigma);
        zero_boundary(g, dir);

        bool accepted = false;
        std::vector<double> trial(u.size());
        for (int h = 0; h <= opts.max_halvings; ++h) {
            for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] - step * dir[i];
            const double candidate = functional.value(trial);
            if (candidate < value) {
                u.swap(trial);
                value = candidate;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No descent left at machine precision: a stationary point.
            converged = true;
            break;
        }
        ++it;
        report.history.push_back(value);
        step = std::min(2.0 * step, opts.step);

        if (value <= opts.functional_floor) converged = true;
        if (it >= opts.window) {
            const double before = report.history[report.history.size() - 1 - opts.window];
            if (before > 0.0 && (before - value) / before < opts.tolerance) converged = true;
        }
    }

    report.iterations = it;
    report.final_value = value;
    report.converged = converged;
    VectorField disp(g, std::move(u), FieldKind::displacement);
    return {to_transformation(disp), std::move(report)};
}

MonitorFunctional::Residuals monitor_residuals(const MonitorPair& monitor, const VectorField& phi) {
    require_same_grid(monitor.grid(), phi.grid(), "monitor residuals");
    const MonitorFunctional functional(monitor);
    return functional.residuals(to_displacement(phi).data());
}

}  // namespace diffeo
