#include <filesystem>
#include <fstream>
#include <memory>

#include "app.hpp"
#include "diffeo/atlas.hpp"
#include "diffeo/average.hpp"
#include "diffeo/diffgeo.hpp"
#include "diffeo/registration.hpp"

namespace diffeo::cli {

namespace {

void add_solve_options(CLI::App* sub, SolveOptions& s, const std::string& prefix) {
    sub->add_option("--" + prefix + "max-iters", s.max_iters, "Solver iteration cap")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--" + prefix + "step", s.step, "Initial gradient step")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--" + prefix + "sigma", s.sigma, "Gradient smoothing, voxels")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--" + prefix + "tol", s.tolerance, "Relative decrease over the window that stops the solver")
        ->capture_default_str();
    sub->add_option("--" + prefix + "curl-weight", s.curl_weight, "Weight of the curl residual")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
}

void add_registration_options(CLI::App* sub, RegistrationOptions& r) {
    sub->add_option("--levels", r.levels, "Pyramid levels")->capture_default_str()->check(CLI::Range(1, 5));
    sub->add_option("--iters", r.iterations, "Iterations per level")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--step", r.step, "Initial step")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--sigma", r.sigma, "Update smoothing, voxels")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--svf-steps", r.svf_steps, "Squaring steps")->capture_default_str()->check(CLI::Range(1, 12));
    sub->add_option("--reg", r.regularization, "Weight of mean |grad z|^2")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--max-update", r.max_update, "Largest velocity change per iteration, voxels")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol", r.tolerance, "Per-level relative decrease stopping threshold")->capture_default_str();
}

json residuals_json(const MonitorFunctional::Residuals& r) {
    return {{"jacobian_relative", r.jacobian_relative}, {"curl_relative", r.curl_relative}};
}

MonitorPair read_monitor(const std::string& jd_path, const std::string& curl_path) {
    MonitorPair m;
    m.f0 = read_volume(jd_path);
    m.f0.set_kind(VolumeKind::jacobian);
    m.g0 = read_field(curl_path);
    m.g0.set_kind(FieldKind::curl);
    require_same_grid(m.f0.grid(), m.g0.grid(), "monitor pair");
    return m;
}

void add_reconstruct(CLI::App& app, Registry& reg, const Context& ctx) {
    struct Opts {
        std::string jd, curl, from, out, report;
        SolveOptions solve;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("reconstruct", "Transformation from a prescribed Jacobian determinant and curl");
    auto* jd = sub->add_option("--jd", o->jd, "Prescribed Jacobian volume f0");
    auto* cv = sub->add_option("--curl", o->curl, "Prescribed curl field g0");
    auto* from = sub->add_option("--from", o->from, "Measure f0 and g0 from this field instead");
    jd->needs(cv);
    cv->needs(jd);
    from->excludes(jd)->excludes(cv);
    sub->add_option("--out", o->out, "Output transformation")->required();
    sub->add_option("--report", o->report, "Write the JSON report here");
    add_solve_options(sub, o->solve, "");
    reg["reconstruct"] = [o, &ctx] {
        MonitorPair m;
        if (!o->from.empty()) {
            const VectorField phi = read_field(o->from);
            m = {jacobian_determinant(phi), curl(phi)};
        } else if (!o->jd.empty()) {
            m = read_monitor(o->jd, o->curl);
        } else {
            throw InvalidArgument("reconstruct needs --jd and --curl, or --from");
        }
        const auto result = reconstruct(m, o->solve);
        write_field(result.phi, o->out, ctx.write_options());
        json r = {{"command", "reconstruct"},
                  {"grid", grid_json(m.grid())},
                  {"output", o->out},
                  {"solve", solve_report_json(result.report)},
                  {"residuals", residuals_json(monitor_residuals(m, result.phi))},
                  {"negative_jacobian_fraction", negative_jacobian_fraction(jacobian_determinant(result.phi))}};
        write_report(r, o->report);
        return r;
    };
}

void add_register(CLI::App& app, Registry& reg, const Context& ctx) {
    struct Opts {
        std::string moving, fixed, velocity, phi, warped, report;
        RegistrationOptions reg;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("register", "SSD registration of a moving volume onto a fixed one");
    sub->add_option("--moving", o->moving, "Moving volume")->required();
    sub->add_option("--fixed", o->fixed, "Fixed volume")->required();
    sub->add_option("--out-velocity", o->velocity, "Output velocity field z");
    sub->add_option("--out-phi", o->phi, "Output transformation exp(z)");
    sub->add_option("--out-warped", o->warped, "Output moving volume warped onto the fixed one");
    sub->add_option("--report", o->report, "Write the JSON report here");
    add_registration_options(sub, o->reg);
    reg["register"] = [o, &ctx] {
        const ScalarVolume moving = read_volume(o->moving);
        const ScalarVolume fixed = read_volume(o->fixed);
        const auto result = register_images(moving, fixed, o->reg);
        const auto w = ctx.write_options();
        if (!o->velocity.empty()) write_field(result.velocity, o->velocity, w);
        if (!o->phi.empty()) write_field(result.phi, o->phi, w);
        if (!o->warped.empty()) write_volume(warp(moving, result.phi), o->warped, w);

        const auto& rep = result.report;
        json levels = json::array();
        for (const auto& lv : rep.levels) {
            json l = solve_report_json(lv.solve);
            l["grid"] = grid_json(lv.grid);
            levels.push_back(std::move(l));
        }
        double zmax = 0.0;
        for (std::size_t idx = 0; idx < result.velocity.voxels(); ++idx)
            zmax = std::max(zmax, norm(result.velocity.get(idx)));
        json r = {{"command", "register"},
                  {"grid", grid_json(fixed.grid())},
                  {"initial_ssd", rep.initial_ssd},
                  {"final_ssd", rep.final_ssd},
                  {"ssd_reduction", rep.initial_ssd > 0.0 ? 1.0 - rep.final_ssd / rep.initial_ssd : 0.0},
                  {"velocity_max", zmax},
                  {"mean_displacement", mean_displacement(result.phi)},
                  {"negative_jacobian_fraction", negative_jacobian_fraction(jacobian_determinant(result.phi))},
                  {"moving_normalization", {{"mean", rep.moving_normalization.mean}, {"stddev", rep.moving_normalization.stddev}}},
                  {"fixed_normalization", {{"mean", rep.fixed_normalization.mean}, {"stddev", rep.fixed_normalization.stddev}}},
                  {"levels", levels}};
        write_report(r, o->report);
        return r;
    };
}

void add_average(CLI::App& app, Registry& reg, const Context& ctx) {
    struct Opts {
        std::vector<std::string> in;
        std::string out, report;
        SolveOptions solve;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("average", "Average transformations through their Jacobian and curl");
    sub->add_option("--in", o->in, "Input fields")->required()->expected(1, -1);
    sub->add_option("--out", o->out, "Output transformation")->required();
    sub->add_option("--report", o->report, "Write the JSON report here");
    add_solve_options(sub, o->solve, "");
    reg["average"] = [o, &ctx] {
        std::vector<VectorField> phis;
        for (const auto& p : o->in) phis.push_back(read_field(p));
        const MonitorPair m = average_monitor(phis);
        const auto result = reconstruct(m, o->solve);
        write_field(result.phi, o->out, ctx.write_options());
        json r = {{"command", "average"},
                  {"grid", grid_json(m.grid())},
                  {"inputs", o->in.size()},
                  {"output", o->out},
                  {"solve", solve_report_json(result.report)},
                  {"residuals", residuals_json(monitor_residuals(m, result.phi))},
                  {"mean_displacement", mean_displacement(result.phi)}};
        write_report(r, o->report);
        return r;
    };
}

void add_atlas(CLI::App& app, Registry& reg, const Context& ctx) {
    struct Opts {
        std::vector<std::string> subjects;
        std::string out, cumulative, fields_dir, report;
        int single = -1;
        AtlasOptions atlas;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("atlas", "Unbiased template from a set of subject volumes");
    sub->add_option("--subjects", o->subjects, "Subject volumes")->required()->expected(2, -1);
    sub->add_option("--out", o->out, "Output atlas volume")->required();
    sub->add_option("--out-cumulative", o->cumulative, "Output transformation taking the chosen subject to the atlas");
    sub->add_option("--fields-dir", o->fields_dir, "Write every per-iteration average transformation here");
    sub->add_option("--report", o->report, "Write the JSON report here");
    sub->add_option("--epsilon", o->atlas.epsilon, "Convergence threshold, mean voxels")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-iters", o->atlas.max_outer_iters, "Outer iterations")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--single-candidate", o->single, "Only iterate this subject (0-based index)")
        ->check(CLI::NonNegativeNumber);
    add_registration_options(sub, o->atlas.registration);
    add_solve_options(sub, o->atlas.solve, "solve-");
    reg["atlas"] = [o, &ctx] {
        std::vector<ScalarVolume> subjects;
        for (const auto& p : o->subjects) subjects.push_back(read_volume(p));
        AtlasOptions opts = o->atlas;
        if (o->single >= 0) opts.single_candidate = static_cast<std::size_t>(o->single);
        opts.keep_fields = !o->fields_dir.empty();
        const auto result = build_atlas(subjects, opts);
        const auto w = ctx.write_options();
        write_volume(result.atlas, o->out, w);
        if (!o->cumulative.empty()) write_field(result.cumulative, o->cumulative, w);
        if (opts.keep_fields) {
            std::filesystem::create_directories(o->fields_dir);
            for (std::size_t t = 0; t < result.fields.size(); ++t)
                for (std::size_t c = 0; c < result.fields[t].size(); ++c)
                    write_field(result.fields[t][c],
                                std::filesystem::path(o->fields_dir) /
                                    ("iter" + std::to_string(t + 1) + "_subject" +
                                     std::to_string(result.report.candidates[c]) + ".nii.gz"),
                                w);
        }
        const auto& rep = result.report;
        json r = {{"command", "atlas"},
                  {"grid", grid_json(result.atlas.grid())},
                  {"output", o->out},
                  {"iterations", rep.iterations},
                  {"converged", rep.converged},
                  {"chosen", rep.chosen},
                  {"candidates", rep.candidates},
                  {"deviations", rep.deviations},
                  {"max_deviation", rep.max_deviation},
                  {"self_displacement", rep.self_displacement}};
        write_report(r, o->report);
        return r;
    };
}

}  // namespace

void write_report(const json& report, const std::string& path) {
    if (path.empty()) return;
    std::ofstream out(path);
    out << report.dump(2) << '\n';
    if (!out) throw IoError("cannot write report " + path);
}

void add_solver_commands(CLI::App& app, Registry& reg, const Context& ctx) {
    add_reconstruct(app, reg, ctx);
    add_register(app, reg, ctx);
    add_average(app, reg, ctx);
    add_atlas(app, reg, ctx);
}

}  // namespace diffeo::cli
