#include <memory>

#include "app.hpp"
#include "diffeo/diffgeo.hpp"
#include "diffeo/svf.hpp"

namespace diffeo::cli {

namespace {

json volume_stats(const ScalarVolume& v) {
    double lo = v[0], hi = v[0], sum = 0.0;
    for (double x : v.data()) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
        sum += x;
    }
    return {{"min", lo}, {"max", hi}, {"mean", sum / static_cast<double>(v.size())}};
}

void add_jd(CLI::App& app, Registry& reg, const Context& ctx) {
    struct Opts {
        std::string in, out;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("jd", "Jacobian determinant of a transformation or displacement");
    sub->add_option("--in", o->in, "Input field")->required();
    sub->add_option("--out", o->out, "Output Jacobian volume")->required();
    reg["jd"] = [o, &ctx] {
        const VectorField phi = read_field(o->in);
        const ScalarVolume jd = jacobian_determinant(phi);
        write_volume(jd, o->out, ctx.write_options());
        json r = {{"command", "jd"}, {"grid", grid_json(jd.grid())}, {"output", o->out}};
        r["stats"] = volume_stats(jd);
        r["negative_fraction"] = negative_jacobian_fraction(jd);
        return r;
    };
}

void add_curl(CLI::App& app, Registry& reg, const Context& ctx) {
    struct Opts {
        std::string in, out;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("curl", "Curl of a transformation or displacement");
    sub->add_option("--in", o->in, "Input field")->required();
    sub->add_option("--out", o->out, "Output curl field")->required();
    reg["curl"] = [o, &ctx] {
        const VectorField cv = curl(read_field(o->in));
        write_field(cv, o->out, ctx.write_options());
        double peak = 0.0, sum = 0.0;
        for (std::size_t idx = 0; idx < cv.voxels(); ++idx) {
            const double m = norm(cv.get(idx));
            peak = std::max(peak, m);
            sum += m;
        }
        return json{{"command", "curl"},
                    {"grid", grid_json(cv.grid())},
                    {"output", o->out},
                    {"max_magnitude", peak},
                    {"mean_magnitude", sum / static_cast<double>(cv.voxels())}};
    };
}

void add_negjac(CLI::App& app, Registry& reg, const Context&) {
    struct Opts {
        std::string field, jd, mask;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("negjac", "Fraction of voxels with non-positive Jacobian determinant");
    auto* f = sub->add_option("--in", o->field, "Input field");
    auto* j = sub->add_option("--jd", o->jd, "Precomputed Jacobian volume instead of a field");
    f->excludes(j);
    sub->add_option("--mask", o->mask, "Label volume; non-zero voxels are counted");
    reg["negjac"] = [o] {
        if (o->field.empty() == o->jd.empty()) throw InvalidArgument("negjac needs exactly one of --in or --jd");
        const ScalarVolume jd = o->field.empty() ? read_volume(o->jd) : jacobian_determinant(read_field(o->field));
        std::optional<ScalarVolume> mask;
        if (!o->mask.empty()) mask = read_volume(o->mask);
        const double fraction = negative_jacobian_fraction(jd, mask);
        std::size_t counted = 0, negative = 0;
        for (std::size_t i = 0; i < jd.size(); ++i)
            if (!mask || (*mask)[i] != 0.0) {
                ++counted;
                if (jd[i] <= 0.0) ++negative;
            }
        return json{{"command", "negjac"},
                    {"fraction", fraction},
                    {"percent", 100.0 * fraction},
                    {"negative_voxels", negative},
                    {"counted_voxels", counted}};
    };
}

void add_exp(CLI::App& app, Registry& reg, const Context& ctx) {
    struct Opts {
        std::string in, out;
        int steps = kDefaultSquaringSteps;
        bool inverse = false;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("exp", "Exponentiate a stationary velocity field");
    sub->add_option("--in", o->in, "Velocity field")->required();
    sub->add_option("--out", o->out, "Output transformation")->required();
    sub->add_option("--steps", o->steps, "Squaring steps")->capture_default_str()->check(CLI::Range(1, 12));
    sub->add_flag("--inverse", o->inverse, "Compute exp(-z)");
    reg["exp"] = [o, &ctx] {
        VectorField z = read_field(o->in);
        if (z.kind() == FieldKind::displacement) z.set_kind(FieldKind::velocity);
        const VectorField phi = o->inverse ? exponentiate_inverse(z, o->steps) : exponentiate(z, o->steps);
        write_field(phi, o->out, ctx.write_options());
        const ScalarVolume jd = jacobian_determinant(phi);
        return json{{"command", "exp"},
                    {"grid", grid_json(phi.grid())},
                    {"output", o->out},
                    {"steps", o->steps},
                    {"inverse", o->inverse},
                    {"max_displacement", max_displacement(phi)},
                    {"mean_displacement", mean_displacement(phi)},
                    {"negative_jacobian_fraction", negative_jacobian_fraction(jd)}};
    };
}

void add_warp(CLI::App& app, Registry& reg, const Context& ctx) {
    struct Opts {
        std::string in, field, out;
        bool nearest = false;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("warp", "Resample a volume through a transformation: out(p) = in(phi(p))");
    sub->add_option("--in", o->in, "Input volume")->required();
    sub->add_option("--field", o->field, "Transformation or displacement")->required();
    sub->add_option("--out", o->out, "Output volume")->required();
    sub->add_flag("--nearest", o->nearest, "Treat the input as labels (nearest neighbour)");
    reg["warp"] = [o, &ctx] {
        ScalarVolume vol = read_volume(o->in);
        if (o->nearest) vol.set_kind(VolumeKind::label);
        const ScalarVolume out = warp(vol, read_field(o->field));
        write_volume(out, o->out, ctx.write_options());
        return json{{"command", "warp"},
                    {"grid", grid_json(out.grid())},
                    {"output", o->out},
                    {"interpolation", out.kind() == VolumeKind::label ? "nearest" : "trilinear"}};
    };
}

void add_compose(CLI::App& app, Registry& reg, const Context& ctx) {
    struct Opts {
        std::string outer, inner, out;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("compose", "Compose two transformations: out(p) = outer(inner(p))");
    sub->add_option("--outer", o->outer, "Applied second")->required();
    sub->add_option("--inner", o->inner, "Applied first")->required();
    sub->add_option("--out", o->out, "Output transformation")->required();
    reg["compose"] = [o, &ctx] {
        const VectorField phi = compose(read_field(o->outer), read_field(o->inner));
        write_field(phi, o->out, ctx.write_options());
        return json{{"command", "compose"},
                    {"grid", grid_json(phi.grid())},
                    {"output", o->out},
                    {"max_displacement", max_displacement(phi)}};
    };
}

}  // namespace

json grid_json(const Grid3& g) {
    return {{"dims", {g.nx(), g.ny(), g.nz()}}, {"spacing", {g.sx(), g.sy(), g.sz()}}};
}

json solve_report_json(const SolveReport& r) {
    return {{"iterations", r.iterations},
            {"final_value", r.final_value},
            {"converged", r.converged},
            {"history", r.history},
            {"warnings", r.warnings}};
}

void add_field_commands(CLI::App& app, Registry& reg, const Context& ctx) {
    add_jd(app, reg, ctx);
    add_curl(app, reg, ctx);
    add_negjac(app, reg, ctx);
    add_exp(app, reg, ctx);
    add_warp(app, reg, ctx);
    add_compose(app, reg, ctx);
}

}  // namespace diffeo::cli
