#include <cmath>
#include <memory>
#include <optional>

#include "app.hpp"
#include "diffeo/features.hpp"
#include "diffeo/metrics.hpp"
#include "diffeo/synth.hpp"
#include "png_writer.hpp"

namespace diffeo::cli {

namespace {

ScalarVolume read_labels(const std::string& path) {
    ScalarVolume v = read_volume(path);
    v.set_kind(VolumeKind::label);
    return v;
}

void add_dice(CLI::App& app, Registry& reg, const Context&) {
    struct Opts {
        std::string a, b;
        std::optional<long> label;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("dice", "Dice overlap of two label volumes");
    sub->add_option("--a", o->a, "First label volume")->required();
    sub->add_option("--b", o->b, "Second label volume")->required();
    sub->add_option("--label", o->label, "Only this label (default: every non-zero label)");
    reg["dice"] = [o] {
        const ScalarVolume a = read_labels(o->a), b = read_labels(o->b);
        if (o->label) {
            const auto d = dice(a, b, *o->label);
            return json{{"command", "dice"},
                        {"label", *o->label},
                        {"dice", d.value},
                        {"intersection", d.intersection},
                        {"size_a", d.size_a},
                        {"size_b", d.size_b},
                        {"both_empty", d.both_empty}};
        }
        const auto m = dice_multilabel(a, b);
        json per = json::object();
        for (const auto& [label, value] : m.per_label) per[std::to_string(label)] = value;
        return json{{"command", "dice"}, {"mean", m.mean}, {"labels", m.per_label.size()}, {"per_label", per}};
    };
}

void add_ssd(CLI::App& app, Registry& reg, const Context&) {
    struct Opts {
        std::string a, b;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("ssd", "Half mean squared intensity difference");
    sub->add_option("--a", o->a, "First volume")->required();
    sub->add_option("--b", o->b, "Second volume")->required();
    reg["ssd"] = [o] {
        return json{{"command", "ssd"}, {"ssd", ssd_value(read_volume(o->a), read_volume(o->b))}};
    };
}

void add_features(CLI::App& app, Registry& reg, const Context& ctx) {
    struct Opts {
        std::string image, out, mode = "moving";
        std::vector<std::string> fields;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("features", "Five-channel image + Jacobian + curl feature stack");
    sub->add_option("--image", o->image, "Intensity volume")->required();
    sub->add_option("--field", o->fields, "Transformation(s); one for moving, one or more for fixed")
        ->required()
        ->expected(1, -1);
    sub->add_option("--mode", o->mode, "moving: JD/curl of the field; fixed: mean over the fields")
        ->capture_default_str()
        ->check(CLI::IsMember({"moving", "fixed"}));
    sub->add_option("--out", o->out, "Output 4-D NIfTI; a .json sidecar is written next to it")->required();
    reg["features"] = [o, &ctx] {
        const ScalarVolume image = read_volume(o->image);
        std::vector<VectorField> phis;
        for (const auto& p : o->fields) phis.push_back(read_field(p));
        FeatureStack stack;
        if (o->mode == "moving") {
            if (phis.size() != 1) throw InvalidArgument("moving features take exactly one --field");
            stack = moving_stack(image, phis.front());
        } else {
            stack = fixed_stack(image, phis);
        }
        const auto sidecar = export_stack(stack, o->out, ctx.write_options());
        return json{{"command", "features"},
                    {"mode", o->mode},
                    {"grid", grid_json(stack.grid)},
                    {"output", o->out},
                    {"sidecar", sidecar.string()},
                    {"channels", stack.channel_names}};
    };
}

Grid3 grid_from_dims(const std::vector<std::size_t>& dims) {
    if (dims.size() == 1) return Grid3(dims[0], dims[0], dims[0]);
    if (dims.size() == 3) return Grid3(dims[0], dims[1], dims[2]);
    throw InvalidArgument("--dims takes one or three sizes");
}

void add_synth(CLI::App& app, Registry& reg, const Context& ctx) {
    struct Opts {
        std::string kind, out;
        std::vector<std::size_t> dims{32};
        double amp = 1.5;
        std::uint64_t seed = 0;
        double sigma = kSynthVelocitySigma;
        double taper = 0.0;
        std::optional<double> radius;
        std::vector<double> shift{0.0, 0.0, 0.0};
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("synth", "Deterministic synthetic volumes and fields");
    sub->add_option("--kind", o->kind, "svf | phantom | ball-mask | translation")
        ->required()
        ->check(CLI::IsMember({"svf", "phantom", "ball-mask", "translation"}));
    sub->add_option("--out", o->out, "Output file")->required();
    sub->add_option("--dims", o->dims, "Grid size: n or nx,ny,nz")->delimiter(',')->expected(1, 3)->capture_default_str();
    sub->add_option("--amp", o->amp, "svf: largest velocity magnitude, voxels")->capture_default_str();
    sub->add_option("--seed", o->seed, "svf, phantom: random seed")->capture_default_str();
    sub->add_option("--sigma", o->sigma, "svf: noise smoothing, voxels")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--taper", o->taper, "svf: fade to zero over this many voxels at the faces")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--radius", o->radius, "ball-mask: radius in voxels (default a quarter of the smallest axis)");
    sub->add_option("--shift", o->shift, "translation: shift vector")->delimiter(',')->expected(3);
    reg["synth"] = [o, &ctx] {
        const Grid3 g = grid_from_dims(o->dims);
        const auto w = ctx.write_options();
        json r = {{"command", "synth"}, {"kind", o->kind}, {"grid", grid_json(g)}, {"output", o->out}};
        if (o->kind == "svf") {
            write_field(random_velocity(g, o->amp, o->seed, o->sigma, o->taper), o->out, w);
            r["amp"] = o->amp;
            r["seed"] = o->seed;
        } else if (o->kind == "phantom") {
            write_volume(phantom(g, o->seed), o->out, w);
            r["seed"] = o->seed;
        } else if (o->kind == "ball-mask") {
            const double radius =
                o->radius.value_or(0.25 * static_cast<double>(std::min({g.nx(), g.ny(), g.nz()})));
            const ScalarVolume ball = ball_mask(g, radius);
            write_volume(ball, o->out, w);
            std::size_t count = 0;
            for (double v : ball.data()) count += v != 0.0;
            r["radius"] = radius;
            r["voxels"] = count;
        } else {
            write_field(translation(g, {o->shift[0], o->shift[1], o->shift[2]}), o->out, w);
            r["shift"] = o->shift;
        }
        return r;
    };
}

std::uint8_t to_byte(double v, double lo, double hi) {
    if (!(hi > lo)) return 0;
    return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp((v - lo) / (hi - lo), 0.0, 1.0)));
}

void add_slice(CLI::App& app, Registry& reg, const Context&) {
    struct Opts {
        std::string in, out, axis = "z";
        std::optional<std::size_t> index;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("slice", "Export one slice as PNG (grayscale, or RGB for vector fields)");
    sub->add_option("--in", o->in, "Volume or vector field")->required();
    sub->add_option("--out", o->out, "Output PNG")->required();
    sub->add_option("--axis", o->axis, "Slice normal")->capture_default_str()->check(CLI::IsMember({"x", "y", "z"}));
    sub->add_option("--index", o->index, "Slice index along the axis (default: middle)");
    reg["slice"] = [o] {
        const NiftiImage probe = read_nifti(o->in);
        const bool vector = probe.header.dims.size() >= 5 && probe.header.dims[4] == 3;
        const int normal = o->axis == "x" ? 0 : (o->axis == "y" ? 1 : 2);
        // In-plane axes: columns then rows.
        const int col_axis = normal == 0 ? 1 : 0;
        const int row_axis = normal == 2 ? 1 : 2;

        std::vector<ScalarVolume> channels;
        if (vector) {
            VectorField f = read_field(o->in);
            if (f.kind() == FieldKind::transformation) f = to_displacement(f);
            for (int c = 0; c < 3; ++c) channels.push_back(f.component(c));
        } else {
            channels.push_back(read_volume(o->in));
        }
        const Grid3& g = channels.front().grid();
        const std::size_t index = o->index.value_or(g.dim(normal) / 2);
        if (index >= g.dim(normal))
            throw InvalidArgument("slice index " + std::to_string(index) + " is outside the volume");

        const std::size_t width = g.dim(col_axis), height = g.dim(row_axis);
        auto voxel = [&](std::size_t col, std::size_t row) {
            std::size_t ijk[3];
            ijk[normal] = index;
            ijk[col_axis] = col;
            ijk[row_axis] = row;
            return g.index(ijk[0], ijk[1], ijk[2]);
        };
        const int nc = static_cast<int>(channels.size());
        std::vector<std::uint8_t> pixels(width * height * nc);
        json ranges = json::array();
        for (int c = 0; c < nc; ++c) {
            double lo = INFINITY, hi = -INFINITY;
            for (std::size_t row = 0; row < height; ++row)
                for (std::size_t col = 0; col < width; ++col) {
                    const double v = channels[c][voxel(col, row)];
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            // Rows run top to bottom with the row axis increasing upwards.
            for (std::size_t row = 0; row < height; ++row)
                for (std::size_t col = 0; col < width; ++col)
                    pixels[((height - 1 - row) * width + col) * nc + c] =
                        to_byte(channels[c][voxel(col, row)], lo, hi);
            ranges.push_back({lo, hi});
        }
        write_png(o->out, width, height, nc, pixels);
        return json{{"command", "slice"},
                    {"output", o->out},
                    {"axis", o->axis},
                    {"index", index},
                    {"width", width},
                    {"height", height},
                    {"mode", vector ? "rgb" : "gray"},
                    {"ranges", ranges}};
    };
}

}  // namespace

void add_misc_commands(CLI::App& app, Registry& reg, const Context& ctx) {
    add_dice(app, reg, ctx);
    add_ssd(app, reg, ctx);
    add_features(app, reg, ctx);
    add_synth(app, reg, ctx);
    add_slice(app, reg, ctx);
}

}  // namespace diffeo::cli
