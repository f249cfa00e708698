#include "diffeo/fields.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "diffeo/parallel.hpp"

namespace diffeo {

double norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

Grid3::Grid3(std::size_t nx, std::size_t ny, std::size_t nz, double sx, double sy, double sz)
    : nx_(nx), ny_(ny), nz_(nz), sx_(sx), sy_(sy), sz_(sz) {
    if (nx < 2 || ny < 2 || nz < 2)
        throw InvalidArgument("grid needs at least 2 voxels along every axis, got " + describe());
    if (!(sx > 0.0) || !(sy > 0.0) || !(sz > 0.0) || !std::isfinite(sx) || !std::isfinite(sy) ||
        !std::isfinite(sz))
        throw InvalidArgument("grid spacing must be positive and finite, got " + describe());
}

bool Grid3::same_lattice(const Grid3& other) const {
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-6 * std::max(a, b); };
    return nx_ == other.nx_ && ny_ == other.ny_ && nz_ == other.nz_ && close(sx_, other.sx_) &&
           close(sy_, other.sy_) && close(sz_, other.sz_);
}

std::string Grid3::describe() const {
    std::ostringstream os;
    os << nx_ << "x" << ny_ << "x" << nz_ << " @ (" << sx_ << ", " << sy_ << ", " << sz_ << ") mm";
    return os.str();
}

const char* to_string(VolumeKind kind) {
    switch (kind) {
        case VolumeKind::intensity: return "intensity";
        case VolumeKind::jacobian: return "jacobian";
        case VolumeKind::label: return "label";
    }
    return "intensity";
}

const char* to_string(FieldKind kind) {
    switch (kind) {
        case FieldKind::transformation: return "transformation";
        case FieldKind::displacement: return "displacement";
        case FieldKind::velocity: return "velocity";
        case FieldKind::curl: return "curl";
    }
    return "displacement";
}

FieldKind field_kind_from_string(const std::string& name) {
    if (name == "transformation") return FieldKind::transformation;
    if (name == "displacement") return FieldKind::displacement;
    if (name == "velocity") return FieldKind::velocity;
    if (name == "curl") return FieldKind::curl;
    throw InvalidArgument("unknown field kind '" + name + "'");
}

ScalarVolume::ScalarVolume(Grid3 grid, VolumeKind kind, double fill)
    : grid_(grid), kind_(kind), data_(grid.size(), fill) {}

ScalarVolume::ScalarVolume(Grid3 grid, std::vector<double> data, VolumeKind kind)
    : grid_(grid), kind_(kind), data_(std::move(data)) {
    if (data_.size() != grid_.size())
        throw InvalidArgument("volume data length " + std::to_string(data_.size()) +
                              " does not match grid " + grid_.describe());
    if (kind_ == VolumeKind::label) validate();
}

void ScalarVolume::set_kind(VolumeKind kind) {
    kind_ = kind;
    if (kind_ == VolumeKind::label) validate();
}

void ScalarVolume::validate() const {
    if (data_.size() != grid_.size()) throw InvalidArgument("volume data length mismatch");
    if (kind_ != VolumeKind::label) return;
    for (double v : data_) {
        // Labels must be exactly representable non-negative integers.
        if (!(v >= 0.0) || v != std::floor(v) || v > 9007199254740992.0)
            throw InvalidArgument("label volume holds a non-integer or negative value");
    }
}

VectorField::VectorField(Grid3 grid, FieldKind kind)
    : grid_(grid), kind_(kind), data_(3 * grid.size(), 0.0) {}

VectorField::VectorField(Grid3 grid, std::vector<double> data, FieldKind kind)
    : grid_(grid), kind_(kind), data_(std::move(data)) {
    if (data_.size() != 3 * grid_.size())
        throw InvalidArgument("field component count " + std::to_string(data_.size()) +
                              " does not match 3 x " + grid_.describe());
}

ScalarVolume VectorField::component(int c, VolumeKind kind) const {
    ScalarVolume out(grid_, kind);
    for (std::size_t idx = 0; idx < voxels(); ++idx) out[idx] = data_[3 * idx + c];
    return out;
}

void FeatureStack::add(std::string name, ScalarVolume channel) {
    if (channels.empty() && channel_names.empty()) grid = channel.grid();
    require_same_grid(grid, channel.grid(), "feature channel");
    channels.push_back(std::move(channel));
    channel_names.push_back(std::move(name));
}

void FeatureStack::validate() const {
    if (channels.size() != channel_names.size())
        throw InvalidArgument("feature stack has mismatched channel/name counts");
    for (const auto& ch : channels) require_same_grid(grid, ch.grid(), "feature channel");
}

void require_same_grid(const Grid3& a, const Grid3& b, const char* what) {
    if (!a.same_lattice(b))
        throw GridMismatch(std::string(what) + ": grid " + b.describe() + " does not match " +
                           a.describe());
}

Vec3 voxel_position(const Grid3& grid, std::size_t idx) {
    const std::size_t i = idx % grid.nx();
    const std::size_t j = (idx / grid.nx()) % grid.ny();
    const std::size_t k = idx / (grid.nx() * grid.ny());
    return {static_cast<double>(i), static_cast<double>(j), static_cast<double>(k)};
}

VectorField identity_field(const Grid3& grid) {
    VectorField out(grid, FieldKind::transformation);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) out.set(idx, voxel_position(grid, idx));
    return out;
}

VectorField to_displacement(const VectorField& field) {
    if (field.kind() != FieldKind::transformation) return field;
    VectorField out(field.grid(), FieldKind::displacement);
    for (std::size_t idx = 0; idx < field.voxels(); ++idx)
        out.set(idx, field.get(idx) - voxel_position(field.grid(), idx));
    return out;
}

VectorField to_transformation(const VectorField& field) {
    if (field.kind() == FieldKind::transformation) return field;
    if (field.kind() != FieldKind::displacement)
        throw InvalidArgument(std::string("cannot treat a ") + to_string(field.kind()) +
                              " field as a transformation");
    VectorField out(field.grid(), FieldKind::transformation);
    for (std::size_t idx = 0; idx < field.voxels(); ++idx)
        out.set(idx, field.get(idx) + voxel_position(field.grid(), idx));
    return out;
}

namespace {

struct Stencil {
    std::size_t i0, i1, j0, j1, k0, k1;
    double fx, fy, fz;
};

void require_finite(const Vec3& p) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
        throw InvalidArgument("non-finite sample point");
}

double clamp_axis(double v, std::size_t n) {
    return std::clamp(v, 0.0, static_cast<double>(n - 1));
}

Vec3 clamp_point(const Grid3& g, const Vec3& p) {
    return {clamp_axis(p.x, g.nx()), clamp_axis(p.y, g.ny()), clamp_axis(p.z, g.nz())};
}

bool inside(const Grid3& g, const Vec3& p) {
    return p.x >= 0.0 && p.y >= 0.0 && p.z >= 0.0 && p.x <= static_cast<double>(g.nx() - 1) &&
           p.y <= static_cast<double>(g.ny() - 1) && p.z <= static_cast<double>(g.nz() - 1);
}

// `q` must already lie inside the lattice.
Stencil stencil_at(const Grid3& g, const Vec3& q) {
    Stencil s;
    auto axis = [](double v, std::size_t n, std::size_t& lo, std::size_t& hi, double& f) {
        double fl = std::floor(v);
        lo = static_cast<std::size_t>(fl);
        if (lo >= n - 1) {
            lo = n - 1;
            hi = n - 1;
            f = 0.0;
            return;
        }
        hi = lo + 1;
        f = v - fl;
    };
    axis(q.x, g.nx(), s.i0, s.i1, s.fx);
    axis(q.y, g.ny(), s.j0, s.j1, s.fy);
    axis(q.z, g.nz(), s.k0, s.k1, s.fz);
    return s;
}

template <class Value>
double interpolate(const Grid3& g, const Stencil& s, Value value) {
    const double c00 = (1.0 - s.fx) * value(g.index(s.i0, s.j0, s.k0)) + s.fx * value(g.index(s.i1, s.j0, s.k0));
    const double c10 = (1.0 - s.fx) * value(g.index(s.i0, s.j1, s.k0)) + s.fx * value(g.index(s.i1, s.j1, s.k0));
    const double c01 = (1.0 - s.fx) * value(g.index(s.i0, s.j0, s.k1)) + s.fx * value(g.index(s.i1, s.j0, s.k1));
    const double c11 = (1.0 - s.fx) * value(g.index(s.i0, s.j1, s.k1)) + s.fx * value(g.index(s.i1, s.j1, s.k1));
    const double c0 = (1.0 - s.fy) * c00 + s.fy * c10;
    const double c1 = (1.0 - s.fy) * c01 + s.fy * c11;
    return (1.0 - s.fz) * c0 + s.fz * c1;
}

// Samples a transformation at p. Inside the lattice every component is interpolated
// directly; outside, the displacement at the nearest face is carried along.
Vec3 sample_transformation(const VectorField& phi, const Vec3& p) {
    const Grid3& g = phi.grid();
    const Vec3 q = inside(g, p) ? p : clamp_point(g, p);
    const Stencil s = stencil_at(g, q);
    const auto& d = phi.data();
    Vec3 out;
    for (int c = 0; c < 3; ++c)
        out[c] = interpolate(g, s, [&](std::size_t idx) { return d[3 * idx + c]; });
    if (phi.kind() != FieldKind::transformation) out = out + q;
    if (q == p) return out;
    return out + (p - q);
}

}  // namespace

double sample_trilinear(const ScalarVolume& vol, const Vec3& p) {
    require_finite(p);
    const Grid3& g = vol.grid();
    const Stencil s = stencil_at(g, clamp_point(g, p));
    const auto& d = vol.data();
    return interpolate(g, s, [&](std::size_t idx) { return d[idx]; });
}

double sample_nearest(const ScalarVolume& vol, const Vec3& p) {
    require_finite(p);
    const Grid3& g = vol.grid();
    const Vec3 q = clamp_point(g, p);
    auto round = [](double v) { return static_cast<std::size_t>(std::floor(v + 0.5)); };
    return vol.at(round(q.x), round(q.y), round(q.z));
}

Vec3 sample_displacement(const VectorField& field, const Vec3& p) {
    require_finite(p);
    const Grid3& g = field.grid();
    const Vec3 q = clamp_point(g, p);
    if (field.kind() == FieldKind::transformation) return sample_transformation(field, q) - q;
    const Stencil s = stencil_at(g, q);
    const auto& d = field.data();
    Vec3 out;
    for (int c = 0; c < 3; ++c)
        out[c] = interpolate(g, s, [&](std::size_t idx) { return d[3 * idx + c]; });
    return out;
}

ScalarVolume warp(const ScalarVolume& vol, const VectorField& phi) {
    require_same_grid(vol.grid(), phi.grid(), "warp");
    if (phi.kind() != FieldKind::transformation && phi.kind() != FieldKind::displacement)
        throw InvalidArgument("warp needs a transformation or displacement field");
    const Grid3& g = vol.grid();
    ScalarVolume out(g, vol.kind());
    const bool label = vol.kind() == VolumeKind::label;
    const bool displacement = phi.kind() == FieldKind::displacement;
    parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t idx = b; idx < e; ++idx) {
            Vec3 p = phi.get(idx);
            if (displacement) p = p + voxel_position(g, idx);
            out[idx] = label ? sample_nearest(vol, p) : sample_trilinear(vol, p);
        }
    });
    return out;
}

VectorField compose(const VectorField& outer, const VectorField& inner) {
    require_same_grid(outer.grid(), inner.grid(), "compose");
    for (const auto* f : {&outer, &inner})
        if (f->kind() != FieldKind::transformation && f->kind() != FieldKind::displacement)
            throw InvalidArgument("compose needs transformation or displacement fields");
    const Grid3& g = outer.grid();
    VectorField out(g, FieldKind::transformation);
    const bool inner_disp = inner.kind() == FieldKind::displacement;
    parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t idx = b; idx < e; ++idx) {
            Vec3 p = inner.get(idx);
            if (inner_disp) p = p + voxel_position(g, idx);
            require_finite(p);
            out.set(idx, sample_transformation(outer, p));
        }
    });
    return out;
}

double max_difference(const VectorField& a, const VectorField& b, std::size_t margin) {
    require_same_grid(a.grid(), b.grid(), "max_difference");
    const Grid3& g = a.grid();
    double worst = 0.0;
    for (std::size_t k = margin; k + margin < g.nz(); ++k)
        for (std::size_t j = margin; j + margin < g.ny(); ++j)
            for (std::size_t i = margin; i + margin < g.nx(); ++i) {
                const std::size_t idx = g.index(i, j, k);
                worst = std::max(worst, norm(a.get(idx) - b.get(idx)));
            }
    return worst;
}

double mean_displacement(const VectorField& phi) {
    const VectorField u = to_displacement(phi);
    const double total =
        parallel_sum(u.voxels(), [&](std::size_t idx) { return norm(u.get(idx)); });
    return total / static_cast<double>(u.voxels());
}

double max_displacement(const VectorField& phi) {
    const VectorField u = to_displacement(phi);
    double worst = 0.0;
    for (std::size_t idx = 0; idx < u.voxels(); ++idx) worst = std::max(worst, norm(u.get(idx)));
    return worst;
}

}  // namespace diffeo
