#include "diffeo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "diffeo/filters.hpp"

namespace diffeo {

namespace {

class NormalSource {
public:
    explicit NormalSource(std::uint64_t seed) : engine_(seed) {}

    double uniform() {
        // 53 random mantissa bits in (0, 1).
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

double ellipsoid(const Vec3& p, const Vec3& c, const Vec3& r) {
    const double dx = (p.x - c.x) / r.x, dy = (p.y - c.y) / r.y, dz = (p.z - c.z) / r.z;
    return dx * dx + dy * dy + dz * dz;
}

}  // namespace

Vec3 grid_center(const Grid3& g) {
    return {0.5 * (g.nx() - 1.0), 0.5 * (g.ny() - 1.0), 0.5 * (g.nz() - 1.0)};
}

VectorField random_velocity(const Grid3& grid, double amplitude, std::uint64_t seed, double sigma,
                            double taper) {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
        throw InvalidArgument("velocity amplitude must be finite and non-negative");
    // Noise is drawn on a padded lattice and cropped after smoothing; smoothing in place
    // with clamped edges would leave the faces several times rougher than the interior.
    const std::size_t pad = static_cast<std::size_t>(std::ceil(3.0 * std::max(sigma, 0.0)));
    const Grid3 big(grid.nx() + 2 * pad, grid.ny() + 2 * pad, grid.nz() + 2 * pad);
    NormalSource rng(seed);
    std::vector<double> noise(3 * big.size());
    for (double& v : noise) v = rng.normal();
    gaussian_smooth_inplace(big, noise, 3, sigma);
    VectorField z(grid, FieldKind::velocity);
    for (std::size_t k = 0; k < grid.nz(); ++k)
        for (std::size_t j = 0; j < grid.ny(); ++j)
            for (std::size_t i = 0; i < grid.nx(); ++i) {
                const std::size_t src = 3 * big.index(i + pad, j + pad, k + pad);
                const std::size_t dst = 3 * grid.index(i, j, k);
                for (int c = 0; c < 3; ++c) z.data()[dst + c] = noise[src + c];
            }
    if (taper > 0.0) {
        for (std::size_t idx = 0; idx < z.voxels(); ++idx) {
            const Vec3 p = voxel_position(grid, idx);
            double w = 1.0;
            for (int a = 0; a < 3; ++a) {
                const double edge = std::min(p[a], static_cast<double>(grid.dim(a) - 1) - p[a]);
                const double t = std::clamp(edge / taper, 0.0, 1.0);
                w *= t * t * (3.0 - 2.0 * t);
            }
            z.set(idx, w * z.get(idx));
        }
    }
    double peak = 0.0;
    for (std::size_t idx = 0; idx < z.voxels(); ++idx) peak = std::max(peak, norm(z.get(idx)));
    const double scale = peak > 0.0 ? amplitude / peak : 0.0;
    for (double& v : z.data()) v *= scale;
    return z;
}

ScalarVolume phantom(const Grid3& grid, std::uint64_t seed) {
    NormalSource rng(seed);
    const Vec3 c = grid_center(grid);
    const Vec3 half{0.5 * grid.nx(), 0.5 * grid.ny(), 0.5 * grid.nz()};
    auto scaled = [&](double fx, double fy, double fz) {
        return Vec3{fx * half.x, fy * half.y, fz * half.z};
    };

    struct Blob {
        Vec3 center;
        Vec3 radii;
        double value;
    };
    std::vector<Blob> blobs;
    for (int b = 0; b < 6; ++b) {
        const double angle = 2.0 * std::numbers::pi * (b + 0.25 * rng.uniform()) / 6.0;
        const double ring = 0.45 + 0.1 * rng.uniform();
        const Vec3 offset{ring * half.x * std::cos(angle), ring * half.y * std::sin(angle),
                          0.25 * half.z * (rng.uniform() - 0.5)};
        const double radius = 0.09 + 0.04 * rng.uniform();
        blobs.push_back({c + offset, scaled(radius, radius, radius), 0.45 + 0.2 * rng.uniform()});
    }

    const Vec3 head = scaled(0.85, 0.8, 0.75);
    const Vec3 brain = scaled(0.72, 0.66, 0.6);
    const Vec3 ventricle = scaled(0.1, 0.22, 0.14);
    const Vec3 left = c + Vec3{-0.16 * half.x, 0.0, 0.05 * half.z};
    const Vec3 right = c + Vec3{0.16 * half.x, 0.0, 0.05 * half.z};

    ScalarVolume out(grid, VolumeKind::intensity);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const Vec3 p = voxel_position(grid, idx);
        double v = 0.0;
        if (ellipsoid(p, c, head) <= 1.0) v = 0.3;
        if (ellipsoid(p, c, brain) <= 1.0) v = 0.8;
        for (const auto& blob : blobs)
            if (ellipsoid(p, blob.center, blob.radii) <= 1.0) v = blob.value;
        if (ellipsoid(p, left, ventricle) <= 1.0 || ellipsoid(p, right, ventricle) <= 1.0) v = 0.15;
        out[idx] = v;
    }
    return gaussian_smooth(out, 1.0);
}

ScalarVolume ball_mask(const Grid3& grid, double radius, std::optional<Vec3> center) {
    if (!(radius > 0.0)) throw InvalidArgument("ball radius must be positive");
    const Vec3 c = center.value_or(grid_center(grid));
    ScalarVolume out(grid, VolumeKind::label);
    for (std::size_t idx = 0; idx < grid.size(); ++idx)
        out[idx] = norm(voxel_position(grid, idx) - c) <= radius ? 1.0 : 0.0;
    return out;
}

VectorField translation(const Grid3& grid, const Vec3& shift) {
    VectorField out(grid, FieldKind::transformation);
    for (std::size_t idx = 0; idx < grid.size(); ++idx)
        out.set(idx, voxel_position(grid, idx) + shift);
    return out;
}

}  // namespace diffeo
