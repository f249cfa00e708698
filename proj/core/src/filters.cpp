#include "diffeo/filters.hpp"

#include <algorithm>
#include <cmath>

#include "diffeo/parallel.hpp"

namespace diffeo {

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    double total = 0.0;
    for (int t = -radius; t <= radius; ++t) {
        k[t + radius] = std::exp(-0.5 * t * t / (sigma * sigma));
        total += k[t + radius];
    }
    for (double& w : k) w /= total;
    return k;
}

void smooth_axis(const Grid3& g, std::vector<double>& data, int comps, int axis,
                 const std::vector<double>& kernel) {
    const std::size_t n = g.dim(axis);
    if (n < 2) return;
    const int radius = static_cast<int>(kernel.size() / 2);
    const std::size_t stride = g.stride(axis);
    // Each line along `axis` is identified by its start voxel.
    const std::size_t lines = g.size() / n;
    std::vector<double> source = data;
    parallel_for(
        lines,
        [&](std::size_t b, std::size_t e) {
            for (std::size_t line = b; line < e; ++line) {
                std::size_t start;
                if (axis == 0) {
                    start = line * g.nx();
                } else if (axis == 1) {
                    const std::size_t i = line % g.nx();
                    const std::size_t k = line / g.nx();
                    start = i + g.nx() * g.ny() * k;
                } else {
                    start = line;
                }
                for (std::size_t t = 0; t < n; ++t) {
                    for (int c = 0; c < comps; ++c) {
                        double acc = 0.0;
                        for (int o = -radius; o <= radius; ++o) {
                            const long pos = std::clamp(static_cast<long>(t) + o, 0L,
                                                        static_cast<long>(n) - 1);
                            acc += kernel[o + radius] *
                                   source[comps * (start + static_cast<std::size_t>(pos) * stride) + c];
                        }
                        data[comps * (start + t * stride) + c] = acc;
                    }
                }
            }
        },
        64);
}

}  // namespace

void gaussian_smooth_inplace(const Grid3& grid, std::vector<double>& data, int components,
                             double sigma) {
    if (!(sigma > 0.0)) return;
    const auto kernel = gaussian_kernel(sigma);
    for (int axis = 0; axis < 3; ++axis) smooth_axis(grid, data, components, axis, kernel);
}

ScalarVolume gaussian_smooth(const ScalarVolume& vol, double sigma) {
    ScalarVolume out = vol;
    gaussian_smooth_inplace(out.grid(), out.data(), 1, sigma);
    return out;
}

VectorField gaussian_smooth(const VectorField& field, double sigma) {
    VectorField out = field;
    if (field.kind() == FieldKind::transformation) {
        // Smooth the displacement so the identity part stays exact.
        out = to_displacement(field);
        gaussian_smooth_inplace(out.grid(), out.data(), 3, sigma);
        return to_transformation(out);
    }
    gaussian_smooth_inplace(out.grid(), out.data(), 3, sigma);
    return out;
}

Grid3 coarser_grid(const Grid3& g) {
    return Grid3((g.nx() + 1) / 2, (g.ny() + 1) / 2, (g.nz() + 1) / 2, 2.0 * g.sx(),
                 2.0 * g.sy(), 2.0 * g.sz());
}

ScalarVolume downsample(const ScalarVolume& vol) {
    const Grid3 coarse = coarser_grid(vol.grid());
    const ScalarVolume smooth =
        vol.kind() == VolumeKind::label ? vol : gaussian_smooth(vol, 1.0);
    ScalarVolume out(coarse, vol.kind());
    for (std::size_t k = 0; k < coarse.nz(); ++k)
        for (std::size_t j = 0; j < coarse.ny(); ++j)
            for (std::size_t i = 0; i < coarse.nx(); ++i)
                out.at(i, j, k) = smooth.at(2 * i, 2 * j, 2 * k);
    return out;
}

VectorField upsample_vectors(const VectorField& coarse, const Grid3& fine) {
    VectorField out(fine, coarse.kind() == FieldKind::transformation ? FieldKind::displacement
                                                                      : coarse.kind());
    parallel_for(fine.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t idx = b; idx < e; ++idx) {
            const Vec3 p = 0.5 * voxel_position(fine, idx);
            out.set(idx, 2.0 * sample_displacement(coarse, p));
        }
    });
    return out;
}

ScalarVolume normalize_intensity(const ScalarVolume& vol, Normalization* stats) {
    const std::size_t n = vol.size();
    const double mean = parallel_sum(n, [&](std::size_t i) { return vol[i]; }) / n;
    const double var =
        parallel_sum(n, [&](std::size_t i) { return (vol[i] - mean) * (vol[i] - mean); }) / n;
    const double sd = var > 1e-24 ? std::sqrt(var) : 1.0;
    ScalarVolume out(vol.grid(), VolumeKind::intensity);
    for (std::size_t i = 0; i < n; ++i) out[i] = (vol[i] - mean) / sd;
    if (stats) *stats = {mean, sd};
    return out;
}

}  // namespace diffeo
