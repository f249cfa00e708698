#include "diffeo/diffgeo.hpp"

#include <cmath>

#include "diffeo/parallel.hpp"

namespace diffeo {

namespace {

void require_min_size(const Grid3& g) {
    if (g.nx() < 2 || g.ny() < 2 || g.nz() < 2)
        throw InvalidArgument("finite differences need at least 2 voxels per axis");
}

std::size_t coord(const Grid3& g, std::size_t idx, int axis) {
    if (axis == 0) return idx % g.nx();
    if (axis == 1) return (idx / g.nx()) % g.ny();
    return idx / (g.nx() * g.ny());
}

}  // namespace

double derivative_weight(std::size_t n, std::size_t p, std::size_t q) {
    if (p == 0) return q == 0 ? -1.0 : (q == 1 ? 1.0 : 0.0);
    if (p == n - 1) return q == n - 1 ? 1.0 : (q == n - 2 ? -1.0 : 0.0);
    if (q == p + 1) return 0.5;
    if (q + 1 == p) return -0.5;
    return 0.0;
}

double partial(const Grid3& g, std::span<const double> data, int comps, int c, int axis,
               std::size_t idx) {
    const std::size_t n = g.dim(axis);
    const std::size_t t = coord(g, idx, axis);
    const std::size_t s = g.stride(axis);
    auto at = [&](std::size_t v) { return data[comps * v + c]; };
    if (t == 0) return at(idx + s) - at(idx);
    if (t == n - 1) return at(idx) - at(idx - s);
    return 0.5 * (at(idx + s) - at(idx - s));
}

void add_partial_transpose(const Grid3& g, std::span<const double> r, int axis, double scale,
                           std::span<double> out, int comps, int c) {
    const std::size_t n = g.dim(axis);
    const std::size_t s = g.stride(axis);
    parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t q = b; q < e; ++q) {
            const std::size_t t = coord(g, q, axis);
            // (Dᵀ r)(q) = Σ_p D[p][q] r(p); only p ∈ {t-1, t, t+1} contribute.
            double acc = derivative_weight(n, t, t) * r[q];
            if (t > 0) acc += derivative_weight(n, t - 1, t) * r[q - s];
            if (t + 1 < n) acc += derivative_weight(n, t + 1, t) * r[q + s];
            out[comps * q + c] += scale * acc;
        }
    });
}

Mat3 jacobian_matrix(const VectorField& phi, std::size_t idx) {
    Mat3 m{};
    const std::span<const double> d(phi.data());
    for (int c = 0; c < 3; ++c)
        for (int a = 0; a < 3; ++a) m[c][a] = partial(phi.grid(), d, 3, c, a, idx);
    // Displacement stencils differ from the transformation ones by exactly the identity.
    if (phi.kind() != FieldKind::transformation)
        for (int c = 0; c < 3; ++c) m[c][c] += 1.0;
    return m;
}

double determinant(const Mat3& m) {
    // Triple product of the columns.
    const double cx = m[1][1] * m[2][2] - m[2][1] * m[1][2];
    const double cy = m[2][1] * m[0][2] - m[0][1] * m[2][2];
    const double cz = m[0][1] * m[1][2] - m[1][1] * m[0][2];
    return m[0][0] * cx + m[1][0] * cy + m[2][0] * cz;
}

Mat3 cofactor(const Mat3& m) {
    Mat3 c{};
    for (int r = 0; r < 3; ++r)
        for (int k = 0; k < 3; ++k) {
            const int r1 = (r + 1) % 3, r2 = (r + 2) % 3;
            const int k1 = (k + 1) % 3, k2 = (k + 2) % 3;
            c[r][k] = m[r1][k1] * m[r2][k2] - m[r1][k2] * m[r2][k1];
        }
    return c;
}

ScalarVolume jacobian_determinant(const VectorField& phi) {
    require_min_size(phi.grid());
    if (phi.kind() != FieldKind::transformation && phi.kind() != FieldKind::displacement)
        throw InvalidArgument("jacobian_determinant needs a transformation or displacement");
    ScalarVolume out(phi.grid(), VolumeKind::jacobian);
    parallel_for(phi.voxels(), [&](std::size_t b, std::size_t e) {
        for (std::size_t idx = b; idx < e; ++idx) out[idx] = determinant(jacobian_matrix(phi, idx));
    });
    return out;
}

VectorField curl(const VectorField& phi) {
    require_min_size(phi.grid());
    const Grid3& g = phi.grid();
    if (phi.kind() != FieldKind::transformation && phi.kind() != FieldKind::displacement)
        throw InvalidArgument("curl needs a transformation or displacement");
    // Differentiate the displacement so curl(φ) and curl(φ - id) are bit-identical.
    const VectorField u = to_displacement(phi);
    const std::span<const double> d(u.data());
    VectorField out(g, FieldKind::curl);
    parallel_for(phi.voxels(), [&](std::size_t b, std::size_t e) {
        for (std::size_t idx = b; idx < e; ++idx) {
            auto D = [&](int c, int a) { return partial(g, d, 3, c, a, idx); };
            out.set(idx, {D(2, 1) - D(1, 2), D(0, 2) - D(2, 0), D(1, 0) - D(0, 1)});
        }
    });
    return out;
}

double negative_jacobian_fraction(const ScalarVolume& jd, const std::optional<ScalarVolume>& mask) {
    if (mask) require_same_grid(jd.grid(), mask->grid(), "negative_jacobian_fraction mask");
    std::size_t counted = 0;
    std::size_t folded = 0;
    for (std::size_t idx = 0; idx < jd.size(); ++idx) {
        if (mask && (*mask)[idx] == 0.0) continue;
        ++counted;
        if (jd[idx] <= 0.0) ++folded;
    }
    if (counted == 0) throw InvalidArgument("mask selects no voxel; fraction is undefined");
    return static_cast<double>(folded) / static_cast<double>(counted);
}

}  // namespace diffeo
