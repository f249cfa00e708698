#include <doctest.h>

#include <random>

#include "diffeo/diffgeo.hpp"
#include "oracles.hpp"

using namespace diffeo;

namespace {

VectorField affine(const Grid3& g, const Mat3& a, const Vec3& b) {
    VectorField f(g, FieldKind::transformation);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const Vec3 p = voxel_position(g, idx);
        Vec3 q = b;
        for (int r = 0; r < 3; ++r) q[r] += a[r][0] * p.x + a[r][1] * p.y + a[r][2] * p.z;
        f.set(idx, q);
    }
    return f;
}

}  // namespace

TEST_CASE("identity has unit Jacobian and no curl") {
    const Grid3 g(5, 6, 7);
    const VectorField id = identity_field(g);
    const ScalarVolume jd = jacobian_determinant(id);
    const VectorField cv = curl(id);
    for (double v : jd.data()) CHECK(v == 1.0);
    for (double v : cv.data()) CHECK(v == 0.0);
    CHECK(negative_jacobian_fraction(jacobian_determinant(id)) == 0.0);
}

TEST_CASE("uniform scaling gives s cubed everywhere") {
    const Grid3 g(6, 6, 6);
    const double s = 1.3;
    const ScalarVolume jd = jacobian_determinant(affine(g, {{{s, 0, 0}, {0, s, 0}, {0, 0, s}}}, {}));
    for (double v : jd.data()) CHECK(v == doctest::Approx(s * s * s).epsilon(1e-14));
}

TEST_CASE("affine maps: interior JD = det A, curl = skew part") {
    const Grid3 g(10, 9, 8);
    const Mat3 a{{{1.1, 0.2, -0.3}, {0.05, 0.9, 0.4}, {0.1, -0.2, 1.2}}};
    const VectorField phi = affine(g, a, {2.0, -1.0, 0.5});
    const ScalarVolume jd = jacobian_determinant(phi);
    const VectorField cv = curl(phi);
    const double det = oracle::det_cofactor(a);
    const Vec3 expect{a[2][1] - a[1][2], a[0][2] - a[2][0], a[1][0] - a[0][1]};
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        CHECK(std::abs(jd[idx] - det) <= 1e-10);
        CHECK(norm(cv.get(idx) - expect) <= 1e-10);
    }
}

TEST_CASE("rotation displacement has curl (0, 0, 2)") {
    const Grid3 g(7, 7, 5);
    VectorField u(g, FieldKind::displacement);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const Vec3 p = voxel_position(g, idx);
        u.set(idx, {-p.y, p.x, 0.0});
    }
    const VectorField cv = curl(u);
    for (std::size_t idx = 0; idx < g.size(); ++idx) CHECK(norm(cv.get(idx) - Vec3{0, 0, 2}) <= 1e-12);
}

TEST_CASE("gradient of a quadratic potential is curl-free in the interior") {
    const Grid3 g(8, 8, 8);
    VectorField u(g, FieldKind::displacement);
    for (std::size_t idx = 0; idx < g.size(); ++idx) u.set(idx, 2.0 * voxel_position(g, idx));
    const VectorField cv = curl(u);
    for (std::size_t k = 1; k + 1 < g.nz(); ++k)
        for (std::size_t j = 1; j + 1 < g.ny(); ++j)
            for (std::size_t i = 1; i + 1 < g.nx(); ++i) CHECK(norm(cv.get(g.index(i, j, k))) <= 1e-10);
}

TEST_CASE("JD and curl match the brute-force oracle on random smooth fields") {
    const Grid3 g(8, 8, 8);
    double worst_jd = 0.0, worst_curl = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const VectorField f = oracle::smooth_random_field(g, seed);
        worst_jd = std::max(worst_jd, oracle::max_abs_diff(jacobian_determinant(f).data(), oracle::jd(f).data()));
        worst_curl = std::max(worst_curl, oracle::max_abs_diff(curl(f).data(), oracle::curl(f).data()));
    }
    CHECK(worst_jd <= 1e-12);
    CHECK(worst_curl <= 1e-12);
}

TEST_CASE("curl of a transformation equals curl of its displacement exactly") {
    const Grid3 g(9, 8, 7);
    const VectorField f = oracle::smooth_random_field(g, 42, 0.7);
    CHECK(curl(f).data() == curl(to_displacement(f)).data());
    const ScalarVolume a = jacobian_determinant(f);
    const ScalarVolume b = jacobian_determinant(to_displacement(f));
    CHECK(oracle::max_abs_diff(a.data(), b.data()) <= 1e-12);
}

TEST_CASE("JD and curl ignore a constant shift of the values") {
    const Grid3 g(8, 8, 8);
    const VectorField f = oracle::smooth_random_field(g, 5);
    VectorField shifted = f;
    for (std::size_t idx = 0; idx < g.size(); ++idx) shifted.set(idx, f.get(idx) + Vec3{0.5, -1.25, 2.0});
    CHECK(oracle::max_abs_diff(jacobian_determinant(f).data(), jacobian_determinant(shifted).data()) <= 1e-12);
    CHECK(oracle::max_abs_diff(curl(f).data(), curl(shifted).data()) <= 1e-12);
}

TEST_CASE("smallest legal lattice uses one-sided differences") {
    const Grid3 g(2, 2, 2);
    const VectorField phi = affine(g, {{{2, 0, 0}, {0, 3, 0}, {0, 0, 0.5}}}, {});
    const ScalarVolume jd = jacobian_determinant(phi);
    for (double v : jd.data()) CHECK(v == doctest::Approx(3.0));
}

TEST_CASE("curl rejects velocity-free kinds it cannot interpret") {
    VectorField c(Grid3(4, 4, 4), FieldKind::curl);
    CHECK_THROWS_AS(curl(c), InvalidArgument);
}

TEST_CASE("negative Jacobian fraction counts masked voxels") {
    const Grid3 g(10, 10, 10);
    ScalarVolume jd(g, VolumeKind::jacobian, 1.0);
    jd[3] = jd[500] = jd[999] = -0.5;
    CHECK(negative_jacobian_fraction(jd) == doctest::Approx(0.003));
    ScalarVolume mask(g, VolumeKind::label, 0.0);
    for (std::size_t i = 0; i < 100; ++i) mask[i] = 1.0;
    CHECK(negative_jacobian_fraction(jd, mask) == doctest::Approx(0.01));
    jd[10] = 0.0;
    CHECK(negative_jacobian_fraction(jd, mask) == doctest::Approx(0.02));
    CHECK_THROWS_AS(negative_jacobian_fraction(jd, ScalarVolume(g, VolumeKind::label, 0.0)), InvalidArgument);
    CHECK_THROWS_AS(negative_jacobian_fraction(jd, ScalarVolume(Grid3(4, 4, 4), VolumeKind::label, 1.0)),
                    GridMismatch);
}

TEST_CASE("the transpose stencil is the adjoint of the forward stencil") {
    const Grid3 g(6, 5, 7);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n;
    std::vector<double> x(3 * g.size()), r(g.size());
    for (double& v : x) v = n(rng);
    for (double& v : r) v = n(rng);
    for (int axis = 0; axis < 3; ++axis)
        for (int c = 0; c < 3; ++c) {
            double lhs = 0.0;
            for (std::size_t idx = 0; idx < g.size(); ++idx) lhs += r[idx] * partial(g, x, 3, c, axis, idx);
            std::vector<double> t(3 * g.size(), 0.0);
            add_partial_transpose(g, r, axis, 1.0, t, 3, c);
            double rhs = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) rhs += t[i] * x[i];
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
}

TEST_CASE("cofactor is the derivative of the determinant") {
    const Mat3 m{{{1.2, 0.3, -0.1}, {0.2, 0.8, 0.5}, {-0.4, 0.1, 1.1}}};
    const Mat3 cof = cofactor(m);
    const double h = 1e-6;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            Mat3 p = m, q = m;
            p[r][c] += h;
            q[r][c] -= h;
            CHECK(cof[r][c] == doctest::Approx((determinant(p) - determinant(q)) / (2 * h)).epsilon(1e-8));
        }
    CHECK(determinant(m) == doctest::Approx(oracle::det_cofactor(m)).epsilon(1e-15));
}
