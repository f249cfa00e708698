#include <doctest.h>

#include <cmath>
#include <limits>

#include "diffeo/fields.hpp"
#include "diffeo/synth.hpp"
#include "oracles.hpp"

using namespace diffeo;

TEST_CASE("grid indexing is x-fastest") {
    const Grid3 g(4, 3, 2);
    CHECK(g.size() == 24);
    CHECK(g.index(1, 0, 0) == 1);
    CHECK(g.index(0, 1, 0) == 4);
    CHECK(g.index(0, 0, 1) == 12);
    CHECK(g.stride(2) == 12);
    CHECK(g.on_boundary(0, 1, 1));
    CHECK_FALSE(Grid3(3, 3, 3).on_boundary(1, 1, 1));
}

TEST_CASE("grid rejects degenerate lattices") {
    CHECK_THROWS_AS(Grid3(1, 4, 4), InvalidArgument);
    CHECK_THROWS_AS(Grid3(4, 4, 4, 0.0), InvalidArgument);
    CHECK_NOTHROW(Grid3(2, 2, 2));
    CHECK(Grid3(4, 4, 4, 1.0) == Grid3(4, 4, 4, 1.0 + 1e-9));
    CHECK_FALSE(Grid3(4, 4, 4) == Grid3(4, 4, 5));
}

TEST_CASE("label volumes must hold non-negative integers") {
    ScalarVolume v(Grid3(3, 3, 3));
    v[4] = 2.5;
    CHECK_THROWS_AS(v.set_kind(VolumeKind::label), InvalidArgument);
    v[4] = -1.0;
    CHECK_THROWS_AS(v.set_kind(VolumeKind::label), InvalidArgument);
    v[4] = 3.0;
    CHECK_NOTHROW(v.set_kind(VolumeKind::label));
}

TEST_CASE("identity round-trips through displacement form") {
    const Grid3 g(5, 4, 3);
    const VectorField id = identity_field(g);
    const VectorField u = to_displacement(id);
    for (double v : u.data()) CHECK(v == 0.0);
    CHECK(to_transformation(u).data() == id.data());
    CHECK(to_transformation(u).kind() == FieldKind::transformation);
}

TEST_CASE("trilinear sampling is exact on affine intensities") {
    const Grid3 g(6, 5, 4);
    ScalarVolume v(g);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const Vec3 p = voxel_position(g, idx);
        v[idx] = 2.0 * p.x - 0.5 * p.y + 3.0 * p.z + 1.0;
    }
    const Vec3 q{2.25, 1.5, 2.75};
    CHECK(sample_trilinear(v, q) == doctest::Approx(2.0 * q.x - 0.5 * q.y + 3.0 * q.z + 1.0).epsilon(1e-14));
    // Clamped outside the lattice.
    CHECK(sample_trilinear(v, {-3.0, 0.0, 0.0}) == doctest::Approx(v.at(0, 0, 0)));
    CHECK(sample_trilinear(v, {9.0, 4.0, 3.0}) == doctest::Approx(v.at(5, 4, 3)));
    CHECK(sample_nearest(v, {2.4, 1.6, 0.4}) == v.at(2, 2, 0));
    CHECK_THROWS_AS(sample_trilinear(v, {std::nan(""), 0.0, 0.0}), InvalidArgument);
}

TEST_CASE("warp by a unit shift reads the neighbouring voxel") {
    const Grid3 g(8, 6, 5);
    ScalarVolume v(g);
    for (std::size_t idx = 0; idx < g.size(); ++idx) v[idx] = std::sin(0.3 * idx);
    const ScalarVolume w = warp(v, translation(g, {1.0, 0.0, 0.0}));
    for (std::size_t k = 0; k < g.nz(); ++k)
        for (std::size_t j = 0; j < g.ny(); ++j)
            for (std::size_t i = 0; i + 1 < g.nx(); ++i) CHECK(w.at(i, j, k) == v.at(i + 1, j, k));
}

TEST_CASE("warping a ball by a known translation moves its centroid by that amount") {
    const Grid3 g(32, 32, 32);
    const ScalarVolume ball = ball_mask(g, 6.0);
    ScalarVolume intensity = ball;
    intensity.set_kind(VolumeKind::intensity);
    const Vec3 before = oracle::centroid(intensity);
    for (double s : {2.0, -2.0}) {
        // out(p) = in(p + s) moves content by −s.
        const ScalarVolume moved = warp(intensity, translation(g, {s, 0.0, 0.0}));
        const Vec3 after = oracle::centroid(moved);
        CHECK(std::abs((before.x - after.x) - s) <= 0.1);
        CHECK(std::abs(after.y - before.y) <= 0.1);
        const ScalarVolume labels = warp(ball, translation(g, {0.0, s, 0.0}));
        CHECK(labels.kind() == VolumeKind::label);
        ScalarVolume as_int = labels;
        as_int.set_kind(VolumeKind::intensity);
        CHECK(std::abs((before.y - oracle::centroid(as_int).y) - s) <= 0.1);
    }
}

TEST_CASE("composition of translations adds the shifts") {
    const Grid3 g(12, 12, 12);
    const Vec3 a{1.5, -0.5, 2.0}, b{-0.25, 1.0, 0.5};
    const VectorField ab = compose(translation(g, a), translation(g, b));
    const VectorField expect = translation(g, a + b);
    CHECK(max_difference(ab, expect, 3) <= 1e-12);
    CHECK(ab.kind() == FieldKind::transformation);
}

TEST_CASE("composition with the identity is a no-op") {
    const Grid3 g(8, 8, 8);
    const VectorField f = oracle::smooth_random_field(g, 3, 0.4);
    CHECK(max_difference(compose(f, identity_field(g)), f) <= 1e-12);
    CHECK(max_difference(compose(identity_field(g), f), f, 1) <= 1e-12);
}

TEST_CASE("grid mismatches are rejected") {
    const ScalarVolume v(Grid3(4, 4, 4));
    CHECK_THROWS_AS(warp(v, identity_field(Grid3(4, 4, 5))), GridMismatch);
    CHECK_THROWS_AS(compose(identity_field(Grid3(4, 4, 4)), identity_field(Grid3(5, 4, 4))), GridMismatch);
}

TEST_CASE("displacement summaries") {
    const Grid3 g(6, 6, 6);
    const VectorField t = translation(g, {3.0, 4.0, 0.0});
    CHECK(mean_displacement(t) == doctest::Approx(5.0));
    CHECK(max_displacement(t) == doctest::Approx(5.0));
    CHECK(mean_displacement(identity_field(g)) == 0.0);
}

TEST_CASE("field kinds parse from their names") {
    for (auto k : {FieldKind::transformation, FieldKind::displacement, FieldKind::velocity, FieldKind::curl})
        CHECK(field_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(field_kind_from_string("banana"), InvalidArgument);
}
