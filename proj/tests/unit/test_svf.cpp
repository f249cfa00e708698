#include <doctest.h>

#include <cmath>
#include <limits>

#include "diffeo/diffgeo.hpp"
#include "diffeo/svf.hpp"
#include "diffeo/synth.hpp"

using namespace diffeo;

TEST_CASE("exp of zero is the identity exactly") {
    const Grid3 g(9, 8, 7);
    const VectorField phi = exponentiate(VectorField(g, FieldKind::velocity));
    CHECK(phi.kind() == FieldKind::transformation);
    CHECK(phi.data() == identity_field(g).data());
}

TEST_CASE("constant velocity flows to a translation in the interior") {
    const Grid3 g(16, 16, 16);
    VectorField z(g, FieldKind::velocity);
    for (std::size_t idx = 0; idx < g.size(); ++idx) z.set(idx, {1.5, -0.5, 0.25});
    const VectorField phi = exponentiate(z);
    CHECK(max_difference(phi, translation(g, {1.5, -0.5, 0.25}), 2) <= 1e-10);
}

TEST_CASE("exp(z) composed with exp(-z) is close to the identity") {
    const Grid3 g(24, 24, 24);
    for (double amp : {0.5, 1.0, 2.0}) {
        const VectorField z = random_velocity(g, amp, 17);
        const VectorField fwd = exponentiate(z), inv = exponentiate_inverse(z);
        CHECK(max_difference(compose(fwd, inv), identity_field(g), 3) <= 0.1);
        CHECK(max_difference(compose(inv, fwd), identity_field(g), 3) <= 0.1);
        CHECK(negative_jacobian_fraction(jacobian_determinant(fwd)) == 0.0);
    }
}

TEST_CASE("more squaring steps converge") {
    const Grid3 g(16, 16, 16);
    const VectorField z = random_velocity(g, 1.5, 3);
    const double d6 = max_difference(exponentiate(z, 6), exponentiate(z, 10), 2);
    const double d3 = max_difference(exponentiate(z, 3), exponentiate(z, 10), 2);
    CHECK(d6 < d3);
}

TEST_CASE("exponentiation validates its input") {
    const Grid3 g(6, 6, 6);
    VectorField z(g, FieldKind::velocity);
    CHECK_THROWS_AS(exponentiate(z, 0), InvalidArgument);
    CHECK_THROWS_AS(exponentiate(z, 13), InvalidArgument);
    CHECK_THROWS_AS(exponentiate(identity_field(g)), InvalidArgument);
    z.data()[5] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(exponentiate(z), InvalidArgument);
}
