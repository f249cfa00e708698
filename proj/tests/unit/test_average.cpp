#include <doctest.h>

#include <algorithm>

#include "diffeo/average.hpp"
#include "diffeo/diffgeo.hpp"
#include "diffeo/svf.hpp"
#include "diffeo/synth.hpp"

using namespace diffeo;

TEST_CASE("identical inputs reproduce their monitors") {
    const Grid3 g(16, 16, 16);
    const VectorField phi = exponentiate(random_velocity(g, 1.0, 12, kSynthVelocitySigma, 4.0));
    const MonitorPair mine{jacobian_determinant(phi), curl(phi)};
    const std::vector<VectorField> phis(3, phi);
    const MonitorPair avg = average_monitor(phis);
    CHECK(avg.f0.data() == mine.f0.data());
    CHECK(avg.g0.data() == mine.g0.data());
    const auto r = average_transformations(phis);
    const auto res = monitor_residuals(mine, r.phi);
    CHECK(res.jacobian_relative <= 5e-2);
    CHECK(res.curl_relative <= 5e-2);
}

TEST_CASE("identity inputs average to the identity without iterating") {
    const Grid3 g(10, 10, 10);
    const std::vector<VectorField> phis(4, identity_field(g));
    const auto r = average_transformations(phis);
    CHECK(r.report.iterations == 0);
    CHECK(r.phi.data() == identity_field(g).data());
}

TEST_CASE("translations are invisible to the average") {
    const Grid3 g(10, 10, 10);
    const std::vector<VectorField> phis{translation(g, {2, 0, 0}), translation(g, {0, -1, 0.5})};
    const auto r = average_transformations(phis);
    CHECK(r.phi.data() == identity_field(g).data());
}

TEST_CASE("the average is bit-exactly permutation invariant") {
    const Grid3 g(12, 12, 12);
    std::vector<VectorField> phis;
    for (std::uint64_t s = 0; s < 4; ++s) phis.push_back(exponentiate(random_velocity(g, 0.8, 30 + s)));
    SolveOptions o;
    o.max_iters = 20;
    const auto base = average_transformations(phis, o);
    std::vector<std::size_t> perm{0, 1, 2, 3};
    while (std::next_permutation(perm.begin(), perm.end())) {
        std::vector<VectorField> shuffled;
        for (std::size_t p : perm) shuffled.push_back(phis[p]);
        const MonitorPair m = average_monitor(shuffled);
        const MonitorPair b = average_monitor(phis);
        REQUIRE(m.f0.data() == b.f0.data());
        REQUIRE(m.g0.data() == b.g0.data());
    }
    std::vector<VectorField> reversed(phis.rbegin(), phis.rend());
    CHECK(average_transformations(reversed, o).phi.data() == base.phi.data());
}

TEST_CASE("average input errors") {
    CHECK_THROWS_AS(average_monitor({}), InvalidArgument);
    const std::vector<VectorField> mixed{identity_field(Grid3(4, 4, 4)), identity_field(Grid3(5, 4, 4))};
    CHECK_THROWS_AS(average_monitor(mixed), GridMismatch);
}
