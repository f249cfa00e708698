#include <doctest.h>

#include "diffeo/atlas.hpp"
#include "diffeo/svf.hpp"
#include "diffeo/synth.hpp"

using namespace diffeo;

TEST_CASE("identical subjects converge immediately to the subject") {
    const Grid3 g(16, 16, 16);
    const ScalarVolume v = phantom(g, 4);
    const auto r = build_atlas({v, v, v});
    CHECK(r.report.iterations == 1);
    CHECK(r.report.converged);
    CHECK(r.report.max_deviation.front() < 0.05);
    double worst = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(r.atlas[i] - v[i]));
    CHECK(worst <= 1e-3);
}

TEST_CASE("single-candidate atlas on a small cohort") {
    const Grid3 g(16, 16, 16);
    const ScalarVolume base = phantom(g, 5);
    std::vector<ScalarVolume> subjects;
    for (std::uint64_t s = 0; s < 3; ++s)
        subjects.push_back(warp(base, exponentiate(random_velocity(g, 1.0, 50 + s, kSynthVelocitySigma, 3.0))));
    AtlasOptions o;
    o.single_candidate = 1;
    o.max_outer_iters = 2;
    o.registration.iterations = 20;
    o.keep_fields = true;
    const auto r = build_atlas(subjects, o);
    CHECK(r.report.candidates == std::vector<std::size_t>{1});
    CHECK(r.report.chosen == 1);
    CHECK(r.fields.size() == static_cast<std::size_t>(r.report.iterations));
    // Registering the candidate to its own subject starts near the identity.
    CHECK(r.report.self_displacement.front().front() < 0.05);
    CHECK(r.atlas.grid() == g);
    CHECK(r.cumulative.kind() == FieldKind::transformation);
}

TEST_CASE("atlas result does not depend on subject order") {
    const Grid3 g(16, 16, 16);
    const ScalarVolume base = phantom(g, 6);
    std::vector<ScalarVolume> subjects;
    for (std::uint64_t s = 0; s < 3; ++s)
        subjects.push_back(warp(base, exponentiate(random_velocity(g, 0.8, 70 + s, kSynthVelocitySigma, 3.0))));
    AtlasOptions o;
    o.max_outer_iters = 1;
    o.registration.iterations = 10;
    o.solve.max_iters = 50;
    const auto a = build_atlas(subjects, o);
    const auto b = build_atlas({subjects[2], subjects[0], subjects[1]}, o);
    CHECK(a.atlas.data() == b.atlas.data());
}

TEST_CASE("atlas input errors") {
    const Grid3 g(8, 8, 8);
    const ScalarVolume v = phantom(g, 1);
    CHECK_THROWS_AS(build_atlas({v}), InvalidArgument);
    CHECK_THROWS_AS(build_atlas({v, phantom(Grid3(8, 8, 9), 1)}), GridMismatch);
    AtlasOptions o;
    o.single_candidate = 5;
    CHECK_THROWS_AS(build_atlas({v, v}, o), InvalidArgument);
    o = {};
    o.epsilon = 0.0;
    CHECK_THROWS_AS(build_atlas({v, v}, o), InvalidArgument);
}
