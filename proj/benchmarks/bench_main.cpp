#include <benchmark/benchmark.h>

#include "diffeo/diffgeo.hpp"
#include "diffeo/metrics.hpp"
#include "diffeo/registration.hpp"
#include "diffeo/svf.hpp"
#include "diffeo/synth.hpp"
#include "diffeo/varsolve.hpp"

using namespace diffeo;

namespace {

Grid3 cube(const benchmark::State& s) {
    const auto n = static_cast<std::size_t>(s.range(0));
    return Grid3(n, n, n);
}

void voxels(benchmark::State& s) {
    const double n = static_cast<double>(s.range(0));
    s.counters["voxels/s"] = benchmark::Counter(n * n * n * static_cast<double>(s.iterations()), benchmark::Counter::kIsRate);
}

}  // namespace

static void BM_JacobianDeterminant(benchmark::State& s) {
    const VectorField phi = exponentiate(random_velocity(cube(s), 1.5, 1));
    for (auto _ : s) benchmark::DoNotOptimize(jacobian_determinant(phi));
    voxels(s);
}
BENCHMARK(BM_JacobianDeterminant)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_Curl(benchmark::State& s) {
    const VectorField phi = exponentiate(random_velocity(cube(s), 1.5, 1));
    for (auto _ : s) benchmark::DoNotOptimize(curl(phi));
    voxels(s);
}
BENCHMARK(BM_Curl)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_Exponentiate(benchmark::State& s) {
    const VectorField z = random_velocity(cube(s), 1.5, 2);
    for (auto _ : s) benchmark::DoNotOptimize(exponentiate(z));
    voxels(s);
}
BENCHMARK(BM_Exponentiate)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_Compose(benchmark::State& s) {
    const VectorField a = exponentiate(random_velocity(cube(s), 1.5, 3));
    const VectorField b = exponentiate(random_velocity(cube(s), 1.5, 4));
    for (auto _ : s) benchmark::DoNotOptimize(compose(a, b));
    voxels(s);
}
BENCHMARK(BM_Compose)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_Warp(benchmark::State& s) {
    const ScalarVolume img = phantom(cube(s), 5);
    const VectorField phi = exponentiate(random_velocity(cube(s), 1.5, 5));
    for (auto _ : s) benchmark::DoNotOptimize(warp(img, phi));
    voxels(s);
}
BENCHMARK(BM_Warp)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_MonitorGradient(benchmark::State& s) {
    const Grid3 g = cube(s);
    const VectorField phi = exponentiate(random_velocity(g, 1.5, 6));
    const MonitorFunctional f({jacobian_determinant(phi), curl(phi)});
    const std::vector<double> u(3 * g.size(), 0.0);
    for (auto _ : s) benchmark::DoNotOptimize(f.gradient(u));
    voxels(s);
}
BENCHMARK(BM_MonitorGradient)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_Reconstruct(benchmark::State& s) {
    const Grid3 g = cube(s);
    const VectorField phi = exponentiate(random_velocity(g, 1.5, 7));
    const MonitorPair m{jacobian_determinant(phi), curl(phi)};
    SolveOptions o;
    o.max_iters = 20;
    for (auto _ : s) benchmark::DoNotOptimize(reconstruct(m, o));
}
BENCHMARK(BM_Reconstruct)->Arg(24)->Unit(benchmark::kMillisecond);

static void BM_Register(benchmark::State& s) {
    const Grid3 g = cube(s);
    const ScalarVolume fixed = phantom(g, 8);
    const ScalarVolume moving = warp(fixed, exponentiate(random_velocity(g, 1.5, 8)));
    RegistrationOptions o;
    o.iterations = 10;
    for (auto _ : s) benchmark::DoNotOptimize(register_images(moving, fixed, o));
}
BENCHMARK(BM_Register)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_Dice(benchmark::State& s) {
    const Grid3 g = cube(s);
    const ScalarVolume a = ball_mask(g, s.range(0) / 3.0);
    const ScalarVolume b = ball_mask(g, s.range(0) / 4.0);
    for (auto _ : s) benchmark::DoNotOptimize(dice(a, b, 1));
    voxels(s);
}
BENCHMARK(BM_Dice)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
