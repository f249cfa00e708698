#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "diffeo/nifti_io.hpp"
#include "diffeo/synth.hpp"

using namespace diffeo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "diffeo_nifti_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::vector<std::uint8_t> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

template <class T>
void put(std::vector<std::uint8_t>& b, std::size_t off, T v) {
    std::memcpy(b.data() + off, &v, sizeof(T));
}

void swap_at(std::vector<std::uint8_t>& b, std::size_t off, std::size_t width) {
    std::reverse(b.begin() + off, b.begin() + off + width);
}

ScalarVolume ramp(const Grid3& g) {
    ScalarVolume v(g);
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::sin(0.37 * i) * 1e3 + 1.0 / (i + 3.0);
    return v;
}

std::vector<std::uint8_t> valid_file() {
    const fs::path p = scratch("valid.nii");
    write_volume(ramp(Grid3(4, 3, 2)), p);
    return slurp(p);
}

}  // namespace

TEST_CASE("float64 round trip is bit-exact") {
    const Grid3 g(7, 5, 3, 1.5, 2.0, 0.75);
    const ScalarVolume v = ramp(g);
    WriteOptions w;
    w.float64 = true;
    for (const char* name : {"v64.nii", "v64.nii.gz"}) {
        write_volume(v, scratch(name), w);
        NiftiHeaderView h;
        const ScalarVolume back = read_volume(scratch(name), &h);
        CHECK(back.data() == v.data());
        CHECK(back.grid() == g);
        CHECK(back.grid().sx() == 1.5);
        CHECK(h.datatype == nifti_datatype::float64);
    }
}

TEST_CASE("float32 round trip equals float rounding") {
    const ScalarVolume v = ramp(Grid3(5, 4, 3));
    write_volume(v, scratch("v32.nii"));
    const ScalarVolume back = read_volume(scratch("v32.nii"));
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(back[i] == static_cast<double>(static_cast<float>(v[i])));
}

TEST_CASE("labels are stored as integers and come back as labels") {
    const ScalarVolume ball = ball_mask(Grid3(10, 10, 10), 3.0);
    write_volume(ball, scratch("ball.nii.gz"));
    NiftiHeaderView h;
    const ScalarVolume back = read_volume(scratch("ball.nii.gz"), &h);
    CHECK(h.datatype == nifti_datatype::int32);
    CHECK(back.kind() == VolumeKind::label);
    CHECK(back.data() == ball.data());
}

TEST_CASE("vector fields keep their kind and values") {
    const Grid3 g(6, 5, 4);
    const VectorField z = random_velocity(g, 1.0, 2);
    WriteOptions w;
    w.float64 = true;
    write_field(z, scratch("z.nii"), w);
    NiftiHeaderView h;
    const VectorField back = read_field(scratch("z.nii"), &h);
    CHECK(back.kind() == FieldKind::velocity);
    CHECK(back.data() == z.data());
    CHECK(h.intent_code == kNiftiIntentVector);
    REQUIRE(h.dims.size() == 5);
    CHECK(h.dims[4] == 3);
    CHECK_THROWS_AS(read_volume(scratch("z.nii")), NiftiError);
    write_volume(ramp(g), scratch("scalar.nii"));
    CHECK_THROWS_AS(read_field(scratch("scalar.nii")), NiftiError);
}

TEST_CASE("multichannel volumes") {
    const Grid3 g(4, 4, 3);
    const ScalarVolume a = ramp(g);
    ScalarVolume b(g, VolumeKind::intensity, 2.0);
    write_multichannel(g, {&a, &b}, scratch("mc.nii"), {true, nullptr});
    const auto back = read_multichannel(scratch("mc.nii"));
    REQUIRE(back.size() == 2);
    CHECK(back[0].data() == a.data());
    CHECK(back[1].data() == b.data());
}

TEST_CASE("big-endian files are read") {
    std::vector<std::uint8_t> b = valid_file();
    const NiftiImage little = parse_nifti(b);
    swap_at(b, 0, 4);
    for (std::size_t o = 40; o < 56; o += 2) swap_at(b, o, 2);
    for (std::size_t o : {68u, 70u, 72u, 252u, 254u}) swap_at(b, o, 2);
    for (std::size_t o = 76; o < 120; o += 4) swap_at(b, o, 4);
    for (std::size_t o = 256; o < 328; o += 4) swap_at(b, o, 4);
    for (std::size_t o = 352; o < b.size(); o += 4) swap_at(b, o, 4);
    const NiftiImage big = parse_nifti(b);
    CHECK(big.header.byte_swapped);
    CHECK(big.header.dims == little.header.dims);
    CHECK(big.values == little.values);
}

TEST_CASE("slope and intercept are applied") {
    std::vector<std::uint8_t> b = valid_file();
    const NiftiImage plain = parse_nifti(b);
    put<float>(b, 112, 2.0f);
    put<float>(b, 116, -1.0f);
    const NiftiImage scaled = parse_nifti(b);
    for (std::size_t i = 0; i < plain.values.size(); ++i) CHECK(scaled.values[i] == 2.0 * plain.values[i] - 1.0);
}

TEST_CASE("orientation is preserved when copied") {
    const ScalarVolume v = ramp(Grid3(4, 4, 4));
    NiftiOrientation o;
    o.sform_code = 2;
    o.srow = {{{-1, 0, 0, 10}, {0, 1, 0, -5}, {0, 0, 2, 3}}};
    WriteOptions w;
    w.orientation = &o;
    write_volume(v, scratch("oriented.nii"), w);
    NiftiHeaderView h;
    read_volume(scratch("oriented.nii"), &h);
    CHECK(h.orientation.sform_code == 2);
    CHECK(h.orientation.srow[0][3] == 10.0f);
    CHECK(h.orientation.srow[2][2] == 2.0f);
}

TEST_CASE("specific malformed headers") {
    const std::vector<std::uint8_t> good = valid_file();
    auto code_of = [](std::vector<std::uint8_t> b) {
        try {
            parse_nifti(b);
        } catch (const NiftiError& e) {
            return e.code();
        }
        FAIL("parse accepted a malformed file");
        return NiftiErrorCode::io;
    };
    auto b = good;
    put<std::int32_t>(b, 0, 540);
    CHECK(code_of(b) == NiftiErrorCode::bad_header_size);
    b = good;
    std::memcpy(b.data() + 344, "ni1\0", 4);
    CHECK(code_of(b) == NiftiErrorCode::bad_magic);
    b = good;
    put<std::int16_t>(b, 70, 1024);
    CHECK(code_of(b) == NiftiErrorCode::unsupported_datatype);
    b = good;
    put<std::int16_t>(b, 42, 0);
    CHECK(code_of(b) == NiftiErrorCode::bad_dimensions);
    b = good;
    b.resize(b.size() - 5);
    CHECK(code_of(b) == NiftiErrorCode::truncated);
    CHECK(code_of(std::vector<std::uint8_t>(good.begin(), good.begin() + 100)) == NiftiErrorCode::truncated);
    CHECK_THROWS_AS(read_nifti(scratch("does_not_exist.nii")), NiftiError);
}

TEST_CASE("malformed-header corpus: 100 mutations, all rejected") {
    const std::vector<std::uint8_t> good = valid_file();
    std::mt19937_64 rng(2024);
    const std::int16_t bad_types[] = {0, 1, 3, 5, 7, 32, 128, 256, 511, 768, 1024, 1536, 2304, -16};
    int rejected = 0;
    for (int n = 0; n < 100; ++n) {
        auto b = good;
        switch (n % 7) {
            case 0: put<std::int32_t>(b, 0, static_cast<std::int32_t>(rng() % 100000) + 349); break;
            case 1: b[344 + rng() % 3] ^= static_cast<std::uint8_t>(1 + rng() % 255); break;
            case 2: put<std::int16_t>(b, 40, static_cast<std::int16_t>(8 + rng() % 200)); break;
            case 3: put<std::int16_t>(b, 42 + 2 * (rng() % 3), static_cast<std::int16_t>(-static_cast<int>(rng() % 300))); break;
            case 4: put<std::int16_t>(b, 42 + 2 * (rng() % 3), static_cast<std::int16_t>(100 + rng() % 30000)); break;
            case 5: put<std::int16_t>(b, 70, bad_types[rng() % std::size(bad_types)]); break;
            case 6: b.resize(348 + rng() % (b.size() - 349)); break;
        }
        try {
            parse_nifti(b);
        } catch (const NiftiError&) {
            ++rejected;
        }
    }
    CHECK(rejected == 100);
}

TEST_CASE("random byte corruption never escapes as anything but NiftiError") {
    const std::vector<std::uint8_t> good = valid_file();
    std::mt19937_64 rng(99);
    for (int n = 0; n < 2000; ++n) {
        auto b = good;
        const int flips = 1 + static_cast<int>(rng() % 6);
        for (int f = 0; f < flips; ++f) b[rng() % 352] = static_cast<std::uint8_t>(rng());
        try {
            parse_nifti(b);
        } catch (const NiftiError&) {
        }
    }
    CHECK(true);
}
