#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "diffeo/average.hpp"
#include "diffeo/diffgeo.hpp"
#include "diffeo/features.hpp"
#include "diffeo/svf.hpp"
#include "diffeo/synth.hpp"

using namespace diffeo;
namespace fs = std::filesystem;

TEST_CASE("moving stack channels are the diffgeo outputs") {
    const Grid3 g(10, 9, 8);
    const ScalarVolume img = phantom(g, 1);
    const VectorField phi = exponentiate(random_velocity(g, 1.0, 2));
    const FeatureStack s = moving_stack(img, phi);
    REQUIRE(s.channels.size() == 5);
    CHECK(s.channel_names == kFeatureChannelNames);
    CHECK(s.channels[0].data() == img.data());
    CHECK(s.channels[1].data() == jacobian_determinant(phi).data());
    const VectorField cv = curl(phi);
    for (int c = 0; c < 3; ++c) CHECK(s.channels[2 + c].data() == cv.component(c).data());
}

TEST_CASE("fixed stack is the mean monitor and ignores field order") {
    const Grid3 g(8, 8, 8);
    const ScalarVolume img = phantom(g, 1);
    std::vector<VectorField> phis;
    for (std::uint64_t s = 0; s < 3; ++s) phis.push_back(exponentiate(random_velocity(g, 0.7, s)));
    const FeatureStack a = fixed_stack(img, phis);
    const FeatureStack b = fixed_stack(img, {phis[2], phis[0], phis[1]});
    for (int c = 0; c < 5; ++c) CHECK(a.channels[c].data() == b.channels[c].data());
    CHECK(a.channels[1].data() == average_monitor(phis).f0.data());
    CHECK_THROWS_AS(fixed_stack(img, {}), InvalidArgument);
}

TEST_CASE("export writes a 5-channel NIfTI and a sidecar") {
    const Grid3 g(6, 6, 6);
    const FeatureStack s = moving_stack(phantom(g, 3), exponentiate(random_velocity(g, 0.5, 4)));
    const fs::path dir = fs::temp_directory_path() / "diffeo_feature_tests";
    fs::create_directories(dir);
    const fs::path out = dir / "stack.nii.gz";
    WriteOptions w;
    w.float64 = true;
    const fs::path sidecar = export_stack(s, out, w);
    CHECK(sidecar == dir / "stack.json");

    const NiftiImage raw = read_nifti(out);
    REQUIRE(raw.header.dims.size() == 4);
    CHECK(raw.header.dims[3] == 5);

    std::ifstream in(sidecar);
    const auto meta = nlohmann::json::parse(in);
    CHECK(meta.at("channels").get<std::vector<std::string>>() == kFeatureChannelNames);

    const FeatureStack back = import_stack(out);
    CHECK(back.channel_names == s.channel_names);
    for (int c = 0; c < 5; ++c) CHECK(back.channels[c].data() == s.channels[c].data());
}

TEST_CASE("sidecar path naming") {
    CHECK(sidecar_path("a/b.nii.gz") == fs::path("a/b.json"));
    CHECK(sidecar_path("b.nii") == fs::path("b.json"));
}
