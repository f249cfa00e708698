#include "diffeo/features.hpp"

#include <fstream>

#include <json.hpp>

#include "diffeo/average.hpp"
#include "diffeo/diffgeo.hpp"

namespace diffeo {

namespace {

FeatureStack assemble(const ScalarVolume& image, const ScalarVolume& jd, const VectorField& cv) {
    FeatureStack stack;
    stack.add(kFeatureChannelNames[0], image);
    stack.add(kFeatureChannelNames[1], jd);
    for (int c = 0; c < 3; ++c) stack.add(kFeatureChannelNames[2 + c], cv.component(c));
    return stack;
}

}  // namespace

FeatureStack moving_stack(const ScalarVolume& image, const VectorField& phi) {
    require_same_grid(image.grid(), phi.grid(), "moving_stack");
    return assemble(image, jacobian_determinant(phi), curl(phi));
}

FeatureStack fixed_stack(const ScalarVolume& image, const std::vector<VectorField>& phis) {
    if (phis.empty()) throw InvalidArgument("fixed_stack needs at least one transformation");
    require_same_grid(image.grid(), phis.front().grid(), "fixed_stack");
    const MonitorPair mean = average_monitor(phis);
    return assemble(image, mean.f0, mean.g0);
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    std::string s = path.string();
    for (const std::string ext : {".gz", ".nii"})
        if (s.size() >= ext.size() && s.compare(s.size() - ext.size(), ext.size(), ext) == 0)
            s.erase(s.size() - ext.size());
    return s + ".json";
}

std::filesystem::path export_stack(const FeatureStack& stack, const std::filesystem::path& path,
                                   const WriteOptions& opts) {
    stack.validate();
    std::vector<const ScalarVolume*> channels;
    for (const auto& ch : stack.channels) channels.push_back(&ch);
    write_multichannel(stack.grid, channels, path, opts);

    nlohmann::json meta;
    meta["channels"] = stack.channel_names;
    meta["dims"] = {stack.grid.nx(), stack.grid.ny(), stack.grid.nz(), stack.channels.size()};
    meta["datatype"] = opts.float64 ? "float64" : "float32";
    const auto sidecar = sidecar_path(path);
    std::ofstream out(sidecar);
    out << meta.dump(2) << '\n';
    if (!out) throw IoError("cannot write " + sidecar.string());
    return sidecar;
}

FeatureStack import_stack(const std::filesystem::path& path) {
    auto channels = read_multichannel(path);
    std::vector<std::string> names;
    const auto sidecar = sidecar_path(path);
    if (std::ifstream in(sidecar); in) {
        try {
            names = nlohmann::json::parse(in).at("channels").get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception& e) {
            throw IoError(sidecar.string() + ": " + e.what());
        }
    }
    if (names.size() != channels.size()) {
        names.clear();
        for (std::size_t c = 0; c < channels.size(); ++c) names.push_back("ch" + std::to_string(c));
    }
    FeatureStack stack;
    for (std::size_t c = 0; c < channels.size(); ++c) stack.add(names[c], std::move(channels[c]));
    return stack;
}

}  // namespace diffeo
