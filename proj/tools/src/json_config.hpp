#pragma once

// CLI11 config reader for JSON files.
//
// Keys are option long names without dashes. A top-level object named after the active
// subcommand holds options for that subcommand; other flat keys go to the subcommand too,
// except the global ones (threads, json, float64). Sections for other subcommands are
// ignored, so one file can serve several commands.

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace diffeo::cli {

class JsonConfig : public CLI::Config {
public:
    JsonConfig(std::string active, std::set<std::string> subcommands, std::set<std::string> globals)
        : active_(std::move(active)), subcommands_(std::move(subcommands)), globals_(std::move(globals)) {}

    std::string to_config(const CLI::App*, bool, bool, std::string) const override {
        return "{}";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        try {
            input >> j;
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConversionError(std::string("config: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config: top level must be a JSON object");
        std::vector<CLI::ConfigItem> items;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (subcommands_.count(it.key())) {
                if (it.key() != active_) continue;
                if (!it->is_object())
                    throw CLI::ConversionError("config: section '" + it.key() + "' must be an object");
                for (auto sub = it->begin(); sub != it->end(); ++sub)
                    items.push_back(item(sub.key(), *sub, {active_}));
            } else if (globals_.count(it.key()) || active_.empty()) {
                items.push_back(item(it.key(), *it, {}));
            } else {
                items.push_back(item(it.key(), *it, {active_}));
            }
        }
        return items;
    }

private:
    static std::string scalar(const nlohmann::json& v, const std::string& name) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number()) return v.dump();
        throw CLI::ConversionError("config: unsupported value for '" + name + "'");
    }

    static CLI::ConfigItem item(const std::string& name, const nlohmann::json& v,
                                std::vector<std::string> parents) {
        CLI::ConfigItem out;
        out.name = name;
        out.parents = std::move(parents);
        if (v.is_array())
            for (const auto& e : v) out.inputs.push_back(scalar(e, name));
        else
            out.inputs = {scalar(v, name)};
        return out;
    }

    std::string active_;
    std::set<std::string> subcommands_;
    std::set<std::string> globals_;
};

}  // namespace diffeo::cli
