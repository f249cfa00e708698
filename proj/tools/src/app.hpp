#pragma once

#include <functional>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "diffeo/nifti_io.hpp"
#include "diffeo/varsolve.hpp"

namespace diffeo::cli {

using json = nlohmann::json;

// Global flags shared by every subcommand.
struct Context {
    bool json = false;
    bool float64 = false;
    int threads = 0;

    WriteOptions write_options() const {
        WriteOptions w;
        w.float64 = float64;
        return w;
    }
};

// Each subcommand registers a runner returning its report.
using Runner = std::function<json()>;
using Registry = std::map<std::string, Runner>;

void add_field_commands(CLI::App& app, Registry& reg, const Context& ctx);
void add_solver_commands(CLI::App& app, Registry& reg, const Context& ctx);
void add_misc_commands(CLI::App& app, Registry& reg, const Context& ctx);

json grid_json(const Grid3& g);
json solve_report_json(const SolveReport& r);

// Writes a report file when `path` is non-empty.
void write_report(const json& report, const std::string& path);

}  // namespace diffeo::cli
