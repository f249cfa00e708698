#include <iostream>
#include <set>

#include "app.hpp"
#include "diffeo/parallel.hpp"
#include "json_config.hpp"

namespace {

using diffeo::cli::json;

void print_plain(const json& report, const std::string& prefix = "") {
    for (auto it = report.begin(); it != report.end(); ++it) {
        if (it->is_object()) {
            if (prefix.empty()) print_plain(*it, it.key() + ".");
        } else if (!it->is_array()) {
            std::cout << prefix << it.key() << ": " << (it->is_string() ? it->get<std::string>() : it->dump())
                      << '\n';
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    using namespace diffeo::cli;

    CLI::App app{"Diffeomorphic deformation-field toolkit", "diffeo"};
    app.require_subcommand(1);
    app.fallthrough();
    app.failure_message(CLI::FailureMessage::help);
    // Inherited by subcommands, so it must come before they are added.
    app.allow_config_extras(CLI::config_extras_mode::error);

    Context ctx;
    app.add_flag("--json", ctx.json, "Print the report as JSON");
    app.add_flag("--float64", ctx.float64, "Write NIfTI outputs as float64 (default float32)");
    app.add_option("--threads", ctx.threads, "Worker threads, 0 = all cores")
        ->envname("DIFFEO_THREADS")
        ->check(CLI::NonNegativeNumber);

    Registry registry;
    add_field_commands(app, registry, ctx);
    add_solver_commands(app, registry, ctx);
    add_misc_commands(app, registry, ctx);

    std::set<std::string> names;
    for (const auto& [name, runner] : registry) names.insert(name);
    std::string active;
    for (int i = 1; i < argc && active.empty(); ++i)
        if (names.count(argv[i])) active = argv[i];
    app.set_config("--config", "", "JSON file with option defaults (flags take precedence)");
    app.config_formatter(std::make_shared<JsonConfig>(active, names, std::set<std::string>{"threads", "json", "float64"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    diffeo::set_thread_count(ctx.threads);
    try {
        const json report = registry.at(app.get_subcommands().front()->get_name())();
        if (ctx.json)
            std::cout << report.dump(2) << '\n';
        else
            print_plain(report);
    } catch (const diffeo::Error& e) {
        std::cerr << "diffeo: error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "diffeo: error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
