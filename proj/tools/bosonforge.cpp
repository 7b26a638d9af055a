#include "bosonforge/runner.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

namespace {

using bosonforge::io::json;

// Applies a dotted key path ("optimizer.epsilon") onto the config document.
void apply_override(json& cfg, const std::string& key, const std::string& value) {
    json* node = &cfg;
    size_t start = 0;
    for (;;) {
        const size_t dot = key.find('.', start);
        const std::string part = key.substr(start, dot - start);
        if (dot == std::string::npos) {
            json parsed;
            try {
                parsed = json::parse(value);
            } catch (...) {
                parsed = value;  // plain string
            }
            (*node)[part] = parsed;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bosonforge: pulse design, simulation and analysis for bosonic logical states"};
    app.require_subcommand(1);

    const std::vector<std::string> tasks = {"optimize",  "propagate",     "tomography",
                                            "reconstruct", "analyze",     "compare-gates",
                                            "error-budget"};
    std::string config_path;
    for (const auto& t : tasks) {
        auto* sub = app.add_subcommand(t, "run the " + t + " task");
        sub->add_option("config", config_path, "JSON run configuration");
        sub->allow_extras();
    }

    CLI11_PARSE(app, argc, argv);
    auto* sub = app.get_subcommands().front();

    json cfg = json::object();
    if (!config_path.empty()) {
        try {
            cfg = bosonforge::io::read_json_file(config_path);
        } catch (const std::exception& e) {
            std::cerr << "validation error: " << e.what() << "\n";
            return 3;
        }
    }
    cfg["task"] = sub->get_name();

    // Remaining "--key.path value" pairs override config keys.
    const auto extras = sub->remaining();
    for (size_t i = 0; i < extras.size(); ++i) {
        std::string key = extras[i];
        if (key.rfind("--", 0) != 0 || i + 1 >= extras.size()) {
            std::cerr << "validation error: expected --key.path value pairs, got '" << key
                      << "'\n";
            return 3;
        }
        apply_override(cfg, key.substr(2), extras[++i]);
    }

    try {
        return bosonforge::runner::run(bosonforge::runner::parse_config(cfg));
    } catch (const std::exception& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    }
}
