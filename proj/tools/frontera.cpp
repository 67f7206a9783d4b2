#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "frontera/harness.hpp"

namespace {

void print_error(const std::string& type, const std::string& message) {
    nlohmann::ordered_json j;
    j["error"]["type"] = type;
    j["error"]["message"] = message;
    std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"frontera: nonlocal free-boundary SIS simulator and spectral threshold toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    frontera::RunOptions opts;

    for (const std::string& name : frontera::known_subcommands()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_flag("--snapshots", opts.snapshots, "emit field snapshots");
        sub->add_option("--seed", opts.seed, "seed recorded in the run summary");
        sub->add_flag("--dump-operator", opts.dump_operator, "export the assembled operator as CSV");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        frontera::Config cfg = frontera::Config::from_file(config_path);
        if (opts.seed == 0) opts.seed = static_cast<long>(cfg.get_double("seed", 0.0));
        const frontera::RunRecord rec = frontera::run_subcommand(sub, cfg, out_dir, opts);
        std::cout << rec.summary.dump(2) << "\n";
        return 0;
    } catch (const std::invalid_argument& e) {
        if (std::string(e.what()).rfind("usage:", 0) == 0) {
            print_error("usage", e.what());
            return 2;
        }
        print_error("invalid_argument", e.what());
        return 1;
    } catch (const frontera::ConfigError& e) {
        print_error("config", e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("runtime", e.what());
        return 1;
    }
}
