// workbench <kind> --config <json> [--out dir] [--seed u64]
// workbench list [--json]

#include "fracwb/harness.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    using namespace fracwb;
    CLI::App app{"fractional operator workbench"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    bool as_json = false;

    auto* list = app.add_subcommand("list", "print the experiment catalog");
    list->add_flag("--json", as_json, "emit the catalog as JSON");

    std::vector<CLI::App*> kinds;
    for (const char* k : {"apply", "power", "transform", "assemble", "solve", "audit", "study"}) {
        auto* sc = app.add_subcommand(k, std::string("run a '") + k + "' experiment");
        sc->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sc->add_option("--out", out_dir, "output directory");
        sc->add_option("--seed", seed, "RNG seed (overrides the config)");
        kinds.push_back(sc);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    if (list->parsed()) {
        if (as_json) {
            std::cout << catalog_to_json(experiment_catalog()).dump(2) << "\n";
        } else {
            for (const auto& e : experiment_catalog())
                std::cout << e.kind << "/" << e.name << "  [" << e.op << "]  " << e.anchor << "\n";
        }
        return kExitPass;
    }

    for (auto* sc : kinds) {
        if (!sc->parsed()) continue;
        try {
            auto cfg = ExperimentConfig::load(config_path);
            if (!cfg.kind.empty() && cfg.kind != sc->get_name()) {
                std::cerr << "config kind '" << cfg.kind << "' does not match subcommand '" << sc->get_name() << "'\n";
                return kExitUsage;
            }
            cfg.kind = sc->get_name();
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (sc->count("--seed")) cfg.seed = seed;
            auto res = run(cfg);
            std::cout << res.report.dump(2) << "\n";
            if (res.exit_code != kExitPass) std::cerr << "audit failed\n";
            return res.exit_code;
        } catch (const std::invalid_argument& e) {
            std::cerr << "usage error: " << e.what() << "\n";
            return kExitUsage;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitAudit;
        }
    }
    return kExitUsage;
}
