// blockcorr: figure sweeps, property suite and raw dumps for the blockage
// correlation model. Exit status: 0 ok, 1 invalid input, 2 property failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "blockcorr/experiment.hpp"

namespace fs = std::filesystem;
using namespace blockcorr;

namespace {

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> ensemble;
    std::optional<int> jobs;
};

int run(Command command, const Options& opt) {
    ExperimentConfig cfg = load_config(command, opt.config);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.ensemble) cfg.ensemble = *opt.ensemble;
    if (opt.jobs) cfg.jobs = *opt.jobs;
    cfg.validate();

    const Report report = run_command(cfg);
    fs::create_directories(opt.out);
    for (const auto& table : report.tables) {
        const auto path = fs::path(opt.out) / (table.name + ".csv");
        std::ofstream file(path, std::ios::binary);
        if (!file) throw ValidationError({"cannot write " + path.string()});
        table.write_csv(file);
        std::cout << "wrote " << path.string() << " (" << table.rows.size() << " rows)\n";
    }
    for (const auto& note : report.notes) std::cout << note << '\n';
    return report.failed ? 2 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal interference correlation under mobility and blockage"};
    app.require_subcommand(1);

    Options opt;
    std::optional<Command> chosen;
    const std::pair<const char*, const char*> verbs[] = {
        {"fig1", "mean and standard deviation of interference per location"},
        {"fig2", "correlation coefficients per location and variant"},
        {"fig3", "correlation coefficients per user count and speed"},
        {"properties", "correlation property suite"},
        {"displacement", "dump displacement laws of the mobility chain"},
        {"simulate", "dump raw simulated interference series"},
    };
    for (const auto& [name, help] : verbs) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config, "key = value configuration file");
        sub->add_option("--out", opt.out, "output directory")->capture_default_str();
        sub->add_option("--seed", opt.seed, "master seed");
        sub->add_option("--ensemble", opt.ensemble, "number of simulated realizations");
        sub->add_option("--jobs", opt.jobs, "worker threads (0 = all cores)");
        sub->callback([&chosen, n = std::string(name)] { chosen = parse_command(n); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        return run(*chosen, opt);
    } catch (const ValidationError& e) {
        std::cerr << "invalid configuration:\n";
        for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
