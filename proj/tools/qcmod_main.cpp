#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>

#include "qcmod/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qcmod: quasiconformal module and boundary-regularity experiments"};
    app.set_version_flag("--version", qcmod::kVersion);

    std::string config_path;
    qcmod::RunOptions opts;
    app.add_option("--config", config_path, "experiment batch (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--out", opts.out_dir, "output directory for reports and CSV data");
    app.add_option("--jobs", opts.jobs, "max concurrent experiments")->check(CLI::PositiveNumber);
    app.add_option("--seed", opts.seed, "seed recorded for sampled experiments");
    app.add_flag("--verbose", opts.verbose, "print per-experiment details");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const qcmod::ExperimentConfig config = qcmod::ExperimentConfig::from_file(config_path);
        const qcmod::ExperimentReport report = qcmod::run(config, opts);
        for (const auto& r : report.results) {
            std::printf("%-4s %-14s %s (%.0f ms)\n", r.pass ? "ok" : "FAIL", r.kind.c_str(),
                        r.name.c_str(), r.wall_ms);
            if ((!r.pass || opts.verbose))
                for (const auto& f : r.failures) std::printf("     - %s\n", f.c_str());
            if (opts.verbose)
                for (const auto& a : r.artifacts) std::printf("     > %s\n", a.c_str());
        }
        std::printf("%zu experiment(s), %s; report: %s/report.json\n", report.results.size(),
                    report.all_pass() ? "all passed" : "FAILURES", opts.out_dir.c_str());
        return report.all_pass() ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
