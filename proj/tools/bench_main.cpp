#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "probenorm/errors.hpp"
#include "probenorm/experiment.hpp"

namespace {

bool parse_env_seed(const char* text, std::uint64_t& seed) {
    std::size_t used = 0;
    try {
        seed = std::stoull(text, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == std::string(text).size();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probe-alignment benchmark runner"};

    std::string spec_path;
    std::string out_dir = "bench_out";
    std::string report_dir;
    std::uint64_t seed = 0;
    int jobs = 0;

    CLI::Option* spec_opt = app.add_option("--spec", spec_path, "benchmark spec file")
                                ->check(CLI::ExistingFile);
    app.add_option("--out", out_dir,
                   "output directory (results.csv, summary.csv, traces/)")
        ->capture_default_str();
    CLI::Option* seed_opt = app.add_option(
        "--seed", seed, "master seed; overrides the spec file and PROBENORM_SEED");
    app.add_option("--jobs", jobs, "worker threads, 0 = all hardware threads")
        ->capture_default_str();
    CLI::Option* report_opt = app.add_option(
        "--report", report_dir, "print a summary table for an existing output dir");

    CLI11_PARSE(app, argc, argv);

    try {
        if (report_opt->count() > 0) return probenorm::report(report_dir, std::cout);
        if (spec_opt->count() == 0) {
            std::cerr << "error: --spec FILE is required (or --report DIR)\n";
            return 2;
        }

        const probenorm::BenchSpec spec = probenorm::load_bench_spec(spec_path);

        std::uint64_t master = 42;
        if (const char* env = std::getenv("PROBENORM_SEED")) {
            if (!parse_env_seed(env, master)) {
                std::cerr << "error: PROBENORM_SEED='" << env
                          << "' is not an unsigned integer\n";
                return 2;
            }
        }
        if (spec.seed_set) master = spec.seed;
        if (seed_opt->count() > 0) master = seed;

        const int rc = probenorm::run_experiment(spec, out_dir, master, jobs);
        if (rc != 0) {
            std::cerr << "error: every run failed; see " << out_dir
                      << "/results.csv\n";
            return rc;
        }
        std::cout << "wrote " << out_dir << "/results.csv, " << out_dir
                  << "/summary.csv (seed " << master << ")\n\n";
        return probenorm::report(out_dir, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
