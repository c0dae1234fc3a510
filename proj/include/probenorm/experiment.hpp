#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "probenorm/bo.hpp"

namespace probenorm {

enum class RotationMode { OutPlane, InPlane, TwoAxis };

const char* mode_name(RotationMode m);

struct SurfaceSpec {
    std::string name;
    ContactSurface::Kind kind = ContactSurface::Kind::Planar;
    double tilt_deg = 3.0;
    char tilt_axis = 'a';  // 'x', 'y', or 'a' = match the searched axis
    double max_deflection_deg = 5.0;
    std::uint64_t field_seed = 1;
    std::filesystem::path mesh_path;
    double contact_x = 0.0, contact_y = 0.0;
};

// A parsed benchmark description: the grid of surfaces x modes x limits x
// lambdas x tips, plus run parameters shared by every cell.
struct BenchSpec {
    std::uint64_t seed = 42;
    bool seed_set = false;  // an explicit `seed =` line beats the environment
    int repeats = 5;
    std::vector<RotationMode> modes{RotationMode::OutPlane, RotationMode::InPlane};
    std::vector<std::pair<double, double>> limits{{-15.0, 15.0}};
    std::vector<double> lambdas{0.3};
    double epsilon = 1.0;
    double xi = 0.45;
    double desired_force = 5.0;
    double sensor_noise = 0.05;
    double friction = 0.0;
    std::vector<ProbeTip> tips{{TipKind::Linear, 0.04}};
    int n_init = 3;
    int n_max = 50;
    int min_iters = 10;
    double ei_stop = 1e-6;
    int refit_restarts = 2;
    int grid_density = 0;
    int refine_steps = 20;
    bool printed_variance_ei = false;
    bool best_by_posterior_mean = false;
    std::vector<SurfaceSpec> surfaces;
};

// Parses the documented key=value / [surface NAME] format.  Unknown keys,
// malformed values, inverted limits and missing mesh files all raise
// ParseError with `name:line:` prefixes; mesh paths resolve against base_dir.
BenchSpec parse_bench_spec(std::istream& in, const std::string& name,
                           const std::filesystem::path& base_dir);
BenchSpec load_bench_spec(const std::filesystem::path& path);

// Identifies one grid cell in the output files.
struct CellMeta {
    std::string surface;
    RotationMode mode = RotationMode::OutPlane;
    double lower_deg = 0.0, upper_deg = 0.0;
    double lambda = 0.3;
    std::string tip;  // e.g. "linear-0.04"
};

// Expands the spec into run_batch cells (surface x mode x limits x lambda x
// tip, in that nesting order).  Rough surfaces get a re-seeded deflection
// field per repeat.
std::vector<BatchCell> build_cells(const BenchSpec& spec, std::vector<CellMeta>* meta);

// Runs the whole grid and writes results.csv, summary.csv and
// traces/<cell>_r<k>.csv under out_dir.  Returns 0, or 1 when every run
// failed.  Output bytes depend only on the spec and master_seed.
int run_experiment(const BenchSpec& spec, const std::filesystem::path& out_dir,
                   std::uint64_t master_seed, int jobs);

// Renders summary.csv from a previous run as aligned text tables (one block
// per mode/lambda/tip, surfaces down, limits across).
int report(const std::filesystem::path& out_dir, std::ostream& out);

}  // namespace probenorm
