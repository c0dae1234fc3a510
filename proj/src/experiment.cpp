#include "probenorm/experiment.hpp"

#include <algorithm>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "probenorm/errors.hpp"

namespace probenorm {

namespace {

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    const int n = std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return std::string(buf, buf + std::max(0, std::min(n, int(sizeof buf) - 1)));
}

std::string trim(const std::string& s) {
    const std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& what) {
    throw ParseError(fmt("%s:%d: %s", name.c_str(), line, what.c_str()));
}

double parse_double(const std::string& v, const std::string& name, int line) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        fail(name, line, "'" + v + "' is not a number");
    }
    if (used != v.size() || !std::isfinite(x))
        fail(name, line, "'" + v + "' is not a number");
    return x;
}

long long parse_int(const std::string& v, const std::string& name, int line) {
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        fail(name, line, "'" + v + "' is not an integer");
    }
    if (used != v.size()) fail(name, line, "'" + v + "' is not an integer");
    return x;
}

std::uint64_t parse_seed(const std::string& v, const std::string& name, int line) {
    std::size_t used = 0;
    std::uint64_t x = 0;
    try {
        x = std::stoull(v, &used);
    } catch (const std::exception&) {
        fail(name, line, "'" + v + "' is not a seed (unsigned integer)");
    }
    if (used != v.size()) fail(name, line, "'" + v + "' is not a seed (unsigned integer)");
    return x;
}

bool parse_bool(const std::string& v, const std::string& name, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(name, line, "'" + v + "' is not a boolean (true/false)");
}

std::pair<double, double> parse_limit(const std::string& tok, const std::string& name,
                                      int line) {
    double lo = 0.0, hi = 0.0;
    char tail = 0;
    if (std::sscanf(tok.c_str(), "[%lf,%lf]%c", &lo, &hi, &tail) != 2)
        fail(name, line, "limit '" + tok + "' must look like [lo,hi]");
    if (!(lo < hi)) fail(name, line, "limit '" + tok + "': lower < upper required");
    if (lo < -90.0 || hi > 90.0)
        fail(name, line, "limit '" + tok + "' outside [-90, 90]");
    return {lo, hi};
}

ProbeTip parse_tip(const std::string& v, const std::string& name, int line) {
    const std::vector<std::string> parts = split_ws(v);
    if (parts.size() != 2)
        fail(name, line, "tip must be 'linear WIDTH_M' or 'convex RADIUS_M'");
    ProbeTip tip;
    if (parts[0] == "linear")
        tip.kind = TipKind::Linear;
    else if (parts[0] == "convex")
        tip.kind = TipKind::Convex;
    else
        fail(name, line, "unknown tip kind '" + parts[0] + "'");
    tip.size_m = parse_double(parts[1], name, line);
    if (!(tip.size_m > 0.0)) fail(name, line, "tip size must be positive");
    return tip;
}

std::string tip_label(const ProbeTip& tip) {
    return fmt("%s-%g", tip.kind == TipKind::Linear ? "linear" : "convex", tip.size_m);
}

std::string sanitize_csv(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

}  // namespace

const char* mode_name(RotationMode m) {
    switch (m) {
        case RotationMode::OutPlane: return "out-plane";
        case RotationMode::InPlane: return "in-plane";
        case RotationMode::TwoAxis: return "2d";
    }
    return "unknown";
}

BenchSpec parse_bench_spec(std::istream& in, const std::string& name,
                           const std::filesystem::path& base_dir) {
    BenchSpec spec;
    bool limits_set = false, lambdas_set = false, tips_set = false;
    SurfaceSpec* current = nullptr;
    std::vector<bool> kind_set;

    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (const std::size_t hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;

        if (line.front() == '[') {
            std::istringstream hs(line.substr(1));
            std::string word, sname, close;
            if (!(hs >> word) || word != "surface" || !(hs >> sname) || sname.empty() ||
                sname.back() != ']' || (hs >> close))
                fail(name, line_no, "expected '[surface NAME]'");
            sname.pop_back();
            if (sname.empty()) fail(name, line_no, "surface needs a name");
            for (char c : sname)
                if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
                    fail(name, line_no, "surface name '" + sname +
                                            "' may use letters, digits, '_' and '-'");
            for (const SurfaceSpec& s : spec.surfaces)
                if (s.name == sname)
                    fail(name, line_no, "duplicate surface '" + sname + "'");
            spec.surfaces.push_back(SurfaceSpec{});
            spec.surfaces.back().name = sname;
            current = &spec.surfaces.back();
            kind_set.push_back(false);
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail(name, line_no, "expected 'key = value' or '[surface NAME]'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(name, line_no, "missing key before '='");
        if (value.empty()) fail(name, line_no, "missing value for '" + key + "'");

        if (current) {
            if (key == "kind") {
                if (value == "planar")
                    current->kind = ContactSurface::Kind::Planar;
                else if (value == "tilted")
                    current->kind = ContactSurface::Kind::Tilted;
                else if (value == "rough")
                    current->kind = ContactSurface::Kind::Rough;
                else if (value == "mesh")
                    current->kind = ContactSurface::Kind::Mesh;
                else
                    fail(name, line_no, "unknown surface kind '" + value + "'");
                kind_set.back() = true;
            } else if (key == "tilt_deg") {
                current->tilt_deg = parse_double(value, name, line_no);
                if (std::abs(current->tilt_deg) >= 45.0)
                    fail(name, line_no, "tilt_deg must be inside (-45, 45)");
            } else if (key == "tilt_axis") {
                if (value == "x" || value == "y")
                    current->tilt_axis = value[0];
                else if (value == "auto")
                    current->tilt_axis = 'a';
                else
                    fail(name, line_no, "tilt_axis must be x, y or auto");
            } else if (key == "max_deflection_deg") {
                current->max_deflection_deg = parse_double(value, name, line_no);
                if (current->max_deflection_deg < 0.0 ||
                    current->max_deflection_deg > 10.0)
                    fail(name, line_no, "max_deflection_deg must be in [0, 10]");
            } else if (key == "field_seed") {
                current->field_seed = parse_seed(value, name, line_no);
            } else if (key == "path") {
                current->mesh_path = base_dir / value;
                if (!std::filesystem::exists(current->mesh_path))
                    fail(name, line_no,
                         "mesh file '" + current->mesh_path.string() + "' does not exist");
            } else if (key == "contact") {
                const std::vector<std::string> parts = split_ws(value);
                if (parts.size() != 2)
                    fail(name, line_no, "contact needs two coordinates (x y, meters)");
                current->contact_x = parse_double(parts[0], name, line_no);
                current->contact_y = parse_double(parts[1], name, line_no);
            } else {
                fail(name, line_no, "unknown key '" + key + "' in surface section");
            }
            continue;
        }

        if (key == "seed") {
            spec.seed = parse_seed(value, name, line_no);
            spec.seed_set = true;
        } else if (key == "repeats") {
            const long long r = parse_int(value, name, line_no);
            if (r < 1) fail(name, line_no, "repeats must be >= 1");
            spec.repeats = static_cast<int>(r);
        } else if (key == "mode") {
            if (value == "out-plane")
                spec.modes = {RotationMode::OutPlane};
            else if (value == "in-plane")
                spec.modes = {RotationMode::InPlane};
            else if (value == "both")
                spec.modes = {RotationMode::OutPlane, RotationMode::InPlane};
            else if (value == "2d")
                spec.modes = {RotationMode::TwoAxis};
            else
                fail(name, line_no,
                     "mode must be out-plane, in-plane, both or 2d (got '" + value + "')");
        } else if (key == "limits") {
            spec.limits.clear();
            for (const std::string& tok : split_ws(value))
                spec.limits.push_back(parse_limit(tok, name, line_no));
            limits_set = true;
        } else if (key == "lambda") {
            spec.lambdas.clear();
            for (const std::string& tok : split_ws(value)) {
                const double l = parse_double(tok, name, line_no);
                if (l < 0.0) fail(name, line_no, "lambda must be >= 0");
                spec.lambdas.push_back(l);
            }
            lambdas_set = true;
        } else if (key == "epsilon") {
            spec.epsilon = parse_double(value, name, line_no);
            if (!(spec.epsilon > 0.0)) fail(name, line_no, "epsilon must be > 0");
        } else if (key == "xi") {
            spec.xi = parse_double(value, name, line_no);
            if (spec.xi < 0.0) fail(name, line_no, "xi must be >= 0");
        } else if (key == "desired_force") {
            spec.desired_force = parse_double(value, name, line_no);
            if (!(spec.desired_force > 0.0))
                fail(name, line_no, "desired_force must be > 0");
        } else if (key == "sensor_noise") {
            spec.sensor_noise = parse_double(value, name, line_no);
            if (spec.sensor_noise < 0.0) fail(name, line_no, "sensor_noise must be >= 0");
        } else if (key == "friction") {
            spec.friction = parse_double(value, name, line_no);
            if (spec.friction < 0.0) fail(name, line_no, "friction must be >= 0");
        } else if (key == "tip") {
            if (!tips_set) spec.tips.clear();
            spec.tips.push_back(parse_tip(value, name, line_no));
            tips_set = true;
        } else if (key == "n_init") {
            spec.n_init = static_cast<int>(parse_int(value, name, line_no));
            if (spec.n_init < 1) fail(name, line_no, "n_init must be >= 1");
        } else if (key == "n_max") {
            spec.n_max = static_cast<int>(parse_int(value, name, line_no));
        } else if (key == "min_iters") {
            spec.min_iters = static_cast<int>(parse_int(value, name, line_no));
            if (spec.min_iters < 0) fail(name, line_no, "min_iters must be >= 0");
        } else if (key == "ei_stop") {
            spec.ei_stop = parse_double(value, name, line_no);
            if (spec.ei_stop < 0.0) fail(name, line_no, "ei_stop must be >= 0");
        } else if (key == "refit_restarts") {
            spec.refit_restarts = static_cast<int>(parse_int(value, name, line_no));
            if (spec.refit_restarts < 0)
                fail(name, line_no, "refit_restarts must be >= 0");
        } else if (key == "grid_density") {
            spec.grid_density = static_cast<int>(parse_int(value, name, line_no));
            if (spec.grid_density != 0 && spec.grid_density < 16)
                fail(name, line_no, "grid_density must be 0 (auto) or >= 16");
        } else if (key == "refine_steps") {
            spec.refine_steps = static_cast<int>(parse_int(value, name, line_no));
            if (spec.refine_steps < 0) fail(name, line_no, "refine_steps must be >= 0");
        } else if (key == "printed_variance_ei") {
            spec.printed_variance_ei = parse_bool(value, name, line_no);
        } else if (key == "best_by_posterior_mean") {
            spec.best_by_posterior_mean = parse_bool(value, name, line_no);
        } else {
            fail(name, line_no, "unknown key '" + key + "'");
        }
    }

    if (spec.surfaces.empty())
        throw ParseError(name + ": spec declares no [surface NAME] section");
    for (std::size_t i = 0; i < spec.surfaces.size(); ++i) {
        const SurfaceSpec& s = spec.surfaces[i];
        if (!kind_set[i])
            throw ParseError(name + ": surface '" + s.name + "' is missing 'kind ='");
        if (s.kind == ContactSurface::Kind::Mesh && s.mesh_path.empty())
            throw ParseError(name + ": mesh surface '" + s.name + "' needs 'path ='");
    }
    if (spec.n_max <= spec.n_init)
        throw ParseError(name + ": n_max must exceed n_init");
    (void)limits_set;
    (void)lambdas_set;
    return spec;
}

BenchSpec load_bench_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open spec file");
    return parse_bench_spec(in, path.string(), path.parent_path());
}

std::vector<BatchCell> build_cells(const BenchSpec& spec, std::vector<CellMeta>* meta) {
    std::vector<BatchCell> cells;
    if (meta) meta->clear();

    // Meshes load once per surface spec; every cell then shares the data.
    std::map<std::string, TriangleMesh> meshes;
    for (const SurfaceSpec& s : spec.surfaces)
        if (s.kind == ContactSurface::Kind::Mesh)
            meshes.emplace(s.name, load_mesh(s.mesh_path));

    for (const SurfaceSpec& s : spec.surfaces) {
        for (const RotationMode mode : spec.modes) {
            for (const auto& [lo, hi] : spec.limits) {
                for (const double lambda : spec.lambdas) {
                    for (const ProbeTip& tip : spec.tips) {
                        BatchCell cell;
                        // The tilt axis follows the searched rotation unless
                        // pinned: a 1-D search can only null a tilt about its
                        // own axis.
                        char axis = s.tilt_axis;
                        if (axis == 'a')
                            axis = mode == RotationMode::InPlane ? 'y' : 'x';
                        switch (s.kind) {
                            case ContactSurface::Kind::Planar:
                                cell.surfaces.push_back(
                                    std::make_shared<const ContactSurface>(
                                        ContactSurface::planar(tip,
                                                               spec.sensor_noise)));
                                break;
                            case ContactSurface::Kind::Tilted:
                                cell.surfaces.push_back(
                                    std::make_shared<const ContactSurface>(
                                        ContactSurface::tilted(axis, s.tilt_deg, tip,
                                                               spec.sensor_noise)));
                                break;
                            case ContactSurface::Kind::Rough:
                                // Fresh field per repeat: dispersion then
                                // measures robustness across realizations.
                                for (int r = 0; r < spec.repeats; ++r)
                                    cell.surfaces.push_back(
                                        std::make_shared<const ContactSurface>(
                                            ContactSurface::rough(
                                                s.max_deflection_deg,
                                                derive_seed(s.field_seed, r), tip,
                                                spec.sensor_noise)));
                                break;
                            case ContactSurface::Kind::Mesh:
                                cell.surfaces.push_back(
                                    std::make_shared<const ContactSurface>(
                                        ContactSurface::mesh(meshes.at(s.name), tip,
                                                             spec.sensor_noise)));
                                break;
                        }

                        SearchSpace space;
                        if (mode == RotationMode::OutPlane ||
                            mode == RotationMode::TwoAxis)
                            space.axes.push_back(
                                {SearchAxis::Kind::OutPlane, lo, hi});
                        if (mode == RotationMode::InPlane ||
                            mode == RotationMode::TwoAxis)
                            space.axes.push_back({SearchAxis::Kind::InPlane, lo, hi});

                        BORunConfig cfg;
                        cfg.space = space;
                        cfg.objective = {lambda, spec.epsilon};
                        cfg.acquisition.xi = spec.xi;
                        cfg.acquisition.grid_density = spec.grid_density;
                        cfg.acquisition.refine_steps = spec.refine_steps;
                        cfg.acquisition.printed_variance_ei = spec.printed_variance_ei;
                        cfg.contact = {spec.desired_force, spec.friction};
                        cfg.contact_point =
                            cell.surfaces[0]->surface_point(s.contact_x, s.contact_y);
                        cfg.n_init = spec.n_init;
                        cfg.n_max = spec.n_max;
                        cfg.min_iters_before_stop = spec.min_iters;
                        cfg.ei_stop_rel = spec.ei_stop;
                        cfg.refit_restarts = spec.refit_restarts;
                        cfg.best_by_posterior_mean = spec.best_by_posterior_mean;
                        cell.config = cfg;

                        cell.label = fmt("%s/%s/[%g,%g]/lam%g/%s", s.name.c_str(),
                                         mode_name(mode), lo, hi, lambda,
                                         tip_label(tip).c_str());
                        cells.push_back(std::move(cell));
                        if (meta)
                            meta->push_back(
                                {s.name, mode, lo, hi, lambda, tip_label(tip)});
                    }
                }
            }
        }
    }
    return cells;
}

namespace {

std::string trace_file_name(const CellMeta& m, int repeat) {
    return fmt("%s_%s_%g_%g_lam%g_%s_r%d.csv", m.surface.c_str(), mode_name(m.mode),
               m.lower_deg, m.upper_deg, m.lambda, m.tip.c_str(), repeat);
}

}  // namespace

int run_experiment(const BenchSpec& spec, const std::filesystem::path& out_dir,
                   std::uint64_t master_seed, int jobs) {
    std::vector<CellMeta> meta;
    const std::vector<BatchCell> cells = build_cells(spec, &meta);
    const BatchResult batch = run_batch(cells, spec.repeats, master_seed, jobs);

    std::filesystem::create_directories(out_dir / "traces");

    std::ofstream results(out_dir / "results.csv", std::ios::binary);
    results << "surface,mode,lower_deg,upper_deg,lambda,tip,repeat,seed,status,"
               "angular_error_deg,best_objective,evaluations,"
               "acquisition_evaluations,stop_reason\n";
    bool any_ok = false;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (int r = 0; r < spec.repeats; ++r) {
            const RunOutcome& run = batch.runs[c][r];
            const CellMeta& m = meta[c];
            const std::uint64_t seed = derive_seed(master_seed, c, r);
            results << fmt("%s,%s,%g,%g,%g,%s,%d,%llu,", m.surface.c_str(),
                           mode_name(m.mode), m.lower_deg, m.upper_deg, m.lambda,
                           m.tip.c_str(), r, static_cast<unsigned long long>(seed));
            if (run.ok) {
                any_ok = true;
                results << fmt("ok,%.6f,%.9g,%d,%lld,%s\n",
                               run.result.angular_error_deg, run.result.best_objective,
                               run.result.n_evaluations,
                               static_cast<long long>(run.result.acquisition_evaluations),
                               stop_reason_name(run.result.stop));
            } else {
                results << fmt("failed,,,%d,,%s\n",
                               static_cast<int>(run.result.history.size()),
                               sanitize_csv(run.error).c_str());
            }
        }
    }
    results.close();

    std::ofstream summary(out_dir / "summary.csv", std::ios::binary);
    summary << "surface,mode,lower_deg,upper_deg,lambda,tip,repeats,failures,"
               "mean_error_deg,stddev_error_deg,mean_evaluations,partial\n";
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const CellSummary& s = batch.summary[c];
        const CellMeta& m = meta[c];
        summary << fmt("%s,%s,%g,%g,%g,%s,%d,%d,", m.surface.c_str(),
                       mode_name(m.mode), m.lower_deg, m.upper_deg, m.lambda,
                       m.tip.c_str(), s.repeats, s.failures);
        if (s.failures < s.repeats) {
            summary << fmt("%.2f,%.2f,%.2f,%d\n", s.mean_error_deg, s.stddev_error_deg,
                           s.mean_evaluations, s.partial ? 1 : 0);
        } else {
            summary << fmt(",,,%d\n", 1);
        }
    }
    summary.close();

    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (int r = 0; r < spec.repeats; ++r) {
            const RunOutcome& run = batch.runs[c][r];
            if (run.result.history.empty()) continue;
            std::ofstream trace(out_dir / "traces" / trace_file_name(meta[c], r),
                                std::ios::binary);
            trace << "iter,out_plane_deg,in_plane_deg,fx,fy,fz,objective,ei,status\n";
            for (std::size_t i = 0; i < run.result.history.size(); ++i) {
                const HistoryEntry& h = run.result.history[i];
                trace << fmt("%zu,%.9g,%.9g,%.9g,%.9g,%.9g,", i, h.pose.out_plane_deg,
                             h.pose.in_plane_deg, h.force.fx, h.force.fy, h.force.fz);
                if (h.ok)
                    trace << fmt("%.9g,%.9g,ok\n", h.objective_value, h.ei);
                else
                    trace << fmt(",,%s\n", sanitize_csv(h.error).c_str());
            }
        }
    }

    return any_ok ? 0 : 1;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

int report(const std::filesystem::path& out_dir, std::ostream& out) {
    std::ifstream in(out_dir / "summary.csv");
    if (!in) {
        out << "error: " << (out_dir / "summary.csv").string() << " not found\n";
        return 1;
    }
    std::string header;
    if (!std::getline(in, header) ||
        split_csv(header).size() != 12 || split_csv(header)[0] != "surface") {
        out << "error: " << (out_dir / "summary.csv").string() << " is corrupt\n";
        return 1;
    }

    struct Row {
        std::string surface, mode, tip, limit, lambda, cell;
    };
    std::vector<Row> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const std::vector<std::string> f = split_csv(line);
        if (f.size() != 12) {
            out << "error: malformed summary row: " << line << "\n";
            return 1;
        }
        Row r;
        r.surface = f[0];
        r.mode = f[1];
        r.limit = "[" + f[2] + "," + f[3] + "]";
        r.lambda = f[4];
        r.tip = f[5];
        r.cell = f[8].empty() ? "-" : f[8] + "\xC2\xB1" + f[9];  // mean±sd
        rows.push_back(r);
    }
    if (rows.empty()) {
        out << "no runs\n";
        return 0;
    }

    // One table per (mode, lambda, tip) block, first-appearance order.
    std::vector<std::string> blocks;
    for (const Row& r : rows) {
        const std::string key = r.mode + "  lambda=" + r.lambda + "  tip=" + r.tip;
        if (std::find(blocks.begin(), blocks.end(), key) == blocks.end())
            blocks.push_back(key);
    }
    for (const std::string& block : blocks) {
        std::vector<std::string> surfaces, limits;
        std::map<std::pair<std::string, std::string>, std::string> cells;
        for (const Row& r : rows) {
            if (r.mode + "  lambda=" + r.lambda + "  tip=" + r.tip != block) continue;
            if (std::find(surfaces.begin(), surfaces.end(), r.surface) == surfaces.end())
                surfaces.push_back(r.surface);
            if (std::find(limits.begin(), limits.end(), r.limit) == limits.end())
                limits.push_back(r.limit);
            cells[{r.surface, r.limit}] = r.cell;
        }
        std::size_t name_w = std::string("surface").size();
        for (const std::string& s : surfaces) name_w = std::max(name_w, s.size());
        std::vector<std::size_t> col_w(limits.size());
        for (std::size_t j = 0; j < limits.size(); ++j) {
            col_w[j] = limits[j].size();
            for (const std::string& s : surfaces) {
                const auto it = cells.find({s, limits[j]});
                if (it != cells.end())
                    // The ± sign is two bytes but one column.
                    col_w[j] = std::max(col_w[j], it->second.size() -
                                                      (it->second.find('\xC2') !=
                                                               std::string::npos
                                                           ? 1
                                                           : 0));
            }
        }
        out << "== mode=" << block << " ==\n";
        out << std::string(name_w, ' ');
        for (std::size_t j = 0; j < limits.size(); ++j)
            out << "  " << limits[j]
                << std::string(col_w[j] - limits[j].size(), ' ');
        out << "\n";
        for (const std::string& s : surfaces) {
            out << s << std::string(name_w - s.size(), ' ');
            for (std::size_t j = 0; j < limits.size(); ++j) {
                const auto it = cells.find({s, limits[j]});
                const std::string cell = it != cells.end() ? it->second : "-";
                const std::size_t printed =
                    cell.size() - (cell.find('\xC2') != std::string::npos ? 1 : 0);
                out << "  " << cell << std::string(col_w[j] - printed, ' ');
            }
            out << "\n";
        }
        out << "\n";
    }
    return 0;
}

}  // namespace probenorm
