// surf: command-line driver for level set surface extraction and the
// surface finite element conditioning experiments.
//
// Exit codes: 0 success, 1 operational error, 2 a checked bound or band was violated.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "levelsurf/eigen_estimate.hpp"
#include "levelsurf/experiments.hpp"
#include "levelsurf/io.hpp"
#include "levelsurf/mesh_quality.hpp"
#include "levelsurf/surface_extract.hpp"
#include "levelsurf/surface_fem.hpp"
#include "levelsurf/tet_grid.hpp"

namespace fs = std::filesystem;
using namespace levelsurf;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitBand = 2;

/// Accepts plain decimals and fractions such as "1/16".
double parse_number(const std::string& s)
{
    const auto slash = s.find('/');
    std::size_t used = 0;
    if (slash == std::string::npos) {
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument("not a number: '" + s + "'");
        return v;
    }
    const double num = std::stod(s.substr(0, slash));
    const double den = std::stod(s.substr(slash + 1));
    if (den == 0.0)
        throw std::invalid_argument("zero denominator in '" + s + "'");
    return num / den;
}

std::vector<double> parse_numbers(const std::vector<std::string>& items)
{
    std::vector<double> out;
    for (const auto& s : items)
        out.push_back(parse_number(s));
    return out;
}

struct Config {
    std::string command;
    std::vector<std::string> box{"-2", "2"};
    std::string h = "1/16";
    std::vector<std::string> h_list{"1/2", "1/4", "1/8", "1/16"};
    std::vector<std::string> zc_list;
    std::string zc = "0";
    double radius = 1.0;
    std::vector<double> plane;
    std::string u = "smooth";
    std::optional<double> tol;
    std::string preconditioner = "ilu0";
    std::uint64_t seed = 20130917;
    std::size_t blocks = 120;
    std::size_t block_size = 120;
    std::string out = ".";
    std::vector<std::string> exports;

    BoxDomain box_domain() const
    {
        const auto v = parse_numbers(box);
        if (v.size() == 2)
            return BoxDomain({v[0], v[0], v[0]}, {v[1], v[1], v[1]});
        if (v.size() == 6)
            return BoxDomain({v[0], v[1], v[2]}, {v[3], v[4], v[5]});
        throw std::invalid_argument("--box expects 2 values (lo,hi) or 6 values (lo_x,lo_y,lo_z,hi_x,hi_y,hi_z)");
    }

    bool wants(const std::string& format) const
    {
        return std::find(exports.begin(), exports.end(), format) != exports.end();
    }

    json to_json() const
    {
        json j;
        j["command"] = command;
        j["box"] = parse_numbers(box);
        j["radius"] = radius;
        j["seed"] = seed;
        j["exports"] = exports;
        if (command == "extract") {
            j["h"] = parse_number(h);
            if (plane.empty())
                j["center"] = {0.0, 0.0, parse_number(zc)};
            else
                j["plane"] = plane;
        } else if (command == "convergence" || command == "massbound") {
            j["h_list"] = parse_numbers(h_list);
            if (command == "convergence")
                j["u"] = u;
        } else if (command == "conditioning") {
            j["h"] = parse_number(h);
            j["zc_list"] = zc_values();
            j["tol"] = tol.value_or(1e-8);
            j["preconditioner"] = preconditioner;
        } else if (command == "refmatrix") {
            j["blocks"] = blocks;
            j["block_size"] = block_size;
            j["tol"] = tol.value_or(1e-8);
            j["preconditioner"] = preconditioner;
        }
        return j;
    }

    std::vector<double> zc_values() const
    {
        return zc_list.empty() ? experiments::kTableShifts : parse_numbers(zc_list);
    }
};

void write_text(const fs::path& path, const std::string& text)
{
    io::write_file(path.string(), [&](std::ostream& os) { os << text; });
}

void write_config(const Config& cfg)
{
    write_text(fs::path(cfg.out) / "config.json", cfg.to_json().dump(2) + "\n");
}

int cmd_extract(const Config& cfg)
{
    const double h = parse_number(cfg.h);
    const TetMesh mesh = build_uniform_mesh(cfg.box_domain(), h);
    const LevelSet ls = cfg.plane.empty()
                            ? LevelSet::sphere({0.0, 0.0, parse_number(cfg.zc)}, cfg.radius)
                            : LevelSet::plane({cfg.plane[0], cfg.plane[1], cfg.plane[2]}, cfg.plane[3]);
    const SurfaceMesh s = experiments::extract_level_set(mesh, ls);
    if (s.num_triangles() == 0) {
        std::cerr << "surf extract: the zero level does not cut the mesh (empty surface)\n";
        return kExitError;
    }
    const QualityReport rep = quality_report(s, ls);
    json j = io::to_json(rep);
    j["euler_characteristic"] = euler_characteristic(s);
    j["watertight"] = is_watertight(s);
    j["consistently_oriented"] = is_consistently_oriented(s);
    j["components"] = connected_components(s);
    j["num_quads"] = s.num_quads;

    const fs::path out(cfg.out);
    write_text(out / "quality.json", j.dump(2) + "\n");
    const double zc = cfg.plane.empty() ? parse_number(cfg.zc) : 0.0;
    write_text(out / "quality.csv", std::string(io::kQualityCsvHeader) + "\n" + io::quality_csv_row(zc, rep) + "\n");
    if (cfg.wants("obj"))
        io::write_file((out / "surface.obj").string(), [&](std::ostream& os) { io::write_obj(os, s); });
    if (cfg.wants("vtk")) {
        io::write_file((out / "surface.vtk").string(), [&](std::ostream& os) { io::write_vtk(os, s); });
        io::write_file((out / "tetmesh.vtk").string(), [&](std::ostream& os) { io::write_vtk(os, mesh); });
    }
    if (cfg.wants("mm")) {
        io::write_file((out / "mass.mtx").string(), [&](std::ostream& os) { io::write_matrix_market(os, assemble_mass(s)); });
        io::write_file((out / "stiffness.mtx").string(),
                       [&](std::ostream& os) { io::write_matrix_market(os, assemble_stiffness(s)); });
    }
    std::cout << "vertices " << s.num_vertices() << ", triangles " << s.num_triangles() << ", euler "
              << euler_characteristic(s) << ", phi_max " << rep.phi_max_deg << " deg, phi_min " << rep.phi_min_deg
              << " deg, below 1 deg " << rep.count_below_1deg << "\n";
    return kExitOk;
}

std::string order_str(double v)
{
    if (std::isnan(v))
        return "";
    return std::isinf(v) ? "exact" : io::fmt(v);
}

int cmd_convergence(const Config& cfg)
{
    const auto hs = parse_numbers(cfg.h_list);
    if (hs.size() < 3)
        throw std::invalid_argument("convergence needs at least 3 levels in --h-list");
    const auto u = functions::by_name(cfg.u);
    if (!u)
        throw std::invalid_argument("unknown --u '" + cfg.u + "' (smooth, x3, const)");
    const LevelSet ls = LevelSet::sphere({0.0, 0.0, 0.0}, cfg.radius);
    const auto rows = experiments::convergence_study(cfg.box_domain(), hs, ls, *u);

    std::ostringstream csv;
    csv << "h,N,l2_error,h1_error,l2_order,h1_order,n_ratio,max_dist,max_normal_dev\n";
    std::vector<double> dists, devs;
    for (const auto& r : rows) {
        csv << io::fmt(r.h) << ',' << r.n << ',' << io::fmt(r.l2) << ',' << io::fmt(r.h1) << ','
            << order_str(r.l2_order) << ',' << order_str(r.h1_order) << ',' << order_str(r.n_ratio) << ','
            << io::fmt(r.max_dist) << ',' << io::fmt(r.max_normal_dev) << '\n';
        dists.push_back(r.max_dist);
        devs.push_back(r.max_normal_dev);
    }
    const fs::path out(cfg.out);
    write_text(out / "convergence.csv", csv.str());

    const auto& fine = rows.back();
    const double dist_slope = loglog_slope(hs, dists);
    const double normal_slope = loglog_slope(hs, devs);
    const bool l2_exact = std::isinf(fine.l2_order);
    const bool h1_exact = std::isinf(fine.h1_order);
    const bool l2_ok = l2_exact || (fine.l2_order >= 1.8 && fine.l2_order <= 2.2);
    const bool h1_ok = h1_exact || (fine.h1_order >= 0.8 && fine.h1_order <= 1.2);
    const bool n_ok = fine.n_ratio >= 3.5 && fine.n_ratio <= 4.5;
    const bool geom_ok = dist_slope >= 1.8 && normal_slope >= 0.8;

    json j;
    j["finest_l2_order"] = l2_exact ? json("exact") : json(fine.l2_order);
    j["finest_h1_order"] = h1_exact ? json("exact") : json(fine.h1_order);
    j["finest_n_ratio"] = fine.n_ratio;
    j["max_dist_slope"] = dist_slope;
    j["max_normal_dev_slope"] = normal_slope;
    j["l2_order_in_band"] = l2_ok;
    j["h1_order_in_band"] = h1_ok;
    j["n_ratio_in_band"] = n_ok;
    j["geometry_slopes_ok"] = geom_ok;
    write_text(out / "convergence_summary.json", j.dump(2) + "\n");

    std::cout << csv.str();
    std::cout << "max_dist slope " << dist_slope << ", max_normal_dev slope " << normal_slope << "\n";
    if (!(l2_ok && h1_ok && n_ok && geom_ok)) {
        std::cerr << "surf convergence: observed orders outside the expected bands\n";
        return kExitBand;
    }
    return kExitOk;
}

int cmd_conditioning(const Config& cfg)
{
    const double h = parse_number(cfg.h);
    const TetMesh mesh = build_uniform_mesh(cfg.box_domain(), h);
    experiments::ConditioningOptions opt;
    opt.radius = cfg.radius;
    opt.pcg_tol = cfg.tol.value_or(1e-8);
    opt.preconditioner = preconditioner_from_string(cfg.preconditioner);
    opt.seed = cfg.seed;
    opt.lanczos.seed = cfg.seed;

    std::ostringstream csv;
    csv << io::kQualityCsvHeader << ",dim_As,cond_Ms,cond_As_eff,pcg_iters,pcg_converged,flagged\n";
    bool violated = false;
    for (double zc : cfg.zc_values()) {
        const auto row = experiments::conditioning_row(mesh, zc, opt);
        csv << io::quality_csv_row(zc, row.quality) << ',' << row.dim << ',' << io::fmt(row.cond_ms) << ','
            << io::fmt(row.cond_as) << ',' << row.pcg.iterations << ',' << (row.pcg.converged ? 1 : 0) << ','
            << (row.flagged ? 1 : 0) << '\n';
        if (row.flagged)
            std::cerr << "z_c=" << zc << " flagged: " << row.note << "\n";
        if (row.cond_ms > experiments::kScaledMassCondBound || row.quality.phi_max_deg >= 160.0)
            violated = true;
    }
    write_text(fs::path(cfg.out) / "conditioning.csv", csv.str());
    std::cout << csv.str();
    if (violated) {
        std::cerr << "surf conditioning: cond(M^s) or maximum angle bound violated\n";
        return kExitBand;
    }
    return kExitOk;
}

int cmd_refmatrix(const Config& cfg)
{
    const double tol = cfg.tol.value_or(1e-8);
    const auto prec = preconditioner_from_string(cfg.preconditioner);
    const auto rep = experiments::reference_matrix_run(cfg.blocks, cfg.block_size, prec, tol, cfg.seed);
    const bool default_setup = cfg.blocks == 120 && cfg.block_size == 120 && tol == 1e-8 && prec == Preconditioner::Ilu0;
    const bool in_band = rep.stats.iterations >= 36 && rep.stats.iterations <= 49;

    std::ostringstream csv;
    csv << "dim,modal_row_nnz,symmetric,preconditioner,tol,iterations,converged,relative_residual\n"
        << rep.dim << ',' << rep.modal_row_nnz << ',' << (rep.symmetric ? 1 : 0) << ',' << cfg.preconditioner << ','
        << io::fmt(tol) << ',' << rep.stats.iterations << ',' << (rep.stats.converged ? 1 : 0) << ','
        << io::fmt(rep.stats.relative_residual) << '\n';
    json j;
    j["dim"] = rep.dim;
    j["modal_row_nnz"] = rep.modal_row_nnz;
    j["symmetric"] = rep.symmetric;
    j["iterations"] = rep.stats.iterations;
    j["converged"] = rep.stats.converged;
    j["relative_residual"] = rep.stats.relative_residual;
    j["wall_seconds"] = rep.wall_seconds;
    if (default_setup)
        j["iterations_in_band_36_49"] = in_band;

    const fs::path out(cfg.out);
    write_text(out / "refmatrix.csv", csv.str());
    write_text(out / "refmatrix.json", j.dump(2) + "\n");
    if (cfg.wants("mm"))
        io::write_file((out / "reference.mtx").string(), [&](std::ostream& os) {
            io::write_matrix_market(os, build_reference_matrix(cfg.blocks, cfg.block_size));
        });
    std::cout << csv.str();
    if (default_setup && !in_band) {
        std::cerr << "surf refmatrix: " << rep.stats.iterations << " iterations, outside the band [36, 49]\n";
        return kExitBand;
    }
    return kExitOk;
}

int cmd_massbound(const Config& cfg)
{
    const auto hs = parse_numbers(cfg.h_list);
    LanczosOptions lopt;
    lopt.seed = cfg.seed;
    const LevelSet ls = LevelSet::sphere({0.0, 0.0, parse_number(cfg.zc)}, cfg.radius);
    std::ostringstream csv;
    csv << "h,N,cond_M,cond_Ms\n";
    bool violated = false;
    for (double h : hs) {
        const TetMesh mesh = build_uniform_mesh(cfg.box_domain(), h);
        const auto row = experiments::mass_conditioning(experiments::extract_level_set(mesh, ls), h, lopt);
        csv << io::fmt(row.h) << ',' << row.n << ',' << io::fmt(row.cond_m) << ',' << io::fmt(row.cond_ms) << '\n';
        violated = violated || row.cond_ms > experiments::kScaledMassCondBound;
    }
    write_text(fs::path(cfg.out) / "massbound.csv", csv.str());
    std::cout << csv.str();
    if (violated) {
        std::cerr << "surf massbound: cond(M^s) exceeds " << experiments::kScaledMassCondBound << "\n";
        return kExitBand;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Level set surface extraction and surface FEM conditioning experiments"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    Config cfg;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--box", cfg.box, "Bounding box: lo,hi or lo_x,lo_y,lo_z,hi_x,hi_y,hi_z")->delimiter(',');
        sub->add_option("--radius", cfg.radius, "Sphere radius")->check(CLI::PositiveNumber);
        sub->add_option("--seed", cfg.seed, "Seed for random vectors");
        sub->add_option("--out", cfg.out, "Output directory");
        sub->add_option("--export", cfg.exports, "Extra outputs: obj, vtk, mm")
            ->delimiter(',')
            ->check(CLI::IsMember({"obj", "vtk", "mm"}));
    };

    auto* extract = app.add_subcommand("extract", "Extract the zero level and write a quality report");
    common(extract);
    extract->add_option("--h", cfg.h, "Grid size (e.g. 0.125 or 1/8)");
    extract->add_option("--zc", cfg.zc, "z coordinate of the sphere center");
    extract->add_option("--plane", cfg.plane, "Affine level set a,b,c,d: a x + b y + c z + d")
        ->delimiter(',')
        ->expected(4);

    auto* conv = app.add_subcommand("convergence", "Interpolation errors over a sequence of grids");
    common(conv);
    conv->add_option("--h-list", cfg.h_list, "Grid sizes, coarse to fine")->delimiter(',');
    conv->add_option("--u", cfg.u, "Surface function: smooth, x3, const");

    auto* cond = app.add_subcommand("conditioning", "Angle and conditioning table over sphere shifts z_c");
    common(cond);
    cond->add_option("--h", cfg.h, "Grid size");
    cond->add_option("--zc-list", cfg.zc_list, "Sphere center shifts")->delimiter(',');
    cond->add_option("--tol", cfg.tol, "PCG relative residual tolerance");
    cond->add_option("--preconditioner", cfg.preconditioner, "none, jacobi or ilu0")
        ->check(CLI::IsMember({"none", "jacobi", "ilu0"}));

    auto* ref = app.add_subcommand("refmatrix", "PCG on the block tridiagonal reference matrix");
    common(ref);
    ref->add_option("--blocks", cfg.blocks, "Number of block rows")->check(CLI::Range(2, 100000));
    ref->add_option("--block-size", cfg.block_size, "Block dimension")->check(CLI::Range(2, 100000));
    ref->add_option("--tol", cfg.tol, "PCG relative residual tolerance");
    ref->add_option("--preconditioner", cfg.preconditioner, "none, jacobi or ilu0")
        ->check(CLI::IsMember({"none", "jacobi", "ilu0"}));

    auto* mass = app.add_subcommand("massbound", "Condition numbers of M and the scaled M^s over grids");
    common(mass);
    mass->add_option("--h-list", cfg.h_list, "Grid sizes")->delimiter(',');
    mass->add_option("--zc", cfg.zc, "z coordinate of the sphere center");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitError;
    }

    try {
        cfg.command = app.get_subcommands().front()->get_name();
        fs::create_directories(cfg.out);
        write_config(cfg);
        if (cfg.command == "extract")
            return cmd_extract(cfg);
        if (cfg.command == "convergence")
            return cmd_convergence(cfg);
        if (cfg.command == "conditioning")
            return cmd_conditioning(cfg);
        if (cfg.command == "refmatrix")
            return cmd_refmatrix(cfg);
        return cmd_massbound(cfg);
    } catch (const std::exception& e) {
        std::cerr << "surf " << cfg.command << ": " << e.what() << "\n";
        return kExitError;
    }
}
