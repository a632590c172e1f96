#pragma once

/// \file io.hpp
/// File formats: OBJ and legacy VTK for meshes, MatrixMarket for matrices,
/// JSON and CSV for quality reports.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "mesh_quality.hpp"
#include "sparse_matrix.hpp"
#include "surface_extract.hpp"
#include "tet_grid.hpp"

namespace levelsurf::io {

/// Shortest round-trip decimal representation; byte-stable across runs.
inline std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_obj(std::ostream& os, const SurfaceMesh& s)
{
    for (const auto& v : s.vertices)
        os << "v " << fmt(v.position[0]) << ' ' << fmt(v.position[1]) << ' ' << fmt(v.position[2]) << '\n';
    for (const auto& t : s.triangles)
        os << "f " << t.v[0] + 1 << ' ' << t.v[1] + 1 << ' ' << t.v[2] + 1 << '\n';
}

inline void write_vtk(std::ostream& os, const SurfaceMesh& s)
{
    os << "# vtk DataFile Version 3.0\nsurface triangulation\nASCII\nDATASET POLYDATA\n";
    os << "POINTS " << s.num_vertices() << " double\n";
    for (const auto& v : s.vertices)
        os << fmt(v.position[0]) << ' ' << fmt(v.position[1]) << ' ' << fmt(v.position[2]) << '\n';
    os << "POLYGONS " << s.num_triangles() << ' ' << 4 * s.num_triangles() << '\n';
    for (const auto& t : s.triangles)
        os << "3 " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
    os << "CELL_DATA " << s.num_triangles() << "\nSCALARS parent_tet int 1\nLOOKUP_TABLE default\n";
    for (const auto& t : s.triangles)
        os << t.tet << '\n';
}

/// Unstructured grid of tetrahedra (VTK cell type 10).
inline void write_vtk(std::ostream& os, const TetMesh& m)
{
    os << "# vtk DataFile Version 3.0\ntetrahedral mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << m.num_nodes() << " double\n";
    for (const auto& p : m.nodes)
        os << fmt(p[0]) << ' ' << fmt(p[1]) << ' ' << fmt(p[2]) << '\n';
    os << "CELLS " << m.num_tets() << ' ' << 5 * m.num_tets() << '\n';
    for (const auto& t : m.tets)
        os << "4 " << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
    os << "CELL_TYPES " << m.num_tets() << '\n';
    for (std::size_t i = 0; i < m.num_tets(); ++i)
        os << "10\n";
}

/// MatrixMarket coordinate real. With `symmetric` only the lower triangle
/// is written under the symmetric qualifier; otherwise every entry is written.
inline void write_matrix_market(std::ostream& os, const CsrMatrix& a, bool symmetric = true)
{
    const auto rp = a.row_ptr();
    const auto cols = a.cols();
    const auto vals = a.values();
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
            if (!symmetric || cols[k] <= i)
                ++count;
    os << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << '\n';
    os << a.size() << ' ' << a.size() << ' ' << count << '\n';
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
            if (!symmetric || cols[k] <= i)
                os << i + 1 << ' ' << cols[k] + 1 << ' ' << fmt(vals[k]) << '\n';
}

/// Reads a square real (or integer) coordinate matrix, general or symmetric.
inline CsrMatrix read_matrix_market(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("MatrixMarket: empty input");
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    for (auto* s : {&object, &format, &field, &symmetry})
        for (char& ch : *s)
            ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate")
        throw std::runtime_error("MatrixMarket: expected a coordinate matrix header");
    if (field != "real" && field != "integer" && field != "double")
        throw std::runtime_error("MatrixMarket: unsupported field '" + field + "'");
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general")
        throw std::runtime_error("MatrixMarket: unsupported symmetry '" + symmetry + "'");

    while (std::getline(is, line) && (line.empty() || line[0] == '%')) {
    }
    std::size_t rows = 0, cols = 0, entries = 0;
    if (!(std::istringstream(line) >> rows >> cols >> entries))
        throw std::runtime_error("MatrixMarket: malformed size line");
    if (rows != cols)
        throw std::runtime_error("MatrixMarket: matrix is not square");

    std::vector<Triplet> t;
    t.reserve(symmetric ? 2 * entries : entries);
    for (std::size_t e = 0; e < entries; ++e) {
        std::size_t i = 0, j = 0;
        double v = 0.0;
        if (!(is >> i >> j >> v) || i == 0 || j == 0 || i > rows || j > cols)
            throw std::runtime_error("MatrixMarket: malformed entry " + std::to_string(e + 1));
        t.push_back({static_cast<std::uint32_t>(i - 1), static_cast<std::uint32_t>(j - 1), v});
        if (symmetric && i != j)
            t.push_back({static_cast<std::uint32_t>(j - 1), static_cast<std::uint32_t>(i - 1), v});
    }
    return CsrMatrix::from_triplets(rows, std::move(t));
}

inline nlohmann::json to_json(const QualityReport& r)
{
    nlohmann::json j;
    j["phi_max_deg"] = r.phi_max_deg;
    j["phi_min_deg"] = r.phi_min_deg;
    j["count_below_1deg"] = r.count_below_1deg;
    j["histogram_5deg"] = r.histogram;
    j["n_triangles"] = r.n_triangles;
    j["n_vertices"] = r.n_vertices;
    j["min_area"] = r.min_area;
    if (std::isfinite(r.min_quad_angle_deg))
        j["min_quad_angle_deg"] = r.min_quad_angle_deg;
    else
        j["min_quad_angle_deg"] = nullptr;
    j["distance_checked"] = r.distance_checked;
    if (r.distance_checked) {
        j["max_dist"] = r.max_dist;
        j["max_normal_dev"] = r.max_normal_dev;
        j["fold_free"] = r.fold_free;
    }
    return j;
}

inline const char* kQualityCsvHeader =
    "z_c,phi_max_deg,phi_min_deg,count_below_1deg,n_vertices,n_triangles,max_dist,max_normal_dev";

inline std::string quality_csv_row(double zc, const QualityReport& r)
{
    std::ostringstream os;
    os << fmt(zc) << ',' << fmt(r.phi_max_deg) << ',' << fmt(r.phi_min_deg) << ',' << r.count_below_1deg << ','
       << r.n_vertices << ',' << r.n_triangles << ',' << (r.distance_checked ? fmt(r.max_dist) : "nan") << ','
       << (r.distance_checked ? fmt(r.max_normal_dev) : "nan");
    return os.str();
}

template <class Writer>
void write_file(const std::string& path, Writer&& writer)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    writer(os);
    if (!os)
        throw std::runtime_error("error writing '" + path + "'");
}

} // namespace levelsurf::io
