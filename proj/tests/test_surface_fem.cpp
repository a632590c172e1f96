#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "levelsurf/eigen_estimate.hpp"
#include "levelsurf/experiments.hpp"
#include "levelsurf/surface_fem.hpp"
#include "support.hpp"

using namespace levelsurf;
using testing_support::duffy_integral;
using testing_support::metric_gradients;

namespace {

const BoxDomain kBox({-2, -2, -2}, {2, 2, 2});

std::array<Vec3, 3> random_triangle(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return {Vec3{u(rng), u(rng), u(rng)}, Vec3{u(rng), u(rng), u(rng)}, Vec3{u(rng), u(rng), u(rng)}};
}

SurfaceMesh sphere_surface(double h, double zc = 0.0)
{
    return experiments::extract_level_set(build_uniform_mesh(kBox, h), LevelSet::sphere({0, 0, zc}, 1.0));
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

} // namespace

TEST(Quadrature, SixPointRuleIsDegreeFour)
{
    const std::array<Vec3, 3> p{Vec3{0.1, 0.2, 0.3}, Vec3{1.4, 0.1, -0.2}, Vec3{0.3, 1.1, 0.5}};
    const double area = triangle_area(p[0], p[1], p[2]);
    double wsum = 0.0;
    for (const auto& q : kTriangleRule6)
        wsum += q.weight;
    EXPECT_NEAR(wsum, 1.0, 1e-14);
    for (int a = 0; a <= 4; ++a)
        for (int b = 0; a + b <= 4; ++b)
            for (int c = 0; a + b + c <= 4; ++c) {
                double rule = 0.0;
                for (const auto& q : kTriangleRule6)
                    rule += q.weight * area * std::pow(q.bary[0], a) * std::pow(q.bary[1], b) * std::pow(q.bary[2], c);
                const double exact = 2.0 * area * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2);
                EXPECT_NEAR(rule, exact, 1e-14) << a << ' ' << b << ' ' << c;
            }
}

TEST(ElementMass, UnitAreaTriangle)
{
    const auto m = element_mass({Vec3{0, 0, 0}, Vec3{2, 0, 0}, Vec3{0, 1, 0}});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            EXPECT_NEAR(m[i][j], i == j ? 1.0 / 6.0 : 1.0 / 12.0, 1e-15);
}

TEST(ElementMass, MatchesHighOrderQuadrature)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = random_triangle(rng);
        const auto m = element_mass(p);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double q = duffy_integral(p, [&](const std::array<double, 3>& l) { return l[i] * l[j]; });
                ASSERT_NEAR(m[i][j], q, 1e-12 * std::max(1.0, std::abs(q)));
            }
    }
}

TEST(ElementStiffness, UnitRightTriangle)
{
    const auto a = element_stiffness({Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 1, 0}});
    const double expected[3][3]{{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            EXPECT_NEAR(a[i][j], expected[i][j], 1e-15);
}

TEST(ElementStiffness, MatchesDirectGradients)
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = random_triangle(rng);
        const auto a = element_stiffness(p);
        const auto g = metric_gradients(p);
        const double area = triangle_area(p[0], p[1], p[2]);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double direct = area * dot(g[i], g[j]);
                ASSERT_NEAR(a[i][j], direct, 1e-12 * std::max(1.0, std::abs(direct)));
            }
        const auto lib = barycentric_gradients(p);
        for (int i = 0; i < 3; ++i)
            ASSERT_NEAR(norm(lib[i] - g[i]), 0.0, 1e-12 * std::max(1.0, norm(g[i])));
    }
}

TEST(ElementStiffness, SliverDiagonalGrowsLikeInverseAngle)
{
    auto max_diag = [](double eps) {
        const auto a = element_stiffness({Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{1, std::tan(eps), 0}});
        return std::max({a[0][0], a[1][1], a[2][2]});
    };
    const double ratio = max_diag(1e-4) / max_diag(1e-2);
    EXPECT_NEAR(ratio, 100.0, 1.0);
    EXPECT_THROW(element_stiffness({Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{2, 0, 0}}), std::invalid_argument);
}

TEST(Assembly, MassIdentities)
{
    const auto s = sphere_surface(0.25, 0.01);
    const auto m = assemble_mass(s);
    EXPECT_TRUE(m.is_symmetric());
    std::vector<double> support(s.num_vertices(), 0.0);
    for (std::size_t t = 0; t < s.num_triangles(); ++t)
        for (auto v : s.triangles[t].v)
            support[v] += s.area(t);
    const std::vector<double> ones(s.num_vertices(), 1.0);
    const auto rows = m * ones;
    double total = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ASSERT_NEAR(rows[i], support[i] / 3.0, 1e-14);
        total += rows[i];
    }
    EXPECT_NEAR(total, s.total_area(), 1e-12);
}

TEST(Assembly, StiffnessKernel)
{
    const auto s = sphere_surface(0.25, 0.01);
    const auto a = assemble_stiffness(s);
    EXPECT_TRUE(a.is_symmetric());
    const auto d = a.diagonal();
    const double dmax = *std::max_element(d.begin(), d.end());
    const auto r = a * std::vector<double>(s.num_vertices(), 1.0);
    for (double x : r)
        ASSERT_LE(std::abs(x), 1e-12 * dmax);
}

TEST(Assembly, GalerkinConsistency)
{
    const auto s = sphere_surface(0.5, 0.1);
    const auto m = assemble_mass(s);
    const auto a = assemble_stiffness(s);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    std::vector<double> v(s.num_vertices()), w(s.num_vertices());
    for (auto& x : v)
        x = nd(rng);
    for (auto& x : w)
        x = nd(rng);
    double mass_q = 0.0, stiff_q = 0.0;
    for (std::size_t t = 0; t < s.num_triangles(); ++t) {
        const auto p = s.corners(t);
        const auto& id = s.triangles[t].v;
        mass_q += duffy_integral(p, [&](const std::array<double, 3>& l) {
            const double vh = v[id[0]] * l[0] + v[id[1]] * l[1] + v[id[2]] * l[2];
            const double wh = w[id[0]] * l[0] + w[id[1]] * l[1] + w[id[2]] * l[2];
            return vh * wh;
        });
        const auto g = metric_gradients(p);
        const Vec3 gv = v[id[0]] * g[0] + v[id[1]] * g[1] + v[id[2]] * g[2];
        const Vec3 gw = w[id[0]] * g[0] + w[id[1]] * g[1] + w[id[2]] * g[2];
        stiff_q += s.area(t) * dot(gv, gw);
    }
    EXPECT_NEAR(dot(v, m * w), mass_q, 1e-11 * std::abs(mass_q) + 1e-13);
    EXPECT_NEAR(dot(v, a * w), stiff_q, 1e-11 * std::abs(stiff_q) + 1e-13);
}

TEST(Assembly, PermutationInvariance)
{
    const auto s = sphere_surface(0.5, 0.02);
    std::vector<std::uint32_t> perm(s.num_vertices());
    for (std::size_t i = 0; i < perm.size(); ++i)
        perm[i] = static_cast<std::uint32_t>(i);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(9));
    SurfaceMesh r = s;
    for (std::size_t i = 0; i < perm.size(); ++i)
        r.vertices[perm[i]] = s.vertices[i];
    for (auto& t : r.triangles)
        for (auto& v : t.v)
            v = perm[v];
    for (auto assemble : {assemble_mass, assemble_stiffness}) {
        const auto expected = assemble(s).permuted(perm);
        const auto got = assemble(r);
        ASSERT_EQ(got.nnz(), expected.nnz());
        for (std::size_t i = 0; i < got.size(); ++i)
            for (std::size_t k = got.row_ptr()[i]; k < got.row_ptr()[i + 1]; ++k)
                ASSERT_NEAR(got.values()[k], expected.at(i, got.cols()[k]), 1e-15);
    }
}

TEST(Assembly, ZeroAreaTriangleReported)
{
    const auto s = testing_support::make_surface({Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{2, 0, 0}},
                                                 {{0, 1, 2}, {0, 1, 3}});
    try {
        assemble_mass(s);
        FAIL() << "expected DegenerateElement";
    } catch (const DegenerateElement& e) {
        EXPECT_EQ(e.index(), 1u);
    }
}

TEST(DiagScale, SmallCases)
{
    const auto id = diag_scale(CsrMatrix::identity(4));
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_EQ(id.matrix.at(i, i), 1.0);
    const auto s = diag_scale(CsrMatrix::from_triplets(2, {{0, 0, 4}, {0, 1, 2}, {1, 0, 2}, {1, 1, 4}}));
    EXPECT_DOUBLE_EQ(s.matrix.at(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(s.matrix.at(0, 1), 0.5);
    EXPECT_DOUBLE_EQ(s.matrix.at(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(s.matrix.at(1, 1), 1.0);
    EXPECT_EQ(s.diagonal, (std::vector<double>{4, 4}));
    EXPECT_THROW(diag_scale(CsrMatrix::from_triplets(2, {{0, 0, 1}, {1, 1, 0}})), std::domain_error);
}

TEST(DiagScale, ScaledMassIsCorrelationLike)
{
    const auto ms = diag_scale(assemble_mass(sphere_surface(0.25, 0.002))).matrix;
    for (std::size_t i = 0; i < ms.size(); ++i)
        for (std::size_t k = ms.row_ptr()[i]; k < ms.row_ptr()[i + 1]; ++k) {
            const double v = ms.values()[k];
            if (ms.cols()[k] == i)
                ASSERT_EQ(v, 1.0);
            else
                ASSERT_TRUE(v > -1.0 && v < 1.0);
        }
}

TEST(MassBound, FlatPatchAndSphere)
{
    const double bound = experiments::kScaledMassCondBound;
    EXPECT_NEAR(bound, 6.8284271247461901, 1e-15);
    const auto patch = testing_support::square_patch(12);
    EXPECT_LE(condition_number(diag_scale(assemble_mass(patch)).matrix).cond, bound);
    for (double h : {0.5, 0.25}) {
        const auto row = experiments::mass_conditioning(sphere_surface(h, 0.008), h);
        EXPECT_LE(row.cond_ms, bound);
        EXPECT_GE(row.cond_m, row.cond_ms);
    }
}

TEST(Interpolation, NodalValues)
{
    const auto s = sphere_surface(0.5, 0.0);
    const auto ls = LevelSet::sphere({0, 0, 0}, 1.0);
    for (double c : interpolate(functions::constant(1.0), ls, s))
        ASSERT_EQ(c, 1.0);
    const auto c = interpolate(functions::x3(), ls, s);
    for (std::size_t i = 0; i < c.size(); ++i) {
        const Vec3& x = s.vertices[i].position;
        ASSERT_NEAR(c[i], x[2] / norm(x), 1e-15);
    }
}

TEST(Interpolation, AffineOnPlanarTriangleIsExact)
{
    const auto plane = LevelSet::plane({0, 0, 1}, 0.0);
    const auto s = testing_support::make_surface({Vec3{0.1, 0.2, 0}, Vec3{1.3, -0.1, 0}, Vec3{0.4, 0.9, 0}}, {{0, 1, 2}});
    const SurfaceFunction u{"affine", [](const Vec3& x) { return 2.0 * x[0] - 3.0 * x[1] + 0.5; }};
    const auto err = interpolation_errors(u, plane, s, interpolate(u, plane, s));
    EXPECT_LE(err.l2, 1e-14);
    EXPECT_LE(err.h1_semi, 1e-8);
}

TEST(Interpolation, ConstantIsExactOnSphere)
{
    const auto ls = LevelSet::sphere({0, 0, 0}, 1.0);
    for (double h : {0.5, 0.25}) {
        const auto s = sphere_surface(h);
        const auto err = interpolation_errors(functions::constant(1.0), ls, s,
                                              interpolate(functions::constant(1.0), ls, s));
        EXPECT_LE(err.l2, experiments::kRoundoffError);
        EXPECT_LE(err.h1_semi, experiments::kRoundoffError);
    }
}

TEST(Interpolation, ErrorsDecreaseWithOptimalOrder)
{
    const std::vector<double> hs{0.5, 0.25, 0.125, 0.0625};
    const auto rows = experiments::convergence_study(kBox, hs, LevelSet::sphere({0, 0, 0}, 1.0), functions::x3());
    const auto& f = rows.back();
    EXPECT_GE(f.l2_order, 1.8);
    EXPECT_LE(f.l2_order, 2.2);
    EXPECT_GE(f.h1_order, 0.8);
    EXPECT_LE(f.h1_order, 1.2);
    EXPECT_THROW(interpolation_errors(functions::x3(), LevelSet::sphere({0, 0, 0}, 1.0), sphere_surface(0.5),
                                      std::vector<double>(3)),
                 std::invalid_argument);
}

TEST(Interpolation, ScaledKernelIsInKernel)
{
    const auto as = diag_scale(assemble_stiffness(sphere_surface(0.25, 0.03)));
    const auto k = scaled_kernel(as.diagonal);
    EXPECT_NEAR(norm2(k), 1.0, 1e-14);
    EXPECT_LE(norm2(as.matrix * k), 1e-12);
}
