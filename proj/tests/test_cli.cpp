#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args)
{
    const std::string cmd = std::string(SURF_BINARY) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("surf_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST(Cli, ExtractWritesReportAndExports)
{
    const auto out = scratch("extract");
    ASSERT_EQ(run("extract --h 1/8 --zc 0 --export obj,vtk,mm --out " + out.string()), 0);
    for (const char* f : {"config.json", "quality.json", "quality.csv", "surface.obj", "surface.vtk", "tetmesh.vtk",
                          "mass.mtx", "stiffness.mtx"})
        EXPECT_TRUE(fs::exists(out / f)) << f;
    const auto q = nlohmann::json::parse(slurp(out / "quality.json"));
    EXPECT_EQ(q["euler_characteristic"].get<long>(), 2);
    EXPECT_TRUE(q["watertight"].get<bool>());
    const auto cfg = nlohmann::json::parse(slurp(out / "config.json"));
    EXPECT_EQ(cfg["command"], "extract");
    EXPECT_DOUBLE_EQ(cfg["h"].get<double>(), 0.125);
}

TEST(Cli, ExtractPlaneHasZeroDistance)
{
    const auto out = scratch("plane");
    ASSERT_EQ(run("extract --h 0.25 --plane 0.2,0.3,1,-0.137 --out " + out.string()), 0);
    const auto q = nlohmann::json::parse(slurp(out / "quality.json"));
    EXPECT_LE(q["max_dist"].get<double>(), 1e-14);
}

TEST(Cli, OperationalErrorsExitOne)
{
    const auto out = scratch("errors");
    EXPECT_EQ(run("extract --zc 5 --out " + out.string()), 1);       // empty surface
    EXPECT_EQ(run("extract --h 0.3 --out " + out.string()), 1);      // h does not divide the box
    EXPECT_EQ(run("convergence --h-list 1/2,1/4 --out " + out.string()), 1);
    EXPECT_EQ(run("refmatrix --preconditioner amg --out " + out.string()), 1);
    EXPECT_EQ(run("nonsense"), 1);
}

TEST(Cli, ConvergenceConstantIsExact)
{
    const auto out = scratch("conv_const");
    ASSERT_EQ(run("convergence --u const --h-list 1/2,1/4,1/8 --out " + out.string()), 0);
    const auto csv = slurp(out / "convergence.csv");
    EXPECT_NE(csv.find(",exact,exact,"), std::string::npos);
}

TEST(Cli, ConvergenceAndMassboundPass)
{
    const auto out = scratch("conv");
    EXPECT_EQ(run("convergence --h-list 1/2,1/4,1/8,1/16 --out " + out.string()), 0);
    const auto s = nlohmann::json::parse(slurp(out / "convergence_summary.json"));
    EXPECT_TRUE(s["l2_order_in_band"].get<bool>());
    EXPECT_EQ(run("massbound --h-list 1/2,1/4,1/8 --out " + out.string()), 0);
    EXPECT_TRUE(fs::exists(out / "massbound.csv"));
}

TEST(Cli, ConditioningIsDeterministic)
{
    const auto a = scratch("cond_a"), b = scratch("cond_b");
    const std::string args = "conditioning --h 1/4 --zc-list 0.03,0.002 --out ";
    ASSERT_EQ(run(args + a.string()), 0);
    ASSERT_EQ(run(args + b.string()), 0);
    const auto csv = slurp(a / "conditioning.csv");
    EXPECT_EQ(csv, slurp(b / "conditioning.csv"));
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "z_c,phi_max_deg,phi_min_deg,count_below_1deg,n_vertices,n_triangles,max_dist,max_normal_dev,dim_As,"
              "cond_Ms,cond_As_eff,pcg_iters,pcg_converged,flagged");
    EXPECT_EQ(slurp(a / "config.json"), slurp(b / "config.json"));
}

TEST(Cli, RefmatrixBandOnlyAtDefaults)
{
    const auto out = scratch("ref");
    EXPECT_EQ(run("refmatrix --blocks 20 --block-size 20 --export mm --out " + out.string()), 0);
    EXPECT_TRUE(fs::exists(out / "reference.mtx"));
    const auto j = nlohmann::json::parse(slurp(out / "refmatrix.json"));
    EXPECT_EQ(j["dim"].get<std::size_t>(), 400u);
    EXPECT_FALSE(j.contains("iterations_in_band_36_49"));
}
