#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "hdpca/cli.hpp"
#include "hdpca/csv.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args)
{
    args.insert(args.begin(), "hdpca");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = hdpca::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() / ("hdpca_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                           "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
        // Two strong spikes over unit noise, 200 x 30.
        Eigen::MatrixXd x = hdpca::oracle::gaussian_matrix(200, 30, 42);
        x.col(0) *= 6.0;
        x.col(1) *= 4.0;
        hdpca::write_csv_file(path("spiked.csv"), hdpca::DataMatrix(x));
        hdpca::write_csv_file(path("wide.csv"), hdpca::DataMatrix(hdpca::oracle::gaussian_matrix(10, 30, 1)));
        std::ofstream(path("bad.csv")) << "1,2\n3,4\n5,oops\n";
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_F(CliTest, EstimateAllMethods)
{
    const CliRun r = run({"estimate", "--input", path("spiked.csv"), "--m", "2"});
    EXPECT_EQ(r.code, 0) << r.err;
    for (const char* m : {"mle", "star", "kn", "us", "median"}) EXPECT_NE(r.out.find(m), std::string::npos) << m;
}

TEST_F(CliTest, EstimateJsonSchema)
{
    const CliRun r = run({"estimate", "--input", path("spiked.csv"), "--m", "2", "--method", "star", "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["schema"], "1");
    EXPECT_EQ(j["p"], 30);
    EXPECT_EQ(j["estimates"][0]["method"], "star");
    EXPECT_GT(j["estimates"][0]["value"].get<double>(), 0.5);
}

TEST_F(CliTest, RankAndGof)
{
    const CliRun r = run({"rank", "--input", path("spiked.csv"), "--m-max", "6", "--criterion", "pcp_star", "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["schema"], "1");
    const CliRun g = run({"gof", "--input", path("spiked.csv"), "--m", "2", "--classical", "--json"});
    ASSERT_EQ(g.code, 0) << g.err;
    const auto gj = nlohmann::json::parse(g.out);
    EXPECT_TRUE(gj.contains("delta_n"));
    EXPECT_TRUE(gj.contains("classical"));
}

TEST_F(CliTest, ExitCodes)
{
    EXPECT_EQ(run({"estimate", "--input", path("bad.csv"), "--m", "1"}).code, 2);
    EXPECT_NE(run({"estimate", "--input", path("bad.csv"), "--m", "1"}).err.find("line 3"), std::string::npos);
    EXPECT_EQ(run({"estimate", "--input", path("missing.csv"), "--m", "1"}).code, 2);
    EXPECT_EQ(run({"estimate", "--input", path("spiked.csv"), "--m", "1", "--method", "ols"}).code, 2);
    EXPECT_EQ(run({"estimate", "--m", "1"}).code, 2);
    EXPECT_EQ(run({"gof", "--input", path("wide.csv"), "--m", "1"}).code, 4);
    EXPECT_EQ(run({"gof", "--input", path("spiked.csv"), "--m", "8"}).code, 3);
    EXPECT_EQ(run({"mp", "--c", "-1"}).code, 2);
}

TEST_F(CliTest, MpSummary)
{
    const CliRun r = run({"mp", "--c", "0.5", "--quantile", "0.5", "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_NEAR(j["median"].get<double>(), j["quantile"][0]["value"].get<double>(), 1e-12);
    EXPECT_NEAR(j["log_moment"].get<double>(), hdpca::oracle::mp_log_moment_quadrature(0.5), 1e-8);
}

TEST_F(CliTest, SimulateIsReproducible)
{
    const std::vector<std::string> base{"simulate", "--table", "clrt", "--reps", "25", "--seed", "11",
                                        "--setting", "model=2,p=20", "--json"};
    auto a = base, b = base;
    a.insert(a.end(), {"--out", path("a")});
    b.insert(b.end(), {"--out", path("b"), "--threads", "3"});
    ASSERT_EQ(run(a).code, 0);
    ASSERT_EQ(run(b).code, 0);
    for (const char* f : {"clrt_size_records.csv", "clrt_size_aggregate.csv", "clrt_size.json"}) {
        const std::string x = slurp(dir_ / "a" / f);
        EXPECT_FALSE(x.empty()) << f;
        EXPECT_EQ(x, slurp(dir_ / "b" / f)) << f;
    }
}

TEST_F(CliTest, SimulateRejectsUnknownTableAndEmptyFilter)
{
    EXPECT_EQ(run({"simulate", "--table", "nine", "--reps", "2"}).code, 2);
    EXPECT_EQ(run({"simulate", "--table", "bias", "--reps", "2", "--setting", "p=7"}).code, 2);
}
