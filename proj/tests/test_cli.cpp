#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("ghostvar_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    CliResult run(const std::string& args) const {
        const fs::path err = dir_ / "stderr.txt";
        const std::string cmd = std::string(GHOSTVAR_CLI) + " " + args + " >" + (dir_ / "stdout.txt").string() +
                                " 2>" + err.string();
        const int status = std::system(cmd.c_str());
        CliResult r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        std::ifstream in(err);
        std::stringstream ss;
        ss << in.rdbuf();
        r.err = ss.str();
        return r;
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, VersionAndHelp) {
    EXPECT_EQ(run("--version").code, 0);
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("").code, 2);
}

TEST_F(Cli, ScenarioAnalysisWritesReport) {
    const CliResult r = run("analyze --scenario ex1 --n1 300 --n2 150 --methods all --omit-group x2,x3 --out " + path("out"));
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(path("out/report.json"));
    const auto doc = nlohmann::json::parse(in);
    EXPECT_EQ(doc["relevance"]["variables"].size(), 3u);
    EXPECT_EQ(doc["group_omission"].size(), 1u);
    EXPECT_TRUE(fs::exists(path("out/relevance_ghost.svg")));
}

TEST_F(Cli, ScenarioFilesRoundTripThroughAnalyze) {
    ASSERT_EQ(run("scenario --id ex2 --n1 300 --n2 120 --seed 4 --out " + path("data")).code, 0);
    EXPECT_TRUE(fs::exists(path("data/truth.json")));
    const CliResult r = run("analyze --input " + path("data/train.csv") + " --test-input " + path("data/test.csv") +
                      " --model basis --basis cos:0,cos:1,cos:2,cos:3,cos:4,prod:1:2 --methods ghost");
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(path("stdout.txt"));
    const auto doc = nlohmann::json::parse(in);
    EXPECT_EQ(doc["relevance"]["n2"], 120);
    EXPECT_EQ(doc["model"]["family"], "basis_linear");
}

TEST_F(Cli, ConfigErrorsExitTwo) {
    CliResult r = run("analyze --methods ghost");
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.err.rfind("ghostvar: error code=InvalidArgument exit=2 message=", 0), 0u) << r.err;
    EXPECT_EQ(run("analyze --scenario ex1 --alpha 1.5").code, 2);
    EXPECT_EQ(run("analyze --scenario ex1 --methods bogus").code, 2);
    EXPECT_EQ(run("analyze --scenario ex9").code, 2);
    EXPECT_EQ(run("analyze --no-such-flag").code, 2);
    EXPECT_EQ(run("analyze --scenario ex1 --predictor-cmd /nonexistent/bin").code, 2);
}

TEST_F(Cli, DataErrorsExitThree) {
    {
        std::ofstream out(path("bad.csv"));
        out << "a,b,y\n1,2,3\n4,NA,6\n";
    }
    CliResult r = run("analyze --input " + path("bad.csv"));
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("code=ParseError"), std::string::npos) << r.err;
    {
        std::ofstream out(path("noresp.csv"));
        out << "a,b\n1,2\n";
    }
    EXPECT_EQ(run("analyze --input " + path("noresp.csv")).code, 3);
    EXPECT_EQ(run("analyze --input " + path("missing.csv")).code, 3);
    {
        std::ofstream out(path("small.csv"));
        out << "a,b,y\n1,2,3\n4,5,6\n7,8,9\n";
    }
    EXPECT_EQ(run("analyze --input " + path("small.csv")).code, 3);
}

TEST_F(Cli, PredictorFailureExitsFour) {
    const CliResult r = run("analyze --scenario ex1 --n1 100 --n2 50 --methods ghost --predictor-cmd 'cat >/dev/null; echo 1'");
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.err.find("code=ProtocolViolation"), std::string::npos) << r.err;
}
