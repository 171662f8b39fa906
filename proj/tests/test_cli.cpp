#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string output;
};

CliRun run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + std::string(WICKNORM_CLI) + " " + args + " 2>&1";
    CliRun r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.output.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("wicknorm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    fs::path dir;
};

}  // namespace

TEST_F(Cli, HelpListsExperiments) {
    const CliRun r = run("--help");
    EXPECT_EQ(r.code, 0);
    for (const char* name : {"gamma-check", "lemma-sum", "thm42", "thm43", "thm52", "fock-bound"})
        EXPECT_NE(r.output.find(name), std::string::npos) << name;
}

TEST_F(Cli, PassingRunWritesCsvAndJson) {
    const CliRun r = run("--out " + dir.string() + " lemma-sum --kappa 2 --K 10,1000");
    EXPECT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("PASS lemma-sum"), std::string::npos);
    const std::string csv = slurp(dir / "lemma-sum.csv");
    EXPECT_EQ(csv.rfind("# wicknorm ", 0), 0u);
    EXPECT_NE(csv.find("# experiment=lemma-sum\n"), std::string::npos);
    EXPECT_NE(csv.find("# kappa=2\n"), std::string::npos);
    EXPECT_NE(csv.find("\nn,b_n,log10_b_n\n"), std::string::npos);
    const auto row = csv.find("\n10,");
    ASSERT_NE(row, std::string::npos);
    EXPECT_NEAR(std::stod(csv.substr(row + 4)), 1847.56, 1e-9);
    const std::string js = slurp(dir / "lemma-sum.json");
    EXPECT_NE(js.find("\"passed\": true"), std::string::npos);
}

TEST_F(Cli, FailingCriterionExitsOne) {
    const CliRun r = run("--out " + dir.string() + " lemma-sum --kappa 2");
    EXPECT_EQ(r.code, 1) << r.output;
    EXPECT_NE(r.output.find("FAIL lemma-sum"), std::string::npos);
}

TEST_F(Cli, UsageAndConfigErrorsExitTwo) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("no-such-experiment").code, 2);
    EXPECT_EQ(run("--out " + dir.string() + " lemma-sum --bogus 1").code, 2);
    const CliRun bad = run("--out " + dir.string() + " lemma-sum --kappa x");
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.output.find("config error"), std::string::npos);
    std::ofstream(dir / "cfg.txt") << "kappa = 1\nunknown_key = 3\n";
    EXPECT_EQ(run("--config " + (dir / "cfg.txt").string() + " --out " + dir.string() + " lemma-sum").code, 2);
    EXPECT_EQ(run("--config " + (dir / "missing.txt").string() + " lemma-sum").code, 2);
    const CliRun dom = run("--out " + dir.string() + " lemma-sum --kappa -1");
    EXPECT_EQ(dom.code, 2);
    EXPECT_NE(dom.output.find("domain error"), std::string::npos);
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
    std::ofstream(dir / "cfg.txt") << "# lemma settings\nkappa = 0\nK = 10\n";
    const CliRun r = run("--config " + (dir / "cfg.txt").string() + " --out " + dir.string() + " lemma-sum --kappa 2");
    EXPECT_EQ(r.code, 0) << r.output;
    const std::string csv = slurp(dir / "lemma-sum.csv");
    EXPECT_NE(csv.find("# kappa=2\n"), std::string::npos);
    EXPECT_NE(csv.find("# K=10\n"), std::string::npos);
}

TEST_F(Cli, MonteCarloRerunIsByteIdentical) {
    const std::string args = " norm --m 1 --n 1 --beta_c 0.3 --samples 20000 --seed 9";
    const fs::path a = dir / "a", b = dir / "b";
    ASSERT_NE(run("--out " + a.string() + args).code, 2);
    ASSERT_NE(run("--out " + b.string() + args).code, 2);
    const std::string ca = slurp(a / "norm.csv");
    EXPECT_FALSE(ca.empty());
    EXPECT_EQ(ca, slurp(b / "norm.csv"));
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
    const CliRun r = run("lemma-sum --K 10", "WICKNORM_OUT=" + dir.string());
    EXPECT_EQ(r.code, 0) << r.output;
    EXPECT_TRUE(fs::exists(dir / "lemma-sum.csv"));
}
