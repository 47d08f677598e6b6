#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <lexiclock/cli.hpp>

using namespace lexiclock;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "lexiclock");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string line; std::getline(is, line);) out.push_back(line);
    return out;
}

class CliFiles : public ::testing::Test {
protected:
    std::filesystem::path dir;

    void SetUp() override {
        dir = std::filesystem::temp_directory_path() /
              ("lexiclock_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        std::filesystem::create_directories(dir);
    }
    void TearDown() override { std::filesystem::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }

    // a small synthetic dataset on disk
    void make_dataset(const std::string& varieties = "12", const std::string& m = "60") {
        const auto r = run_cli({"--m", m, "--seed", "5", "simulate", "--t", "1350", "--varieties", varieties,
                                "-o", path("lists.tsv"), "--meta-out", path("meta.csv")});
        ASSERT_EQ(r.code, 0) << r.err;
    }
};

}  // namespace

TEST(Cli, CurvesDefaultGrid) {
    const auto r = run_cli({"curves", "--t-min", "300", "--t-max", "6000", "--step", "100"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 59u);
    EXPECT_EQ(ls[0], "t,r_omega,r_phi,r_varphi");
    EXPECT_EQ(ls[1].substr(0, 12), "300,0.490156");
    EXPECT_EQ(ls.back().substr(0, 5), "6000,");
}

TEST(Cli, CurvesJsonAndOverrides) {
    const auto r = run_cli({"--format", "json", "--lambda", "2e-4", "curves", "--t-min", "1000", "--t-max", "1000"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j.size(), 1u);
    EvolutionParams p;
    p.lambda = 2e-4;
    EXPECT_EQ(j[0]["r_omega"].get<double>(), relative_error(p, 1000.0, Statistic::omega));
}

TEST(Cli, DateRoundTrip) {
    const auto r = run_cli({"date", "--omega", "0.755784"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 2u);
    EXPECT_EQ(ls[0], "method,value,t_hat,t_lower,t_upper");
    std::istringstream is(r.out);
    const auto t = read_csv(is);
    EXPECT_NEAR(cell_as_double(t.rows[0][2]), 1000.0, 0.01);
    EXPECT_NEAR(cell_as_double(t.rows[0][3]), 728.4, 1.0);
    EXPECT_NEAR(cell_as_double(t.rows[0][4]), 1294.2, 1.0);
}

TEST(Cli, DateReportsFailedRows) {
    const auto r = run_cli({"date", "--omega", "0.5", "--phi", "0"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("phi,0,NA,NA,NA"), std::string::npos) << r.out;
    EXPECT_NE(r.err.find("phi"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run_cli({}).code, 2);
    EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
    EXPECT_EQ(run_cli({"curves", "--step", "-5"}).code, 2);
    EXPECT_EQ(run_cli({"--format", "xml", "curves"}).code, 2);
    EXPECT_EQ(run_cli({"--theta", "1.5", "curves"}).code, 2);
    EXPECT_EQ(run_cli({"date"}).code, 2);
    EXPECT_EQ(run_cli({"date", "--omega", "0.5", "--list-a", "x"}).code, 2);
    EXPECT_EQ(run_cli({"estimate"}).code, 2);
    EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Cli, DomainErrorsExitOne) {
    const auto r = run_cli({"curves", "--t-min", "500", "--t-max", "100"});
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(r.err.empty());
    EXPECT_EQ(run_cli({"--n-eff", "1", "curves"}).code, 1);
    EXPECT_EQ(run_cli({"estimate", "--lists", "/nonexistent.tsv", "--meta", "/nonexistent.csv"}).code, 1);
    EXPECT_EQ(run_cli({"--config", "/nonexistent.json", "curves"}).code, 1);
}

TEST(Cli, ValidateIsDeterministicAcrossThreads) {
    const std::vector<std::string> base{"--seed", "7", "validate", "--replicates", "1000", "--t", "1000"};
    auto with_threads = [&](const std::string& n) {
        auto args = base;
        args.insert(args.begin(), {"--threads", n});
        return run_cli(args);
    };
    const auto a = with_threads("1");
    const auto b = with_threads("1");
    const auto c = with_threads("3");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out, c.out);
    const auto ls = lines(a.out);
    ASSERT_EQ(ls.size(), 6u);
    EXPECT_EQ(ls[0], "stat,analytic_mean,sample_mean,z_mean,analytic_var,sample_var,var_rel_diff");
    EXPECT_EQ(ls[5].rfind("# additivity", 0), 0u);
    const auto d = run_cli({"--seed", "8", "validate", "--replicates", "1000"});
    EXPECT_NE(a.out, d.out);
}

TEST_F(CliFiles, ValidateJsonReport) {
    const auto r = run_cli({"-o", path("mc.json"), "validate", "--replicates", "50", "--sampler", "events"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(slurp(path("mc.json")));
    EXPECT_EQ(j["sampler"], "events");
    EXPECT_EQ(j["replicates"], 50);
    EXPECT_TRUE(j["stats"]["phi"].contains("analytic_var"));
}

TEST_F(CliFiles, SimulatePairTsv) {
    const auto r = run_cli({"--m", "20", "simulate", "--t", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 21u);
    EXPECT_EQ(ls[0], "concept\tword_a\tword_b\tlineage_a\tlineage_b\tcognate");
    for (std::size_t i = 1; i < ls.size(); ++i) EXPECT_EQ(ls[i].back(), '1');
    EXPECT_EQ(run_cli({"--m", "20", "simulate"}).out, run_cli({"--m", "20", "simulate"}).out);
    EXPECT_EQ(run_cli({"simulate", "--varieties", "5"}).code, 1);
}

TEST_F(CliFiles, DateFromDatasetAndLists) {
    make_dataset();
    const auto r = run_cli({"date", "--lists", path("lists.tsv"), "--meta", path("meta.csv"), "--a", "v1", "--b", "v12"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 4u);
    EXPECT_EQ(ls[1].rfind("omega,", 0), 0u);
    EXPECT_EQ(ls[2].rfind("phi,", 0), 0u);
    EXPECT_EQ(ls[3].rfind("varphi,", 0), 0u);

    write_text_file(path("a.tsv"), "concept\tword\none\tabcd\ntwo\tefgh\nthree\tijkl\n");
    write_text_file(path("b.tsv"), "concept\tword\none\tabcd\ntwo\tefgx\nthree\tmnop\n");
    const auto s = run_cli({"date", "--list-a", path("a.tsv"), "--list-b", path("b.tsv")});
    ASSERT_EQ(s.code, 0) << s.err;
    EXPECT_EQ(lines(s.out).size(), 4u);
    EXPECT_EQ(run_cli({"date", "--lists", path("lists.tsv"), "--meta", path("meta.csv"), "--a", "v1", "--b", "zz"}).code, 1);
}

TEST_F(CliFiles, EstimateAndSweep) {
    make_dataset();
    const auto e = run_cli({"estimate", "--lists", path("lists.tsv"), "--meta", path("meta.csv"), "--t-root", "1350"});
    ASSERT_EQ(e.code, 0) << e.err;
    const auto j = nlohmann::json::parse(e.out);
    EXPECT_NEAR(j["n_eff"].get<double>(), 5.0, 0.5);
    EXPECT_NEAR(j["lambda"].get<double>(), 1.4e-4, 0.5e-4);
    EXPECT_EQ(j["pair_count"], 36);
    EXPECT_EQ(j["inputs"]["t_root"], 1350.0);

    const auto plain = run_cli({"estimate", "--lists", path("lists.tsv"), "--meta", path("meta.csv")});
    ASSERT_EQ(plain.code, 0);
    EXPECT_FALSE(nlohmann::json::parse(plain.out).contains("lambda"));

    const auto tight = run_cli({"estimate", "--lists", path("lists.tsv"), "--meta", path("meta.csv"), "--t-root",
                                "1350", "--min-pairs", "100"});
    EXPECT_EQ(tight.code, 1);

    const auto s = run_cli({"-o", path("sweep.csv"), "sweep", "--lists", path("lists.tsv"), "--meta", path("meta.csv"),
                            "--t-root", "1350", "--g-max", "500"});
    ASSERT_EQ(s.code, 0) << s.err;
    const auto ls = lines(slurp(path("sweep.csv")));
    ASSERT_EQ(ls.size(), 7u);
    EXPECT_EQ(ls[0], "g,pair_count,lambda,mu_hat");
    EXPECT_EQ(ls[1].rfind("0,36,", 0), 0u);
}

TEST_F(CliFiles, EstimateIndependentOfThreads) {
    make_dataset("10", "40");
    const std::vector<std::string> args{"estimate", "--lists", path("lists.tsv"), "--meta", path("meta.csv"),
                                        "--t-root", "1350"};
    auto with_threads = [&](const std::string& n) {
        auto a = args;
        a.insert(a.begin(), {"--threads", n});
        return run_cli(a).out;
    };
    EXPECT_EQ(with_threads("1"), with_threads("4"));
}

TEST_F(CliFiles, ConfigPrecedence) {
    write_text_file(path("cfg.json"), R"({"lambda": 2e-4})");
    const auto from_cfg = run_cli({"--config", path("cfg.json"), "date", "--omega", "0.5"});
    const auto flag_wins = run_cli({"--config", path("cfg.json"), "--lambda", "1e-4", "date", "--omega", "0.5"});
    ASSERT_EQ(from_cfg.code, 0) << from_cfg.err;
    std::istringstream a(from_cfg.out), b(flag_wins.out);
    EXPECT_NEAR(cell_as_double(read_csv(a).rows[0][2]), std::log(2.0) / 4e-4, 1e-9);
    EXPECT_NEAR(cell_as_double(read_csv(b).rows[0][2]), std::log(2.0) / 2e-4, 1e-9);

    ::setenv("LEXICLOCK_CONFIG", path("cfg.json").c_str(), 1);
    const auto from_env = run_cli({"date", "--omega", "0.5"});
    ::unsetenv("LEXICLOCK_CONFIG");
    EXPECT_EQ(from_env.out, from_cfg.out);

    write_text_file(path("bad.json"), R"({"speed": 1})");
    EXPECT_EQ(run_cli({"--config", path("bad.json"), "curves"}).code, 1);
}
