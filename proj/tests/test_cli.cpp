#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(RANKWALK_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    while (std::size_t got = fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string data(const std::string& name) { return std::string(RANKWALK_DATA) + "/" + name; }

}  // namespace

TEST(Cli, FitWorkedInstance) {
    const auto r = run("fit " + data("worked.csv") + " --scores file=" + data("worked_scores.txt") + " --init=-2");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["outcome"], "minimizer");
    EXPECT_NEAR(j["F_opt"].get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(j["beta_opt"][0].get<double>(), 0.0, 1e-12);
}

TEST(Cli, FitInterceptOnlySign) {
    const auto r = run("fit " + data("intercept.csv") + " --scores sign");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["iterations"], 1);
}

TEST(Cli, FitSingleRowIsUnbounded) {
    const auto r = run("fit " + data("single.csv") + " --scores file=" + data("single_scores.txt"));
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(nlohmann::json::parse(r.out)["outcome"], "unbounded");
}

TEST(Cli, FitWritesTraceAndIsDeterministic) {
    const std::string path = std::string(RANKWALK_TMP) + "/trace_cli.json";
    const auto a = run("fit " + data("robust_line.csv") + " --init ls --trace " + path);
    ASSERT_EQ(a.code, 0);
    const auto b = run("fit " + data("robust_line.csv") + " --init ls");
    EXPECT_EQ(a.out, b.out);
    std::ifstream f(path);
    const auto trace = nlohmann::json::parse(f);
    EXPECT_EQ(trace["outcome"], "minimizer");
    EXPECT_EQ(trace["F_opt"], nlohmann::json::parse(a.out)["F_opt"]);
    EXPECT_FALSE(trace["certificate"]["decomposition"].empty());
}

TEST(Cli, CheckAgrees) {
    const auto r = run("check " + data("worked.csv") + " --scores file=" + data("worked_scores.txt"));
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_TRUE(j["agree"].get<bool>());
    EXPECT_TRUE(j["certificate"]["passed"].get<bool>());
}

TEST(Cli, CheckRefusesLargeN) { EXPECT_EQ(run("check " + data("robust_line.csv")).code, 1); }

TEST(Cli, CompareReportsGap) {
    const auto r = run("compare " + data("valley.csv") + " --scores file=" + data("valley_scores.txt") +
                       " --init=-10,1 --perturb prolong");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_GT(j["ggd"]["iterations"].get<int>(), j["walk"]["iterations"].get<int>());
    EXPECT_GE(j["gap"].get<double>(), 0.0);
}

TEST(Cli, Eval) {
    const auto r = run("eval " + data("worked.csv") + " --scores file=" + data("worked_scores.txt") + " --beta 1");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["F"], 2.0);
    EXPECT_EQ(j["pi"], nlohmann::json::array({3, 1, 2}));
}

TEST(Cli, Errors) {
    EXPECT_EQ(run("fit " + data("missing.csv")).code, 1);
    EXPECT_EQ(run("fit " + data("worked.csv") + " --scores bogus").code, 1);
    EXPECT_EQ(run("fit " + data("worked.csv") + " --init 1,2").code, 1);
    EXPECT_EQ(run("bogus").code, 1);
}
