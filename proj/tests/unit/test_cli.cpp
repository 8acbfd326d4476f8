#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "synth.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int status;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    Outcome run(const std::string& args) {
        const auto out = dir_.path() / "stdout", err = dir_.path() / "stderr";
        const std::string cmd = std::string("'") + TOPODISC_CLI_PATH + "' --corpus '" +
                                (dir_.path() / "corpus").string() + "' " + args + " >'" + out.string() + "' 2>'" +
                                err.string() + "'";
        const int raw = std::system(cmd.c_str());
        return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
    }

    void add_city(const std::string& name, const std::vector<double>& series) {
        const auto [d, c] = synth::write_region_dataset(dir_.path() / "in", name, "city", {}, 1325376000, series.size(),
                                                        series);
        const Outcome r = run("ingest '" + d.string() + "' '" + c.string() + "'");
        ASSERT_EQ(r.status, 0) << r.err;
    }

    static nlohmann::json error_record(const Outcome& r) {
        std::istringstream lines(r.err);
        std::string last, line;
        while (std::getline(lines, line))
            if (!line.empty()) last = line;
        return nlohmann::json::parse(last);
    }

    synth::TempDir dir_{"cli"};
};

std::vector<double> spiky(std::size_t n, std::size_t phase) {
    std::vector<double> v(n);
    for (std::size_t z = 0; z < n; ++z) {
        v[z] = 0.3 * std::sin(2 * M_PI * double(z) / 12.0);
        if ((z + phase) % 97 == 0) v[z] += 10;
        if ((z + phase) % 131 == 0) v[z] -= 10;
    }
    return v;
}

}  // namespace

TEST_F(CliTest, UsageErrorsExitWithTwo) {
    const Outcome none = run("");
    EXPECT_EQ(none.status, 2);
    EXPECT_EQ(error_record(none)["error"], "usage");
    const Outcome bad = run("query --mode sideways");
    EXPECT_EQ(bad.status, 2);
    EXPECT_EQ(error_record(bad)["error"], "usage");
}

TEST_F(CliTest, RuntimeErrorsAreMachineReadable) {
    const Outcome r = run("inspect nosuch");
    EXPECT_EQ(r.status, 1);
    const auto rec = error_record(r);
    EXPECT_TRUE(rec.contains("error"));
    EXPECT_TRUE(rec.contains("message"));
    EXPECT_NE(rec["error"], "internal");
}

TEST_F(CliTest, IngestBuildQueryBaselineInspect) {
    const auto a = spiky(24 * 60, 0);
    add_city("alpha", a);
    add_city("beta", a);
    add_city("gamma", spiky(24 * 60, 40));

    const Outcome build = run("build");
    ASSERT_EQ(build.status, 0) << build.out << build.err;
    EXPECT_NE(build.out.find("alpha: built"), std::string::npos) << build.out;

    const Outcome q = run("query --d1 alpha --d2 beta --shifts 200 --seed 3 --mode salient --stats");
    ASSERT_EQ(q.status, 0) << q.err;
    std::istringstream lines(q.out);
    std::string line;
    bool copy = false;
    while (std::getline(lines, line)) {
        const auto r = nlohmann::json::parse(line);
        EXPECT_EQ(r["seed"], 3);
        if (r["tau"] == 1.0 && r["rho"] == 1.0) copy = true;
    }
    EXPECT_TRUE(copy) << q.out;
    const auto stats = nlohmann::json::parse(q.err);
    EXPECT_GT(stats["evaluations"].get<int>(), 0);

    const Outcome csv = run("query --d1 alpha --d2 beta --shifts 200 --seed 3 --mode salient --format csv");
    ASSERT_EQ(csv.status, 0) << csv.err;
    EXPECT_EQ(csv.out.substr(0, csv.out.find(',')), "dataset1");
    EXPECT_GE(std::count(csv.out.begin(), csv.out.end(), '\n'), 2);

    const Outcome pcc = run("baseline --method pcc --d1 alpha --d2 beta");
    ASSERT_EQ(pcc.status, 0) << pcc.err;
    bool perfect = false;
    std::istringstream bl(pcc.out);
    while (std::getline(bl, line)) {
        const auto r = nlohmann::json::parse(line);
        EXPECT_EQ(r["method"], "pcc");
        if (r["value"].is_number() && std::abs(r["value"].get<double>() - 1.0) < 1e-12) perfect = true;
    }
    EXPECT_TRUE(perfect) << pcc.out;

    const Outcome ins = run("inspect alpha");
    ASSERT_EQ(ins.status, 0) << ins.err;
    EXPECT_NE(ins.out.find("theta+"), std::string::npos) << ins.out;
}
