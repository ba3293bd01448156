#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "json.hpp"

using Json = nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

// Runs the CLI with a shell-quoted argument string; stderr is discarded
// unless merged.
Run zhat(const std::string& args, bool merge_stderr = false) {
    const std::string cmd = std::string(ZHAT_BIN) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

Json result_of(const Run& r) { return Json::parse(r.out).at("result"); }

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << body;
    return path;
}

} // namespace

TEST(Cli, DensityAsymptoticSquarefree) {
    const auto r = zhat("density --set 'kfree(2)' --method asymptotic --r 1e7");
    ASSERT_EQ(r.code, 0);
    const auto rep = result_of(r)["reports"][0];
    EXPECT_NEAR(rep["lower_est"].get<double>(), 0.6079, 1e-3);
    EXPECT_NEAR(rep["upper_est"].get<double>(), 0.6079, 1e-3);
}

TEST(Cli, DensityAllMethodsPeriodic) {
    const auto r = zhat("density --set 'cong(1,3)' --method all");
    ASSERT_EQ(r.code, 0);
    const auto reps = result_of(r)["reports"];
    ASSERT_EQ(reps.size(), 6u);
    for (const auto& rep : reps) {
        const std::string m = rep["method"];
        if (m == "ALPHA") {
            EXPECT_NEAR(rep["increment_est"].get<double>(), 1.0 / 3, 5e-3);
        } else {
            EXPECT_NEAR(rep["lower_est"].get<double>(), 1.0 / 3, 5e-3) << m;
            EXPECT_NEAR(rep["upper_est"].get<double>(), 1.0 / 3, 5e-3) << m;
        }
    }
}

TEST(Cli, DensityLogLeadingDigit) {
    const auto r = zhat("density --set 'leadingdigit(1,10)' --method alpha --alpha -1");
    ASSERT_EQ(r.code, 0);
    EXPECT_NEAR(result_of(r)["reports"][0]["increment_est"].get<double>(), std::log(2.0) / std::log(10.0), 5e-3);
}

TEST(Cli, MeasureExamples) {
    const auto tr = zhat("measure --set 'kfree(2)' --chain primorial2 --levels 6 --format csv");
    ASSERT_EQ(tr.code, 0);
    EXPECT_NE(tr.out.find("level_index,modulus,residue_count,measure_num,measure_den,measure_float,mode"), std::string::npos);
    EXPECT_NE(tr.out.find("4,44100,27648,768,1225,"), std::string::npos);
    EXPECT_NE(tr.out.find("# note:"), std::string::npos);

    const auto mu = zhat("measure --multiples 4,6");
    ASSERT_EQ(mu.code, 0);
    EXPECT_EQ(result_of(mu)["measure"], "2/3");

    const auto eu = zhat("measure --euler '1-1/p^2' --cutoff 10000");
    ASSERT_EQ(eu.code, 0);
    const auto b = result_of(eu)["bracket"];
    const double target = 6 / (std::numbers::pi * std::numbers::pi);
    EXPECT_LE(b["lo"].get<double>(), target);
    EXPECT_GE(b["hi"].get<double>(), target);
}

TEST(Cli, VerifyExamples) {
    const auto de = zhat("verify davenport-erdos --family 'p^2' --pmax 31");
    EXPECT_EQ(de.code, 0);
    EXPECT_EQ(result_of(de)["verdict"], "PASS");
    const auto ax = zhat("verify axioms --cases 100 --seed 42");
    EXPECT_EQ(ax.code, 0);
    EXPECT_EQ(result_of(ax)["verdict"], "PASS");
    const auto di = zhat("verify dirichlet --mmax 100 --pbound 1e5");
    EXPECT_EQ(di.code, 0);
    EXPECT_EQ(result_of(di)["verdict"], "PASS");
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(zhat("verify eulerian --set primes --m 12").code, 1);
    EXPECT_EQ(zhat("verify dirichlet --mmax 30 --pbound 20").code, 3);
    EXPECT_EQ(zhat("density --set 'kfree('").code, 2);
    EXPECT_EQ(zhat("density --set 'cong(0,2)' --method bogus").code, 2);
    EXPECT_EQ(zhat("density --set 'cong(0,2)' --alpha 0.5 --method alpha").code, 2);
    EXPECT_EQ(zhat("--format xml sn rho 6").code, 2);
    EXPECT_EQ(zhat("").code, 2);
    EXPECT_EQ(zhat("verify counterexample --a 2").code, 2);
}

TEST(Cli, ParseErrorReportsPosition) {
    const auto r = zhat("density --set 'kfree('", true);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("position 6"), std::string::npos) << r.out;
}

TEST(Cli, UnknownTheoremListsIds) {
    const auto r = zhat("verify nope", true);
    EXPECT_EQ(r.code, 2);
    for (const char* id : {"davenport-erdos", "dirichlet", "omega", "eulerian", "asdmltp", "poonen-stoll", "mt", "counterexample",
                           "union-dense", "axioms"})
        EXPECT_NE(r.out.find(id), std::string::npos) << id;
}

TEST(Cli, SupernaturalCommands) {
    EXPECT_EQ(result_of(zhat("sn mul '2^inf*3' '3^2*5'"))["result"], "2^inf*3^3*5");
    EXPECT_EQ(result_of(zhat("sn rho -12"))["result"], "2^2*3");
    const auto lim = zhat("sn limit --seq factorial --pmax 7 --terms 30");
    ASSERT_EQ(lim.code, 0);
    // Legendre: v_p(30!) = sum floor(30 / p^i).
    const std::map<std::string, unsigned> legendre{{"2", 26}, {"3", 14}, {"5", 7}, {"7", 4}};
    const auto tracks = result_of(lim)["tracks"];
    ASSERT_EQ(tracks.size(), 4u);
    for (const auto& t : tracks) {
        EXPECT_EQ(t["status"], "diverging");
        EXPECT_EQ(t["valuations"].back().get<unsigned>(), legendre.at(std::to_string(t["prime"].get<int>())));
    }
    EXPECT_EQ(zhat("sn rho 0").code, 2);
    EXPECT_EQ(zhat("sn mul '3*2'").code, 2);
}

TEST(Cli, ByteIdenticalJson) {
    const std::string args = "density --set 'kfree(2) | cong(1,4)' --method all --r 1e5";
    const auto a = zhat(args), b = zhat(args);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    const auto c = zhat("verify asdmltp --moduli 4,9,25 --r 1e5 --N 1e5"), d = zhat("verify asdmltp --moduli 4,9,25 --r 1e5 --N 1e5");
    EXPECT_EQ(c.out, d.out);
}

TEST(Cli, ThreadsDoNotChangeResults) {
    const auto one = zhat("--threads 1 density --set 'kfree(3)' --method all --r 1e5");
    const auto four = zhat("--threads 4 density --set 'kfree(3)' --method all --r 1e5");
    ASSERT_EQ(one.code, 0);
    ASSERT_EQ(four.code, 0);
    EXPECT_EQ(result_of(one).dump(), result_of(four).dump());
    EXPECT_EQ(Json::parse(four.out)["config"]["threads"], "4");
}

TEST(Cli, EffectiveConfigAndSeedRecorded) {
    const auto r = zhat("--seed 7 sn rho 10");
    const auto cfg = Json::parse(r.out)["config"];
    EXPECT_EQ(cfg["seed"], "7");
    EXPECT_EQ(cfg["format"], "json");
    EXPECT_TRUE(cfg.contains("budget"));
    const auto csv = zhat("--format csv sn rho 10");
    EXPECT_EQ(csv.out.rfind("# format=csv\n", 0), 0u);
    EXPECT_NE(csv.out.find("# seed=42\n"), std::string::npos);
}

TEST(Cli, ConfigFileOverriddenByFlags) {
    const auto cfg = temp_file("zhat_cli_test.cfg", "# test config\nset = \"cong(0,4)\"\nmethod = asymptotic\nr = 1e4\n");
    const auto base = zhat("density --config " + cfg.string());
    ASSERT_EQ(base.code, 0);
    const auto j = Json::parse(base.out);
    EXPECT_EQ(j["config"]["set"], "cong(0,4)");
    EXPECT_EQ(j["config"]["r"], "1e4");
    EXPECT_NEAR(j["result"]["reports"][0]["upper_est"].get<double>(), 0.25, 1e-3);

    const auto over = zhat("density --config " + cfg.string() + " --set 'cong(0,5)'");
    ASSERT_EQ(over.code, 0);
    const auto k = Json::parse(over.out);
    EXPECT_EQ(k["config"]["set"], "cong(0,5)");
    EXPECT_NEAR(k["result"]["reports"][0]["upper_est"].get<double>(), 0.2, 1e-3);

    const auto bad = temp_file("zhat_cli_bad.cfg", "colour = blue\n");
    EXPECT_EQ(zhat("density --set 'cong(0,2)' --config " + bad.string()).code, 2);
    EXPECT_EQ(zhat("density --set 'cong(0,2)' --config /nonexistent/zhat.cfg").code, 2);
}

TEST(Cli, TableFormat) {
    const auto r = zhat("--format table verify omega --k 2");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("# verify", 0), 0u);
    EXPECT_NE(r.out.find("PASS"), std::string::npos);
}
