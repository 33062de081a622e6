#include "support.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

Result run(const std::string& args, const test_support::TempDir& dir, const std::string& env = "") {
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = "cd " + quote(dir.path().string()) + " && env -u PCDECOMP_SEED " + env + " " +
                            quote(PCDECOMP_CLI) + " " + args + " >" + quote(out.string()) + " 2>" + quote(err.string());
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, test_support::slurp(out), test_support::slurp(err)};
}

std::size_t lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n' ? 1 : 0;
    return n;
}

void write(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

} // namespace

TEST_CASE("help and usage errors") {
    test_support::TempDir dir("cli");
    CHECK(run("--help", dir).code == 0);
    for (const char* sub : {"simulate", "periodogram", "filter", "bootstrap", "fit", "pipeline", "plot"}) {
        CAPTURE(sub);
        const auto r = run(std::string(sub) + " --help", dir);
        CHECK(r.code == 0);
        CHECK(r.out.find("--") != std::string::npos);
    }
    CHECK(run("", dir).code == 2);
    CHECK(run("frobnicate", dir).code == 2);
    const auto bad = run("simulate --n 0 --out x.csv", dir);
    CHECK(bad.code == 2);
    CHECK(bad.err.rfind("error=", 0) == 0);
    CHECK(run("simulate --comp 5 --out x.csv", dir).code == 2);
    CHECK(run("filter --in missing.csv --freq 0.1 --out y.csv", dir).code == 2);
}

TEST_CASE("simulate") {
    test_support::TempDir dir("cli");
    auto r = run("simulate --comp 5,15 --comp 10,50 --noise-sd 10 --n 300 --seed 7 --out mpc.csv", dir);
    REQUIRE(r.code == 0);
    const auto first = test_support::slurp(dir / "mpc.csv");
    CHECK(lines(first) == 301);
    CHECK(first.rfind("t,value\n1,", 0) == 0);

    REQUIRE(run("simulate --comp 5,15 --comp 10,50 --noise-sd 10 --n 300 --seed 7 --out again.csv", dir).code == 0);
    CHECK(test_support::slurp(dir / "again.csv") == first);

    // Environment seed applies when no flag is given; the flag wins over it.
    REQUIRE(run("simulate --comp 5,15 --comp 10,50 --n 300 --out env.csv", dir, "PCDECOMP_SEED=7").code == 0);
    CHECK(test_support::slurp(dir / "env.csv") == first);
    REQUIRE(run("simulate --comp 5,15 --comp 10,50 --n 300 --seed 7 --out flag.csv", dir, "PCDECOMP_SEED=99").code == 0);
    CHECK(test_support::slurp(dir / "flag.csv") == first);
    CHECK(run("simulate --n 3 --out bad.csv", dir, "PCDECOMP_SEED=seven").code == 2);

    REQUIRE(run("simulate --comp 0,15 --noise-sd 0 --n 20 --out zero.csv", dir).code == 0);
    std::istringstream in(test_support::slurp(dir / "zero.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) CHECK(line.substr(line.find(',') + 1) == "0");
}

TEST_CASE("stage commands chain together") {
    test_support::TempDir dir("cli");
    REQUIRE(run("simulate --comp 5,15 --n 300 --seed 3 --out x.csv", dir).code == 0);

    auto r = run("periodogram --in x.csv --out pg.csv --peaks 1", dir);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("period=15") != std::string::npos);
    CHECK(test_support::slurp(dir / "pg.csv").rfind("freq,power\n", 0) == 0);

    REQUIRE(run("filter --in x.csv --freq 1/15 --detrend --out f.csv", dir).code == 0);
    CHECK(std::filesystem::exists(dir / "f.json"));
    CHECK(run("filter --in x.csv --freq 1/15 --period 15 --out g.csv", dir).code == 2);
    REQUIRE(run("filter --in x.csv --period 15 --window 21 --k 2 --boundary trim --out t.csv", dir).code == 0);
    CHECK(lines(test_support::slurp(dir / "t.csv")) == 1 + 300 - 40);

    REQUIRE(run("bootstrap --in f.csv --period 15 --resamples 25 --seed 4 --out-dir boot", dir).code == 0);
    CHECK(std::filesystem::exists(dir / "boot" / "resample_0024.csv"));
    CHECK(std::filesystem::exists(dir / "boot" / "ci.csv"));

    r = run("fit --in f.csv --period 15 --seed 2 --chain-out chain.csv --summary-out summary.json", dir);
    REQUIRE(r.code == 0);
    CHECK(lines(test_support::slurp(dir / "chain.csv")) == 3001);
    CHECK(test_support::slurp(dir / "summary.json").find("\"mean_A\"") != std::string::npos);
    REQUIRE(run("fit --in f.csv --period 15 --seed 2 --chain-out chain2.csv", dir).code == 0);
    CHECK(test_support::slurp(dir / "chain.csv") == test_support::slurp(dir / "chain2.csv"));

    REQUIRE(run("plot --kind trace --in chain.csv --out trace.svg --column sigma", dir).code == 0);
    REQUIRE(run("plot --kind overlay --in x.csv --in f.csv --out overlay.svg --title fit", dir).code == 0);
    CHECK(run("plot --kind pie --in x.csv --out p.svg", dir).code == 2);
}

TEST_CASE("pipeline exit codes and byte-identical reruns") {
    test_support::TempDir dir("cli");
    write(dir / "ok.json", R"({"simulate":{"components":[{"amplitude":5,"period":15}],"noise_sd":10,"n":300},
        "frequencies":["1/15"],"seed":4})");
    REQUIRE(run("pipeline --config ok.json --out run1", dir).code == 0);
    REQUIRE(run("pipeline --config ok.json --out run2 --threads 3", dir).code == 0);
    for (const char* f : {"manifest.json", "fit.csv", "residuals.csv", "forecast.csv", "periodogram.csv"})
        CHECK(test_support::slurp(dir / "run1" / f) == test_support::slurp(dir / "run2" / f));
    REQUIRE(run("pipeline --config run1/manifest.json --out run3", dir).code == 0);
    CHECK(test_support::slurp(dir / "run1" / "fit.csv") == test_support::slurp(dir / "run3" / "fit.csv"));

    write(dir / "dup.json", R"({"simulate":{"components":[]},"frequencies":[0.2,0.2]})");
    const auto dup = run("pipeline --config dup.json --out r", dir);
    CHECK(dup.code == 2);
    CHECK(dup.err.find("duplicate") != std::string::npos);

    write(dir / "close.json", R"({"simulate":{"components":[]},"frequencies":[0.1,0.1001]})");
    const auto close = run("pipeline --config close.json --out r", dir);
    CHECK(close.code == 3);
    CHECK(close.err.rfind("error=unseparable first=0.1 second=0.1001", 0) == 0);

    write(dir / "none.json", R"({"simulate":{"components":[],"noise_sd":1},"frequencies":[0.2],
        "bootstrap":{"significance_fraction":1.0}})");
    const auto none = run("pipeline --config none.json --out r", dir);
    CHECK(none.code == 4);
    CHECK(none.err.rfind("error=no_significant_components", 0) == 0);

    CHECK(run("pipeline --config missing.json", dir).code == 2);
    write(dir / "broken.json", "{not json");
    CHECK(run("pipeline --config broken.json", dir).code == 2);
}
