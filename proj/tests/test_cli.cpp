#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "riskroute/cli.hpp"
#include "riskroute/instances.hpp"
#include "riskroute/io.hpp"

using namespace riskroute;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "riskroute");
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
    fs::path path;
    TempDir()
    {
        path = fs::temp_directory_path() / ("riskroute_cli_" + std::to_string(std::rand()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("generate writes the instance and its oracle")
{
    TempDir dir;
    const Run r = run({"generate", "--family", "structural", "--level", "3", "--gamma-kappa", "0.5", "--out",
                       dir / "g3.txt"});
    REQUIRE(r.code == kExitOk);
    const NetworkInstance inst = load_instance(dir / "g3.txt");
    CHECK(inst.num_vertices() == 16);
    CHECK(load_oracle(dir / "g3.txt.oracle").expected_pra == doctest::Approx(5.0));

    setenv(kOutDirEnv, dir.path.c_str(), 1);
    CHECK(run({"generate", "--family", "functional", "--level", "2"}).code == kExitOk);
    CHECK(fs::exists(dir / "functional-i2-gk1.txt"));
    CHECK(run({"generate", "--family", "random-sp", "--seed", "3", "--risk-model", "mean-stdev"}).code
          == kExitOk);
    CHECK(fs::exists(dir / "random-sp-s3.txt"));
    unsetenv(kOutDirEnv);
}

TEST_CASE("input errors exit with code 2")
{
    TempDir dir;
    CHECK(run({}).code == kExitInputError);
    CHECK(run({"frobnicate"}).code == kExitInputError);
    CHECK(run({"generate", "--family", "nope", "--out", dir / "x.txt"}).code == kExitInputError);
    CHECK(run({"generate", "--family", "structural", "--level", "0", "--out", dir / "x.txt"}).code
          == kExitInputError);
    const Run pre = run({"generate", "--family", "structural", "--level", "2", "--r-a", "0.5", "--out",
                         dir / "x.txt"});
    CHECK(pre.code == kExitInputError);
    CHECK_FALSE(pre.err.empty());
    CHECK(run({"solve", dir / "missing.txt"}).code == kExitInputError);
    std::ofstream(dir / "bad.txt") << "# riskroute instance v1\nvertices two\n";
    const Run bad = run({"solve", dir / "bad.txt"});
    CHECK(bad.code == kExitInputError);
    CHECK(bad.err.find("line 2") != std::string::npos);
}

TEST_CASE("solve and analyze")
{
    TempDir dir;
    REQUIRE(run({"generate", "--family", "structural", "--level", "2", "--out", dir / "g2.txt"}).code == kExitOk);
    const Run s = run({"solve", dir / "g2.txt"});
    CHECK(s.code == kExitOk);
    CHECK(s.out.find("converged") != std::string::npos);
    CHECK(run({"solve", dir / "g2.txt", "--neutral"}).code == kExitOk);

    const Run a = run({"analyze", dir / "g2.txt", "--kind", "topological-eta,topological-vertices", "--out",
                       dir / "g2.csv"});
    CHECK(a.code == kExitOk);
    const std::string csv = slurp(dir / "g2.csv");
    CHECK(csv.starts_with(kBoundCsvVersion));
    CHECK(csv.find(",topological-eta,ok") != std::string::npos);
    CHECK(csv.find(",topological-vertices,ok") != std::string::npos);
    CHECK(run({"analyze", dir / "g2.txt", "--kind", "bogus"}).code == kExitInputError);
}

TEST_CASE("verify passes on generated instances and fails on a corrupted one")
{
    TempDir dir;
    for (const char* family : {"structural", "functional"}) {
        const std::string file = dir / (std::string(family) + ".txt");
        REQUIRE(run({"generate", "--family", family, "--level", "2", "--out", file}).code == kExitOk);
        const Run v = run({"verify", file});
        CHECK(v.code == kExitOk);
        CHECK(v.out.find("all checks passed") != std::string::npos);
        CHECK(v.out.find("FAIL") == std::string::npos);
    }

    // replace the first ramp by a constant
    const std::string file = dir / "structural.txt";
    std::string text = slurp(file);
    std::istringstream lines(text);
    std::ostringstream patched;
    std::string line;
    int ramps = 0;
    while (std::getline(lines, line)) {
        if (line.find("latency pwl") != std::string::npos && ramps++ == 0) {
            line = line.substr(0, line.find("latency")) + "latency const 0.3 variability const 0";
        }
        patched << line << '\n';
    }
    std::ofstream(file) << patched.str();
    const Run v = run({"verify", file});
    CHECK(v.code == kExitCheckFailed);
    CHECK(v.out.find("FAIL") != std::string::npos);
}

TEST_CASE("sweeps are reproducible byte for byte")
{
    TempDir dir;
    const std::vector<std::string> args = {"sweep",          "--family", "structural", "--level",
                                           "1,2,3",          "--gamma-kappa", "0.5,1", "--out"};
    std::vector<std::string> a = args;
    a.push_back(dir / "a.csv");
    std::vector<std::string> b = args;
    b.push_back(dir / "b.csv");
    REQUIRE(run(a).code == kExitOk);
    REQUIRE(run(b).code == kExitOk);
    const std::string csv = slurp(dir / "a.csv");
    CHECK(csv == slurp(dir / "b.csv"));
    // version line, header and one row per (level, gamma kappa)
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 6);
    CHECK(csv.find("violated") == std::string::npos);

    const Run rnd = run({"sweep", "--family", "random-affine", "--seeds", "4", "--seed", "11", "--out",
                         dir / "r.csv"});
    CHECK(rnd.code == kExitOk);
    const std::string rcsv = slurp(dir / "r.csv");
    CHECK(std::count(rcsv.begin(), rcsv.end(), '\n') == 2 + 4);
}

TEST_CASE("conjecture search is experimental and always succeeds")
{
    const Run r = run({"conjecture-search", "--family", "random-sp", "--seeds", "3"});
    CHECK(r.code == kExitOk);
}
