#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("splx_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string tool_path() {
    if (const char* env = std::getenv("SPLXTOOL")) return env;
    // Fall back to the binary built next to this test.
    std::error_code ec;
    fs::path self = fs::read_symlink("/proc/self/exe", ec);
    if (!ec) {
        fs::path guess = self.parent_path() / "splxtool";
        if (fs::exists(guess)) return guess.string();
    }
    return "splxtool";
}

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    static int counter = 0;
    fs::path capture = temp_dir() / ("stdout_" + std::to_string(counter++) + ".txt");
    std::string cmd = tool_path() + " " + args + " > " + capture.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    std::ifstream in(capture);
    std::ostringstream buf;
    buf << in.rdbuf();
    r.out = buf.str();
    return r;
}

std::string write_text(const std::string& name, const std::string& body) {
    fs::path p = temp_dir() / name;
    std::ofstream out(p);
    out << body;
    return p.string();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string dir_arg(const std::string& name) { return (temp_dir() / name).string(); }

} // namespace

TEST_CASE("inspect prints counts and the chain check") {
    std::string tri = write_text("tri.json", R"({"order": 2, "simplices": {"2": [[0,1,2]]}})");
    RunResult r = run("inspect " + tri);
    CHECK(r.code == 0);
    CHECK(r.out.find("N_0=3 N_1=3 N_2=1, chain max |entry| = 0") != std::string::npos);
    CHECK(r.out.find("closure inserted 6 missing faces") != std::string::npos);

    RunResult gone = run("inspect " + dir_arg("no_such_file.json"));
    CHECK(gone.code == 2);

    RunResult malformed = run("inspect " + write_text("broken.json", "{\"order\": "));
    CHECK(malformed.code == 2);
}

TEST_CASE("bad flags and values exit with the usage code") {
    CHECK(run("frobnicate").code == 1);
    CHECK(run("train --missing-rate 1.5 --scale tiny --iterations 1 --out-dir " +
              dir_arg("unused"))
              .code == 1);
    CHECK(run("train --arch gcn --scale tiny --out-dir " + dir_arg("unused")).code == 1);
    CHECK(run("--help").code == 0);
}

TEST_CASE("spectra writes the eigenvalue table") {
    std::string tri = write_text("tri2.json", R"({"order": 2, "simplices": {"2": [[0,1,2]]}})");
    std::string out = dir_arg("spectra_out");
    RunResult r = run("spectra " + tri + " --order 1 --out-dir " + out);
    CHECK(r.code == 0);
    std::string csv = slurp(fs::path(out) / "spectra.csv");
    CHECK(csv == "index,eigenvalue\n0,3\n1,3\n2,3\n");
    CHECK(fs::exists(fs::path(out) / "manifest.json"));

    CHECK(run("spectra " + tri + " --order 5 --out-dir " + out).code == 3);
}

TEST_CASE("identity filtering reproduces the input file byte for byte") {
    std::string data = dir_arg("cit_data");
    REQUIRE(run("synth --kind citation --scale tiny --seed 5 --out-dir " + data).code == 0);
    std::string out = dir_arg("identity_out");
    RunResult r = run("filter " + data + "/complex.json " + data +
                      "/features.1.json --taps 1 --out-dir " + out);
    CHECK(r.code == 0);
    CHECK(slurp(fs::path(out) / "filtered.json") == slurp(fs::path(data) / "features.1.json"));
}

TEST_CASE("low-pass filtering keeps only the circulation pattern") {
    std::string hollow =
        write_text("hollow.json", R"({"order": 1, "simplices": {"1": [[0,1],[0,2],[1,2]]}})");
    std::string feats =
        write_text("hollow_feats.json", R"({"order": 1, "d": 1, "values": [[1],[5],[-2]]})");
    std::string out = dir_arg("lowpass_out");
    RunResult r = run("filter " + hollow + " " + feats +
                      " --preset low --cutoff 1e-6 --out-dir " + out);
    CHECK(r.code == 0);
    json filtered = json::parse(slurp(fs::path(out) / "filtered.json"));
    double v0 = filtered["values"][0][0].get<double>();
    double v1 = filtered["values"][1][0].get<double>();
    double v2 = filtered["values"][2][0].get<double>();
    // Harmonic projection of [1,5,-2] onto span{[1,-1,1]} is [-2,2,-2].
    CHECK(v0 == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(v1 == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(v2 == doctest::Approx(-2.0).epsilon(1e-9));

    CHECK(run("filter " + hollow + " " + feats + " --out-dir " + out).code == 1);
    std::string bad_feats =
        write_text("bad_feats.json", R"({"order": 1, "d": 1, "values": [[1],[5]]})");
    CHECK(run("filter " + hollow + " " + bad_feats + " --taps 0,1 --out-dir " + out).code == 3);
}

TEST_CASE("train runs are byte deterministic") {
    std::string flags = "train --task impute --arch biscnn --layers 2 --filters 8 "
                        "--scale tiny --missing-rate 0.2 --iterations 40 --repeats 2 --seed 11 "
                        "--out-dir ";
    std::string a = dir_arg("train_a");
    std::string b = dir_arg("train_b");
    REQUIRE(run(flags + a).code == 0);
    REQUIRE(run(flags + b).code == 0);
    CHECK(slurp(fs::path(a) / "summary.json") == slurp(fs::path(b) / "summary.json"));
    CHECK(slurp(fs::path(a) / "manifest.json") == slurp(fs::path(b) / "manifest.json"));
    CHECK(slurp(fs::path(a) / "loss.csv") == slurp(fs::path(b) / "loss.csv"));

    json summary = json::parse(slurp(fs::path(a) / "summary.json"));
    CHECK(summary["task"] == "impute");
    CHECK(summary["repeats"].size() == 2);
    CHECK(summary["parameters"].get<std::size_t>() > 0);
    CHECK(summary.contains("mean_hidden_accuracy"));
    CHECK(summary.contains("mean_hidden_baseline"));
    CHECK(!summary.contains("train_seconds")); // timing lives in timing.json
    CHECK(fs::exists(fs::path(a) / "timing.json"));

    json manifest = json::parse(slurp(fs::path(a) / "manifest.json"));
    CHECK(manifest["command"] == "train");
    CHECK(manifest["config"]["arch"] == "biscnn");
    CHECK(manifest["seed"] == 11);

    std::string losses = slurp(fs::path(a) / "loss.csv");
    CHECK(losses.rfind("repeat,order,iteration,loss\n", 0) == 0);
}

TEST_CASE("config files feed train and flags override them") {
    std::string cfg = write_text("train_cfg.json", R"({
        "task": "impute", "arch": "snn", "layers": 2, "filters": 8,
        "scale": "tiny", "missing_rate": 0.2, "iterations": 30,
        "repeats": 1, "seed": 3
    })");
    std::string out = dir_arg("train_cfg_out");
    REQUIRE(run("train --config " + cfg + " --arch scnn --out-dir " + out).code == 0);
    json manifest = json::parse(slurp(fs::path(out) / "manifest.json"));
    CHECK(manifest["config"]["arch"] == "scnn"); // flag wins
    CHECK(manifest["config"]["iterations"] == 30);
    CHECK(manifest["config"]["seed"] == 3);

    CHECK(run("train --config " + dir_arg("absent_cfg.json")).code == 2);
    CHECK(run("train --config " + write_text("bad_cfg.json", "{")).code == 2);
}

TEST_CASE("classification training reports test accuracy") {
    std::string out = dir_arg("classify_out");
    RunResult r = run("train --task classify --arch biscnn --layers 2 --filters 6 "
                      "--activation tanh --train-size 12 --test-size 6 --noise 0.02 "
                      "--iterations 30 --batch 8 --eval-every 10 --seed 9 --out-dir " +
                      out);
    CHECK(r.code == 0);
    json summary = json::parse(slurp(fs::path(out) / "summary.json"));
    CHECK(summary["task"] == "classify");
    REQUIRE(summary["repeats"].size() == 1);
    CHECK(summary["repeats"][0]["iterations_run"] == 30);
    CHECK(summary["repeats"][0]["accuracy_curve"].size() == 3);
    double acc = summary["mean_accuracy"].get<double>();
    CHECK(acc >= 0.0);
    CHECK(acc <= 100.0);
    std::string losses = slurp(fs::path(out) / "loss.csv");
    CHECK(losses.rfind("repeat,iteration,loss\n", 0) == 0);
}

TEST_CASE("bench writes a comparison across architectures") {
    std::string out = dir_arg("bench_out");
    RunResult r = run("bench --archs scnn,biscnn --order 1 --scale tiny --iterations 20 "
                      "--filters 8 --missing-rate 0.2 --seed 13 --out-dir " +
                      out);
    CHECK(r.code == 0);
    CHECK(r.out.find("scnn") != std::string::npos);
    CHECK(r.out.find("biscnn") != std::string::npos);
    json bench = json::parse(slurp(fs::path(out) / "bench.json"));
    REQUIRE(bench["entries"].size() == 2);
    CHECK(bench["entries"][0]["arch"] == "scnn");
    CHECK(bench["entries"][1]["arch"] == "biscnn");
    CHECK(bench["entries"][1]["parameters"].get<std::size_t>() <
          bench["entries"][0]["parameters"].get<std::size_t>());
    for (const auto& e : bench["entries"]) {
        CHECK(e["seconds"].get<double>() >= 0.0);
        CHECK(e["sign_fractions"].size() == 2);
    }

    CHECK(run("bench --archs biscnn --order 1 --scale tiny --out-dir " + out).code == 1);

    // Inference passes of the binarized net only ever multiply signs.
    std::string inf = dir_arg("bench_infer");
    REQUIRE(run("bench --archs biscnn,scnn --order 1 --scale tiny --iterations 5 "
                "--filters 8 --missing-rate 0.2 --seed 13 --phase infer --out-dir " +
                inf)
                .code == 0);
    json infer = json::parse(slurp(fs::path(inf) / "bench.json"));
    CHECK(infer["phase"] == "infer");
    for (const auto& f : infer["entries"][0]["sign_fractions"])
        CHECK(f.get<double>() == 1.0);
}

TEST_CASE("trajectory files round trip through the tool") {
    std::string data = dir_arg("traj_data");
    REQUIRE(run("synth --kind trajectories --train 12 --test 6 --noise 0.02 --seed 21 "
                "--out-dir " +
                data)
                .code == 0);
    std::string out = dir_arg("traj_train_out");
    RunResult r = run("train --task classify --arch snn --layers 1 --filters 4 "
                      "--iterations 10 --batch 6 --eval-every 5 --seed 2 --complex " +
                      data + "/complex.json --trajectories " + data +
                      "/trajectories.json --out-dir " + out);
    CHECK(r.code == 0);
    json manifest = json::parse(slurp(fs::path(out) / "manifest.json"));
    CHECK(manifest["inputs"].size() == 2); // complex + trajectories hashed
}
