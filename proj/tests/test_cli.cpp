#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <sstream>

#include "sgf/cli.hpp"
#include "sgf/dataset_io.hpp"
#include "sgf/error.hpp"
#include "sgf/generators.hpp"
#include "test_util.hpp"

using namespace sgf;
using namespace sgf::test;
namespace fs = std::filesystem;

namespace {

struct Invocation {
    int code;
    std::string out;
    std::string err;
};

Invocation run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string line_starting(const std::string& text, const std::string& prefix) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(prefix, 0) == 0) return line;
    return {};
}

const fs::path& small_data() {
    static const fs::path dir = [] {
        const fs::path d = temp_dir("cli_sbm");
        REQUIRE(run({"synth", "blockmodel", "--n", "150", "--k", "3", "--p-in", "0.12", "--p-out",
                     "0.01", "--feat-dim", "8", "--seed", "2", "--out", d.string()})
                    .code == kExitOk);
        return d;
    }();
    return dir;
}

const std::vector<std::string> kQuick{"--max-epochs", "40", "--patience", "10", "--min-epochs", "0",
                                      "--layers", "4", "--hidden", "8"};

std::vector<std::string> with_quick(std::vector<std::string> args) {
    args.insert(args.end(), kQuick.begin(), kQuick.end());
    return args;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
    CHECK(run({"synth", "bipartite"}).code == kExitUsage);
    CHECK(run({"synth", "bipartite", "--out", "x", "--bogus", "1"}).code == kExitUsage);
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"train"}).code == kExitUsage);
    CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("synth bipartite prints the label frequency") {
    const fs::path dir = temp_dir("cli_bip");
    const Invocation r = run({"synth", "bipartite", "--n-per-side", "200", "--density", "0.05",
                              "--feat-dim", "4", "--seed", "1", "--out", dir.string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("r(Y)=") != std::string::npos);
    const std::string ry = line_starting(r.out, "r(Y)=");
    CHECK(std::abs(std::stod(ry.substr(5)) - 2.0) < 0.05);
    CHECK(ry.find("±0.00") != std::string::npos);
    const Dataset d = load_dataset(dir);
    CHECK(d.num_vertices() == 400);
    CHECK(r.out.find("sha256 edges.tsv " + sha256_hex(read_text(dir / "edges.tsv"))) != std::string::npos);

    run({"synth", "bipartite", "--n-per-side", "200", "--density", "0.05", "--feat-dim", "4", "--seed",
         "1", "--out", temp_dir("cli_bip2").string()});
    CHECK(read_text(dir / "edges.tsv") == read_text(fs::path(SGF_TEST_TMP) / "cli_bip2" / "edges.tsv"));
    CHECK(run({"synth", "bipartite", "--n-per-side", "500", "--density", "0.0005", "--out",
               temp_dir("cli_fail").string()})
              .code == kExitInput);
}

TEST_CASE("rayleigh and estimate-freq") {
    const std::string data = small_data().string();
    const Invocation r = run({"rayleigh", "--data", data});
    REQUIRE(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["mean"].get<double>() < 0.5);
    CHECK(j["per_component"].size() == 3);
    CHECK(run({"rayleigh", "--data", data, "--of", "features"}).code == kExitOk);
    CHECK(run({"rayleigh", "--data", data, "--of", "edges"}).code == kExitUsage);

    const Invocation e = run({"estimate-freq", "--data", data, "--train-ratio", "1.0", "--samples", "2"});
    REQUIRE(e.code == kExitOk);
    const auto k = nlohmann::json::parse(e.out);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(std::abs(k["estimates"][i].get<double>() - k["naive"][i].get<double>()) < 1e-12);
    CHECK(std::abs(k["naive_mean"].get<double>() - k["full_graph"].get<double>()) < 1e-12);

    CHECK(run({"estimate-freq", "--data", data, "--train-ratio", "0.5", "--seed", "3"}).out ==
          run({"estimate-freq", "--data", data, "--train-ratio", "0.5", "--seed", "3"}).out);
    CHECK(run({"estimate-freq", "--data", data, "--train-ratio", "0"}).code == kExitInput);
}

TEST_CASE("gradcheck passes and reports parameters") {
    const Invocation r = run({"gradcheck"});
    CHECK(r.code == kExitOk);
    for (const char* v : {"sgf", "cheby", "horizontal", "mlp", "sgc"})
        CHECK(line_starting(r.out, std::string(v) + " max_rel_error=").find("PASS") != std::string::npos);
    CHECK(r.out.find("  w_in ") != std::string::npos);
    CHECK(r.out.find("flagged PASS") != std::string::npos);
}

TEST_CASE("bad dataset exits 1 with the loader message") {
    const fs::path dir = temp_dir("cli_bad");
    save_dataset(generate_blockmodel(30, 3, 0.3, 0.05, 2, 1.0, 1), dir);
    write_text(dir / "labels.tsv", "7\n");
    const Invocation r = run({"train", "--data", dir.string()});
    CHECK(r.code == kExitInput);
    CHECK(r.err.find("labels.tsv") != std::string::npos);
    CHECK(run({"train", "--data", (dir / "nope").string()}).code == kExitInput);
}

TEST_CASE("train writes outputs and prints the summary") {
    const fs::path out = temp_dir("cli_train");
    const Invocation r = run(with_quick({"train", "--data", small_data().string(), "--runs", "2",
                                         "--out", (out / "r.csv").string(), "--metadata",
                                         (out / "m.json").string(), "--export-filter",
                                         (out / "f.csv").string(), "--export-trajectory",
                                         (out / "t.csv").string(), "--log-every", "20"}));
    REQUIRE(r.code == kExitOk);
    CHECK(line_starting(r.out, "config: ") != "");
    const std::string summary = line_starting(r.out, "sgf ");
    CHECK(summary.find(" test ") != std::string::npos);
    CHECK(summary.find("(2 runs, 0 diverged)") != std::string::npos);

    const std::string csv = read_text(out / "r.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    const std::string filter = read_text(out / "f.csv");
    CHECK(std::count(filter.begin(), filter.end(), '\n') == 1 + 2 * 201);
    CHECK(filter.find(",sgf-0\n") != std::string::npos);
    CHECK(filter.find(",sgf-1\n") != std::string::npos);
    CHECK(read_text(out / "t.csv").rfind("epoch,layer,alpha,beta\n0,1,0.5,0.5\n", 0) == 0);
    const auto meta = nlohmann::json::parse(read_text(out / "m.json"));
    CHECK(meta["runs"] == 2);
    CHECK(meta["config"]["layers"] == 4);

    CHECK(run(with_quick({"train", "--data", small_data().string(), "--runs", "2", "--log-every", "20"})).out ==
          r.out);
}

TEST_CASE("config file precedence") {
    const fs::path dir = temp_dir("cli_config");
    write_text(dir / "c.json", R"({"lr": 0.05, "hidden": 8, "variant": "mlp", "max_epochs": 30, "patience": 5, "min_epochs": 0})");
    const Invocation r = run({"train", "--data", small_data().string(), "--runs", "1", "--config",
                              (dir / "c.json").string(), "--lr", "0.02"});
    REQUIRE(r.code == kExitOk);
    const auto cfg = nlohmann::json::parse(line_starting(r.out, "config: ").substr(8));
    CHECK(cfg["lr"] == 0.02);
    CHECK(cfg["hidden"] == 8);
    CHECK(cfg["variant"] == "mlp");
    CHECK(cfg["dropout"] == 0.7);

    write_text(dir / "bad.json", R"({"learning_rate": 0.05})");
    CHECK(run({"train", "--data", small_data().string(), "--config", (dir / "bad.json").string()}).code ==
          kExitInput);
    CHECK(run({"train", "--data", small_data().string(), "--variant", "gat"}).code == kExitInput);
    CHECK(run({"train", "--data", small_data().string(), "--dropout", "1.5"}).code == kExitInput);
}

TEST_CASE("diverged runs exit 3") {
    const Invocation r = run({"train", "--data", small_data().string(), "--runs", "1", "--variant", "cheby",
                              "--lambda-max", "0.01", "--layers", "128", "--max-epochs", "20",
                              "--patience", "5", "--min-epochs", "0"});
    CHECK(r.code == kExitDiverged);
    CHECK(r.out.find("(1 runs, 1 diverged)") != std::string::npos);
}

TEST_CASE("sweep-noise shape and fraction parsing") {
    CHECK(parse_fractions("0.1:0.9:0.1").size() == 9);
    CHECK(parse_fractions("0.1:0.9:0.1").back() == 0.9);
    CHECK(parse_fractions("0,0.5").size() == 2);
    CHECK_THROWS_AS(parse_fractions("0.5:0.1:0.1"), InvalidInput);
    CHECK_THROWS_AS(parse_fractions("1.5"), InvalidInput);

    const fs::path out = temp_dir("cli_sweep");
    const std::string data = small_data().string();
    const Invocation r = run(with_quick({"sweep-noise", "--data", data, "--variants", "mlp,sgc",
                                         "--fractions", "0,0.5", "--runs", "2", "--out",
                                         (out / "s.csv").string()}));
    REQUIRE(r.code == kExitOk);
    const std::string csv = read_text(out / "s.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 2 * 2);

    const std::string mlp0 = line_starting(r.out, "mlp fraction=0 ");
    const std::string mlp5 = line_starting(r.out, "mlp fraction=0.5 ");
    CHECK(mlp0 != "");
    CHECK(r.out.find(mlp0) < r.out.find(mlp5));
    CHECK(r.out.find(mlp5) < r.out.find("sgc fraction=0 "));

    // fraction 0 reproduces plain training
    const Invocation t = run(with_quick({"train", "--data", data, "--runs", "2", "--variant", "sgc"}));
    const std::string sgc0 = line_starting(r.out, "sgc fraction=0 ");
    const std::string summary = line_starting(t.out, "sgc ");
    const std::string acc = summary.substr(summary.find("test "), summary.find(" val") - summary.find("test "));
    CHECK(sgc0.find(acc) != std::string::npos);
}
