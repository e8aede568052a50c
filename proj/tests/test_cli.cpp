#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "seqfluct/cli.hpp"

using namespace seqfluct;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "seqfluct_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("fingerprint and number formatting") {
    CHECK(config_fingerprint("") == "cbf29ce484222325");
    CHECK(config_fingerprint("a") == "af63dc4c8601ec8c");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(2.0) == "2");
    CHECK(format_number(-1.5e-20) == "-1.5e-20");
  }

  TEST_CASE("score subcommand") {
    const Run r = run({"score", "--x", "100101100001101", "--y", "111000010101110"});
    CHECK(r.code == 0);
    // 11100001101 is a common subsequence of length 11
    CHECK(r.out.find("n,stat,point,ci95,samples,seed\n15,score,11,0,1,1\n") != std::string::npos);
  }

  TEST_CASE("oracle tilde2 at n = 3 passes") {
    const fs::path prefix = scratch("tilde2");
    const Run r = run({"oracle", "--check", "tilde2", "--n", "3", "--out", prefix.string()});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("PASS", 0) == 0);
    const auto report = nlohmann::json::parse(slurp(prefix.string() + ".json"));
    CHECK(report["schema_version"] == 1);
    CHECK(report["results"]["pass"] == true);
    CHECK(report["results"]["value"].get<double>() < 1e-10);
    CHECK(report["config"]["model"]["kind"] == "iid");
    CHECK(report["fingerprint"].get<std::string>().size() == 16);
    CHECK(report.contains("seed"));
  }

  TEST_CASE("q-sum of 0.9 names q3") {
    const fs::path cfg = scratch("bad_q.json");
    write(cfg, R"({"model": "block", "l": 3, "q1": 0.3, "q2": 0.3, "q3": 0.3})");
    const Run r = run({"gen", "--config", cfg.string()});
    CHECK(r.code == 2);
    const auto record = nlohmann::json::parse(r.err);
    CHECK(record["error"]["key"] == "q3");
    CHECK(record["error"]["kind"] == "validation");
    CHECK(record["error"]["message"].get<std::string>().find("q3") == 0);
    // flags win over the config
    CHECK(run({"gen", "--config", cfg.string(), "--q3", "0.4", "--n", "6", "--samples", "2"}).code == 0);
  }

  TEST_CASE("validation errors carry the key path") {
    CHECK(nlohmann::json::parse(run({"gen", "--q1", "0.3", "--q2", "0.3"}).err)["error"]["key"] == "q3");
    const fs::path cfg = scratch("unknown.json");
    write(cfg, R"({"modle": "block"})");
    const Run unknown = run({"gen", "--config", cfg.string()});
    CHECK(unknown.code == 2);
    CHECK(unknown.err.find("modle") != std::string::npos);
    const fs::path scheme = scratch("scheme.json");
    write(scheme, R"({"alphabet": "abc", "score_table": [[1, 0, 0], [0, 1, 0], [0, 0, -1]], "gap_price": 0})");
    const Run neg = run({"score", "--model", "iid", "--scheme", scheme.string(), "--x", "ab", "--y", "ba"});
    CHECK(neg.code == 2);
    CHECK(nlohmann::json::parse(neg.err)["error"]["key"] == "score_table");
    CHECK(run({"gen", "--n", "0"}).code == 2);
    CHECK(run({"gen", "--model", "markov"}).code == 2);
    CHECK(run({"nonsense"}).code == 2);
    CHECK(run({}).code == 2);
  }

  TEST_CASE("help exits 0") {
    const Run r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("variance-scan") != std::string::npos);
  }

  TEST_CASE("guard and invariant exit codes") {
    CHECK(run({"oracle", "--check", "pmf", "--model", "iid", "--n", "12"}).code == 4);
    const Run r = run({"oracle", "--check", "tilde", "--model", "block", "--n", "13"});
    CHECK(r.code == 0);
  }

  TEST_CASE("same config twice and any worker count give identical files") {
    const fs::path cfg = scratch("det.json");
    write(cfg, R"({"model": "block", "n": 80, "samples": 120, "seed": 42})");
    std::vector<std::string> outputs;
    for (const char* workers : {"1", "1", "3"}) {
      const fs::path prefix = scratch(std::string("det_") + workers);
      REQUIRE(run({"verify-a1", "--config", cfg.string(), "--workers", workers, "--eps0", "0.1", "--out",
                   prefix.string()})
                  .code == 0);
      outputs.push_back(slurp(prefix.string() + ".csv") + slurp(prefix.string() + ".json"));
    }
    CHECK(outputs[0] == outputs[1]);
    CHECK(outputs[0] == outputs[2]);
  }

  TEST_CASE("reports embed the fingerprint of the resolved config") {
    const fs::path a = scratch("fp_a"), b = scratch("fp_b");
    REQUIRE(run({"gamma", "--n", "30", "--samples", "50", "--seed", "5", "--out", a.string()}).code == 0);
    REQUIRE(run({"gamma", "--n", "30", "--samples", "50", "--seed", "6", "--out", b.string()}).code == 0);
    const auto ja = nlohmann::json::parse(slurp(a.string() + ".json"));
    const auto jb = nlohmann::json::parse(slurp(b.string() + ".json"));
    CHECK(ja["fingerprint"] != jb["fingerprint"]);
    CHECK(ja["fingerprint"] == config_fingerprint(ja["config"].dump()));
    CHECK(ja["seed"] == 5);
    const std::string csv = slurp(a.string() + ".csv");
    CHECK(csv.rfind("n,stat,point,ci95,samples,seed\n", 0) == 0);
  }
}
