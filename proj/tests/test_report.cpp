#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "hetnet/errors.hpp"
#include "hetnet/json_io.hpp"
#include "hetnet/report.hpp"

using namespace hetnet;
using nlohmann::json;

namespace {

const std::string kCli = HETNET_CLI_PATH;
const std::string kConfigDir = HETNET_CONFIG_DIR;

const std::string& tmp_dir() {
  static std::string dir = [] {
    char tpl[] = "/tmp/hetnet_cli_XXXXXX";
    char* d = mkdtemp(tpl);
    REQUIRE(d != nullptr);
    return std::string(d);
  }();
  return dir;
}

std::string tmp_path(const std::string& name) { return tmp_dir() + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

struct CliResult {
  int code = -1;
  std::string out;  // stdout and stderr combined
};

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  std::string capture = tmp_path("capture" + std::to_string(counter++) + ".txt");
  std::string cmd = kCli + " " + args + " >" + capture + " 2>&1";
  int status = std::system(cmd.c_str());
  CliResult r;
  if (status != -1 && WIFEXITED(status)) r.code = WEXITSTATUS(status);
  r.out = slurp(capture);
  return r;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("cli validate accepts the cyclic three-species system") {
  CliResult r = run_cli("validate " + kConfigDir + "/may_leonard.json");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "network fingerprint:"));
  CHECK(contains(r.out, "mu=3.00000000000000"));
  CHECK(contains(r.out, "principal sequence: xi1 xi2 xi3"));
  CHECK(contains(r.out, "PASSED"));
}

TEST_CASE("cli validate rejects the weak variant and names the hypothesis") {
  CliResult r = run_cli("validate " + kConfigDir + "/may_leonard_unstable.json");
  CHECK(r.code == 1);
  CHECK(contains(r.out, "VIOLATION H4"));
}

TEST_CASE("cli validate notes a principal cycle that skips equilibria") {
  CliResult r = run_cli("validate " + kConfigDir + "/kirk_silber_demo.json");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "principal cycle covers 3 of 4"));
}

TEST_CASE("cli validate reports unreadable and malformed input as config errors") {
  CliResult missing = run_cli("validate " + tmp_path("nope.json"));
  CHECK(missing.code == 3);
  CHECK(contains(missing.out, "error [CONFIG_ERROR]"));
  CHECK(contains(missing.out, "cannot read file"));

  std::string bad = tmp_path("bad.json");
  spit(bad, "{ this is not json");
  CliResult malformed = run_cli("validate " + bad);
  CHECK(malformed.code == 3);
  CHECK(contains(malformed.out, "parse error in"));
}

TEST_CASE("cli rejects configs from a future schema") {
  std::string path = tmp_path("future.json");
  json doc = load_json_file(kConfigDir + "/may_leonard.json");
  doc["schema_version"] = 99;
  spit(path, doc.dump());
  CliResult r = run_cli("validate " + path);
  CHECK(r.code == 3);
  CHECK(contains(r.out, "unsupported schema_version"));
}

TEST_CASE("cli flight prints the logarithmic answer and its bracket") {
  CliResult r = run_cli("flight --lambdas 2 --x 0.1");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "T = 1.15129254649702"));
  CHECK(contains(r.out, "bracket = ["));

  CliResult zero = run_cli("flight --lambdas 2,1 --x 0,0");
  CHECK(zero.code == 2);
  CHECK(contains(zero.out, "error [ON_STABLE_MANIFOLD]"));
}

TEST_CASE("cli wedge reports defect and membership at both widths") {
  CliResult wide = run_cli("wedge --lambdas 2,1 --x 0.1,0.1 --eps 0.4");
  CHECK(wide.code == 0);
  CHECK(contains(wide.out, "defect = 0.0951249"));
  CHECK(contains(wide.out, "= true"));
  CliResult tight = run_cli("wedge --lambdas 2,1 --x 0.1,0.1 --eps 0.3");
  CHECK(tight.code == 0);
  CHECK(contains(tight.out, "= false"));
}

TEST_CASE("cli measure uses a million samples by default and emits the artifact") {
  std::string out_json = tmp_path("measure_default.json");
  std::string out_csv = tmp_path("measure_default.csv");
  CliResult r = run_cli("measure " + kConfigDir + "/abstract_u2.json --node q1 --seed 5" +
                        " --out-json " + out_json + " --out-csv " + out_csv);
  CHECK(r.code == 0);
  CHECK(contains(r.out, "node,eps,delta,ratio,half_width,bound,n,seed"));
  CHECK(contains(r.out, ",1000000,"));

  json a = json::parse(slurp(out_json));
  CHECK(a.at("schema_version") == 1);
  CHECK(a.at("command") == "measure");
  CHECK(a.at("config").at("n") == 1000000);
  CHECK_FALSE(a.at("config").contains("workers"));
  CHECK(a.at("config_hash").get<std::string>().size() == 16);
  CHECK_FALSE(a.at("network_fingerprint").get<std::string>().empty());
  CHECK(a.at("checks")[0].at("kind") == "measure");
  CHECK(a.at("checks")[0].at("status") == "PASS");
  CHECK(slurp(out_csv) == r.out);
}

TEST_CASE("cli measure artifacts are byte-identical across worker counts") {
  std::string j1 = tmp_path("m_w1.json"), c1 = tmp_path("m_w1.csv");
  std::string j4 = tmp_path("m_w4.json"), c4 = tmp_path("m_w4.csv");
  std::string base = "measure " + kConfigDir + "/abstract_u2.json --n 200000 --seed 9";
  CliResult r1 = run_cli(base + " --workers 1 --out-json " + j1 + " --out-csv " + c1);
  CliResult r4 = run_cli(base + " --workers 4 --out-json " + j4 + " --out-csv " + c4);
  CHECK(r1.code == 0);
  CHECK(r4.code == 0);
  CHECK(slurp(j1) == slurp(j4));
  CHECK(slurp(c1) == slurp(c4));
  CHECK_FALSE(slurp(j1).empty());
}

TEST_CASE("cli transit writes the section points as CSV") {
  std::string out_csv = tmp_path("transit.csv");
  CliResult r = run_cli("transit " + kConfigDir + "/abstract_u2.json --x 0.05,0.01 --y 1,0" +
                        " --out-csv " + out_csv);
  CHECK(r.code == 0);
  std::string csv = slurp(out_csv);
  CHECK(contains(csv, "node,x1,x2,y1,y2"));
  CHECK(contains(csv, "q1"));
  CHECK(contains(csv, "q2"));
}

TEST_CASE("cli omega prints contraction constants and the orbit CSV") {
  std::string out_csv = tmp_path("omega.csv");
  CliResult r = run_cli("omega " + kConfigDir + "/two_node_scalar.json --norm 0.1 --loops 3" +
                        " --out-csv " + out_csv);
  CHECK(r.code == 0);
  CHECK(contains(r.out, "loop,x_norm,wedge_defect,dist_to_y_plus"));
  CHECK(contains(r.out, "rho_loop = 1.5625"));
  CHECK(contains(slurp(out_csv), "loop,x_norm"));
}

TEST_CASE("cli glv-sim integrates and lists the visit itinerary") {
  std::string out_csv = tmp_path("traj.csv");
  CliResult r = run_cli("glv-sim " + kConfigDir + "/may_leonard.json --x0 1,0.01,0.005" +
                        " --t-max 60 --out-csv " + out_csv);
  CHECK(r.code == 0);
  CHECK(contains(r.out, "status = completed"));
  CHECK(contains(r.out, "visits"));
  CHECK(contains(r.out, "xi1["));
  CHECK(slurp(out_csv).substr(0, 11) == "t,x1,x2,x3\n");
}

TEST_CASE("cli glv-sim reports runaway growth as a stiffness abort") {
  // Mutualistic pair: finite-time blowup. Connections cannot be inferred from
  // such a system, so the config carries them explicitly.
  json doc = {
      {"schema_version", 1},
      {"dim", 3},
      {"labels", {"xi1", "xi2", "xi3"}},
      {"growth", {1.0, 1.0, 1.0}},
      {"interaction", {{-1.0, 3.0, -0.8}, {3.0, -1.0, -1.6}, {-1.6, -0.8, -1.0}}},
      {"connections",
       {{{"source", "xi1"}, {"target", "xi2"}, {"index", 1}},
        {{"source", "xi2"}, {"target", "xi3"}, {"index", 1}},
        {{"source", "xi3"}, {"target", "xi1"}, {"index", 1}}}},
  };
  std::string path = tmp_path("runaway.json");
  spit(path, doc.dump(2));
  CliResult r = run_cli("glv-sim " + path + " --x0 0.5,0.5,0.1 --t-max 50");
  CHECK(r.code == 2);
  CHECK(contains(r.out, "STIFF_ABORT"));
}

TEST_CASE("cli channel reports the following fraction and the sequence") {
  std::string out_json = tmp_path("channel.json");
  CliResult r = run_cli("channel " + kConfigDir + "/may_leonard.json --n 40 --out-json " +
                        out_json);
  CHECK(r.code == 0);
  CHECK(contains(r.out, "sequence: xi1 xi2 xi3"));
  CHECK(contains(r.out, "fraction = "));

  json a = json::parse(slurp(out_json));
  CHECK(a.at("command") == "channel");
  bool channel_check_present = false;
  for (const auto& c : a.at("checks"))
    if (c.at("name") == "channel-following" && c.at("status") == "PASS")
      channel_check_present = true;
  CHECK(channel_check_present);
  CHECK(a.at("results").at("outcomes").size() == 40);
}

TEST_CASE("cli verdict merges artifacts into stable evidence") {
  std::string v = tmp_path("v_validate.json");
  std::string m = tmp_path("v_measure.json");
  std::string o = tmp_path("v_omega.json");
  std::string c = tmp_path("v_channel.json");
  std::string cfg = kConfigDir + "/may_leonard.json";
  CHECK(run_cli("validate " + cfg + " --out-json " + v).code == 0);
  CHECK(run_cli("measure " + cfg + " --n 50000 --seed 3 --out-json " + m).code == 0);
  CHECK(run_cli("omega " + cfg + " --norm 0.1 --loops 4 --out-json " + o).code == 0);
  CHECK(run_cli("channel " + cfg + " --n 30 --out-json " + c).code == 0);

  std::string merged = tmp_path("bundle.json");
  CliResult r = run_cli("verdict " + v + " " + m + " " + o + " " + c + " --out-json " + merged);
  CHECK(r.code == 0);
  CHECK(contains(r.out, "PREDOMINANTLY_STABLE_EVIDENCE"));
  json b = json::parse(slurp(merged));
  CHECK(b.at("verdict").at("verdict") == "PREDOMINANTLY_STABLE_EVIDENCE");
  CHECK(b.at("inputs").size() == 4);
}

TEST_CASE("cli verdict refuses artifacts from different networks") {
  std::string m1 = tmp_path("fp_ml.json");
  std::string m2 = tmp_path("fp_u2.json");
  CHECK(run_cli("measure " + kConfigDir + "/may_leonard.json --n 1000 --out-json " + m1).code ==
        0);
  CHECK(run_cli("measure " + kConfigDir + "/abstract_u2.json --n 1000 --out-json " + m2).code ==
        0);
  CliResult r = run_cli("verdict " + m1 + " " + m2);
  CHECK(r.code == 3);
  CHECK(contains(r.out, "refusing to merge"));
}

TEST_CASE("cli verdict surfaces hypothesis failures with exit 1") {
  std::string c = tmp_path("unstable_channel.json");
  CHECK(run_cli("channel " + kConfigDir + "/may_leonard_unstable.json --n 20 --out-json " + c)
            .code == 0);
  CliResult r = run_cli("verdict " + c);
  CHECK(r.code == 1);
  CHECK(contains(r.out, "COUNTEREVIDENCE"));
}

TEST_CASE("cli without a subcommand exits with a usage error") {
  CliResult r = run_cli("");
  CHECK(r.code == 3);
  CHECK_FALSE(r.out.empty());
}

TEST_CASE("cli flags dimension mistakes as usage errors") {
  CliResult r = run_cli("omega " + kConfigDir + "/abstract_u2.json --x 0.1");
  CHECK(r.code == 3);
  CHECK(contains(r.out, "error [USAGE_ERROR]"));
}

TEST_CASE("artifact round-trips through its JSON form") {
  Artifact a;
  a.command = "measure";
  a.seed = 77;
  a.config = {{"eps", 0.5}, {"n", 1000}};
  a.config_hash = "0123456789abcdef";
  a.network_fingerprint = "feedfacefeedface";
  a.checks = {{"measure", "wedge-complement-measure", CheckStatus::Pass, "ok"},
              {"channel", "channel-following", CheckStatus::Warn, "wide"}};
  a.results = {{"rows", json::array()}};

  Artifact b = artifact_from_json(artifact_to_json(a));
  CHECK(b.command == a.command);
  CHECK(b.seed == a.seed);
  CHECK(b.config == a.config);
  CHECK(b.config_hash == a.config_hash);
  CHECK(b.network_fingerprint == a.network_fingerprint);
  REQUIRE(b.checks.size() == 2);
  CHECK(b.checks[0].status == CheckStatus::Pass);
  CHECK(b.checks[1].status == CheckStatus::Warn);
  CHECK(b.checks[1].name == "channel-following");
  CHECK(b.results == a.results);
}

TEST_CASE("bundle merge guards") {
  CHECK_THROWS_AS(report_bundle({}), Error);

  Artifact a;
  a.command = "measure";
  a.network_fingerprint = "aaaa";
  a.checks = {{"measure", "m", CheckStatus::Pass, ""}};
  Artifact b = a;
  b.network_fingerprint = "bbbb";
  CHECK_THROWS_AS(report_bundle({artifact_to_json(a), artifact_to_json(b)}), Error);
}
