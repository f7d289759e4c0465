#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dunkl/experiment.hpp"
#include "test_util.hpp"

using namespace dunkl;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("dunkl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  int run(Command cmd, const fs::path& cfg, const std::string& out, std::string* log = nullptr,
          std::optional<std::uint64_t> seed = std::nullopt) {
    std::ostringstream os;
    const int code = run_command(cmd, cfg, {seed, (dir_ / out).string(), 1}, os);
    if (log) *log = os.str();
    return code;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

const char* kKeyineq = R"({
  "root_system": {"type": "rank1", "k": 0.0},
  "measure": {"p": 2.0},
  "check": "keyineq",
  "estimator": {"quadrature": {"L": 8.0, "resolution": 32}},
  "seed": 3
})";

}  // namespace

TEST_F(Cli, KeyineqPassesWithPositiveMargins) {
  ASSERT_EQ(run(Command::check, write("c.json", kKeyineq), "out"), exit_ok);
  const auto report = nlohmann::json::parse(slurp(dir_ / "out/reports/keyineq.json"));
  ASSERT_GT(report.at("reports").size(), 10u);
  for (const auto& r : report.at("reports")) EXPECT_GT(r.at("margin").get<double>(), 0.0);
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "out/manifest.json"));
  EXPECT_EQ(manifest.at("exit_code").get<int>(), 0);
  EXPECT_EQ(manifest.at("seed").get<std::uint64_t>(), 3u);
  for (const char* key : {"config_hash", "versions", "wall_time_s", "timestamp"}) EXPECT_TRUE(manifest.contains(key)) << key;
  EXPECT_EQ(slurp(dir_ / "out/summary.csv").rfind("name,lhs,rhs,margin,violated\n", 0), 0u);
}

TEST_F(Cli, VerifyIdentitiesA2) {
  const auto cfg = write("i.toml", "[root_system]\ntype = \"a\"\nN = 3\nk = 1.0\n");
  EXPECT_EQ(run(Command::verify_identities, cfg, "out"), exit_ok);
  const auto report = nlohmann::json::parse(slurp(dir_ / "out/reports/identities.json"));
  EXPECT_FALSE(report.at("violated").get<bool>());
}

TEST_F(Cli, SyntheticViolationExitsOne) {
  const auto cfg = write("v.json", R"({"root_system": {"type": "rank1", "k": 1.0}, "check": "synthetic-violation"})");
  EXPECT_EQ(run(Command::check, cfg, "out"), exit_violation);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "out/manifest.json")).at("exit_code").get<int>(), 1);
}

TEST_F(Cli, MalformedTomlReportsLine) {
  std::string log;
  EXPECT_EQ(run(Command::check, write("bad.toml", "check = \"keyineq\"\n[root_system\ntype = \"a\"\n"), "out", &log), exit_config);
  EXPECT_NE(log.find("bad.toml:2"), std::string::npos) << log;
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(Cli, MalformedJsonReportsLine) {
  std::string log;
  EXPECT_EQ(run(Command::check, write("bad.json", "{\n  \"check\": \"keyineq\",\n  \"root_system\": {\"type\": \"rank1\",}\n}"), "out", &log),
            exit_config);
  EXPECT_NE(log.find("bad.json:3:"), std::string::npos) << log;
}

TEST_F(Cli, AllFieldErrorsReported) {
  std::string log;
  const auto cfg = write("f.toml",
                         "check = \"keyineq\"\nbogus = 1\n[root_system]\ntype = \"a\"\n[measure]\np = 0.5\n"
                         "[estimator.mcmc]\nalgo = \"gibbs\"\n");
  EXPECT_EQ(run(Command::check, cfg, "out", &log), exit_config);
  for (const char* needle : {"f.toml:2: bogus: unknown field", "root_system.N", "f.toml:6: measure.p", "estimator.mcmc.algo"}) {
    EXPECT_NE(log.find(needle), std::string::npos) << needle << "\n" << log;
  }
}

TEST_F(Cli, CheckRequirementsValidated) {
  std::string log;
  EXPECT_EQ(run(Command::check, write("a.json", R"({"root_system": {"type": "rank1"}, "measure": {"p": 1.5}, "check": "tight-logsob"})"),
                "out", &log),
            exit_config);
  EXPECT_NE(log.find("check"), std::string::npos);
  EXPECT_EQ(run(Command::check,
                write("b.json", R"({"root_system": {"type": "rank1"}, "check": "keyineq", "options": {"nonsense": 1}})"), "out", &log),
            exit_config);
  EXPECT_NE(log.find("options.nonsense"), std::string::npos);
  EXPECT_EQ(run(Command::check,
                write("c.json", R"({"root_system": {"type": "rank1"}, "measure": {"p": 1.5}, "estimator": {"mcmc": {"algo": "langevin"}}})"),
                "out", &log),
            exit_config);
  EXPECT_NE(log.find("langevin"), std::string::npos);
  EXPECT_EQ(run(Command::check, write("d.json", R"({"root_system": {"type": "rank1"}, "check": "poincare-chamber"})"), "out", &log),
            exit_config);
  EXPECT_NE(log.find("measure.chamber"), std::string::npos);
}

TEST_F(Cli, ReproducibleSummary) {
  const auto cfg = write("r.json", R"({"root_system": {"type": "b", "N": 2, "k": 1.0}, "measure": {"p": 2.0},
    "check": "logsob-boltzmann", "estimator": {"mcmc": {"n": 4000, "chains": 2}}, "seed": 17})");
  ASSERT_EQ(run(Command::check, cfg, "a"), exit_ok);
  ASSERT_EQ(run(Command::check, cfg, "b"), exit_ok);
  EXPECT_EQ(slurp(dir_ / "a/summary.csv"), slurp(dir_ / "b/summary.csv"));
  EXPECT_EQ(slurp(dir_ / "a/reports/logsob-boltzmann.json"), slurp(dir_ / "b/reports/logsob-boltzmann.json"));
  ASSERT_EQ(run(Command::check, cfg, "c", nullptr, 18), exit_ok);
  EXPECT_NE(slurp(dir_ / "a/reports/logsob-boltzmann.json"), slurp(dir_ / "c/reports/logsob-boltzmann.json"));
}

TEST_F(Cli, SampleWritesChainsAndMoment) {
  const auto cfg = write("s.json", R"({"root_system": {"type": "rank1", "k": 1.0}, "estimator": {"mcmc": {"n": 5000, "chains": 2}}, "seed": 2})");
  EXPECT_EQ(run(Command::sample, cfg, "out"), exit_ok);
  for (const char* f : {"chains/chain_0.csv", "chains/chain_0.json", "chains/chain_1.csv", "reports/sample.json", "summary.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  }
  const SampleChain c = read_chain_csv(dir_ / "out/chains/chain_0.csv");
  EXPECT_EQ(c.points.rows(), 5000);
}

TEST_F(Cli, ScanDefaultsToIntegrability) {
  const auto cfg = write("x.json", R"({"root_system": {"type": "rank1", "k": 1.0}, "options": {"b": 0.5}})");
  EXPECT_EQ(run(Command::scan, cfg, "out"), exit_ok);
  const auto report = nlohmann::json::parse(slurp(dir_ / "out/reports/exp-integrability.json"));
  EXPECT_EQ(report.at("details").at("verdict").get<std::string>().substr(0, 9), "converged");
  EXPECT_TRUE(fs::exists(dir_ / "out/plots"));
}

TEST_F(Cli, EstimateConstantsRunsFittedSet) {
  const auto cfg = write("e.json", R"({"root_system": {"type": "rank1", "k": 1.0}, "measure": {"p": 2.0}})");
  EXPECT_EQ(run(Command::estimate_constants, cfg, "out"), exit_ok);
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "out/manifest.json"));
  EXPECT_GE(manifest.at("checks").size(), 3u);
  std::string log;
  EXPECT_EQ(run(Command::estimate_constants, write("k.json", R"({"root_system": {"type": "rank1"}, "check": "keyineq"})"), "o2", &log),
            exit_config);
}

TEST_F(Cli, ListChecks) {
  const std::string s = list_checks();
  EXPECT_NE(s.find("keyineq\t"), std::string::npos);
  EXPECT_NE(s.find("poincare-mu-U\t"), std::string::npos);
  EXPECT_GE(std::count(s.begin(), s.end(), '\n'), 14);
}
