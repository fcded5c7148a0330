#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "error.hpp"
#include "report.hpp"
#include "workflows.hpp"

using namespace ideg;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kBase{"coefficient.alpha=0.5", "coefficient.x0=0.3"};

std::vector<std::string> with(std::vector<std::string> extra) {
  auto v = kBase;
  v.insert(v.end(), extra.begin(), extra.end());
  return v;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("ideg_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_key(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<no error>";
}

}  // namespace

TEST(Config, MissingRequiredKeyNamesIt) {
  EXPECT_EQ(error_key([] { RunConfig::from_json_text("", {"coefficient.alpha=0.5"}); }),
            "coefficient.x0");
  EXPECT_EQ(error_key([] { RunConfig::from_json_text("", {"coefficient.x0=0.3"}); }),
            "coefficient.alpha");
  try {
    RunConfig::from_json_text(R"({"coefficient": {"alpha": 0.5}})", {});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("coefficient.x0"), std::string::npos);
  }
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_EQ(error_key([] { RunConfig::from_json_text(R"({"grid": {"NN": 3}})", kBase); }), "grid.NN");
  EXPECT_EQ(error_key([] { RunConfig::from_json_text("", with({"bogus.key=1"})); }), "bogus.key");
  EXPECT_EQ(error_key([] { RunConfig::from_json_text("", with({"grid=1"})); }), "grid");
  EXPECT_EQ(error_key([] { RunConfig::from_json_text("", with({"noequals"})); }), "noequals");
  EXPECT_EQ(error_key([] { RunConfig::from_json_text("{", kBase); }), "<config>");
  EXPECT_EQ(error_key([] { RunConfig::from_json_text("", with({"coefficient.alpha=2.5"})); }),
            "coefficient.alpha");
  EXPECT_EQ(error_key([] { RunConfig::from_json_text("", with({"weight.c2=0.1"})); }), "weight.c2");
  EXPECT_EQ(error_key([] { RunConfig::from_json_text("", with({"hp.q=2"})); }), "hp.q");
  EXPECT_EQ(error_key([] { RunConfig::from_json_text("", with({"grid.N=abc"})); }), "grid.N");
  EXPECT_EQ(error_key([] { RunConfig::from_json_text("", with({"identity.time_exponent=5"})); }),
            "identity.time_exponent");
  EXPECT_EQ(error_key([] { RunConfig::from_json_text("", with({"run.seed=-1"})); }), "run.seed");
  EXPECT_EQ(error_key([] { RunConfig::from_json_text("", with({"run.format=xml"})); }), "run.format");
  EXPECT_EQ(error_key([] { RunConfig::from_json_text("", with({"coefficient.kind=cubic"})); }),
            "coefficient.kind");
}

TEST(Config, LayeringOrder) {
  const auto cfg = RunConfig::from_json_text(R"({"grid": {"N": 50}, "run": {"seed": 3}})",
                                             with({"grid.N=60", "control.u0=sine"}),
                                             std::string("elsewhere"), 9u);
  EXPECT_EQ(cfg.integer("grid.N"), 60);
  EXPECT_EQ(cfg.text("control.u0"), "sine");
  EXPECT_EQ(cfg.seed(), 9u);
  EXPECT_EQ(cfg.out_dir(), fs::path("elsewhere"));
  EXPECT_EQ(cfg.integer("grid.M"), 400);
  // c2 defaults to (1 + margin) c2_min.
  const auto m = cfg.coefficient();
  EXPECT_NEAR(cfg.weight(m).c2, 1.1 * c2_min(m), 1e-15);
}

TEST(Config, TablePathResolvesAgainstConfigDirectory) {
  const auto dir = scratch("table");
  {
    std::ofstream t(dir / "a.csv");
    t << "x,a,a_prime\n";
    for (int i = 0; i <= 10; ++i) {
      const double x = i / 10.0, d = std::abs(x - 0.5);
      t << x << "," << d << "," << (x > 0.5 ? 1 : (x < 0.5 ? -1 : 0)) << "\n";
    }
    std::ofstream c(dir / "cfg.json");
    c << R"({"coefficient": {"kind": "tabulated", "x0": 0.5, "K": 1.0, "table_path": "a.csv"}})";
  }
  const auto cfg = RunConfig::load(dir / "cfg.json", {});
  EXPECT_EQ(fs::path(cfg.text("coefficient.table_path")), (dir / "a.csv").lexically_normal());
  EXPECT_NEAR(cfg.coefficient().a(0.8), 0.3, 1e-12);

  {
    std::ofstream c(dir / "bad.json");
    c << R"({"coefficient": {"kind": "tabulated", "x0": 0.5, "K": 1.0, "table_path": "none.csv"}})";
  }
  EXPECT_EQ(error_key([&] { RunConfig::load(dir / "bad.json", {}); }), "coefficient.table_path");
  EXPECT_EQ(error_key([&] { RunConfig::load(dir / "missing.json", {}); }), "--config");
}

TEST(Report, NumberFormattingAndEscaping) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(-INFINITY), "-inf");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_escape("two\nlines"), "\"two\nlines\"");
}

TEST(Report, CsvLayout) {
  const auto dir = scratch("csv");
  Table t{{"name", "value"}, {}};
  t.add({std::string("x,y"), 0.5});
  t.add({std::string("n"), 3LL});
  const auto path = write_table(dir, "t", t, {{"k", 1}}, "csv");
  EXPECT_EQ(read_file(path), "# config: {\"k\":1}\r\nname,value\r\n\"x,y\",0.5\r\nn,3\r\n");
  const auto jpath = write_table(dir, "t", t, {{"k", 1}}, "json");
  const auto doc = nlohmann::json::parse(read_file(jpath));
  EXPECT_EQ(doc["rows"][0][0], "x,y");
  EXPECT_EQ(doc["config"]["k"], 1);
}

TEST(Workflows, CheckCoeffSummary) {
  const auto dir = scratch("wf_coeff");
  const auto cfg = RunConfig::from_json_text("", with({"grid.N=1000"}), dir.string());
  const auto r = run_workflow("check-coeff", cfg);
  EXPECT_TRUE(r.pass());
  const auto doc = nlohmann::json::parse(read_file(dir / "check_coeff_summary.json"));
  EXPECT_EQ(doc["subcommand"], "check-coeff");
  EXPECT_TRUE(doc["pass"].get<bool>());
  bool found = false;
  for (const auto& v : doc["verdicts"])
    if (v["name"] == "equality_slack") {
      found = true;
      EXPECT_LT(v["value"].get<double>(), 1e-12);
    }
  EXPECT_TRUE(found);
  EXPECT_TRUE(fs::exists(dir / "check_coeff.csv"));
  EXPECT_NE(summary_text(r).find("PASS equality_slack"), std::string::npos);
}

TEST(Workflows, HpSummaryCarriesAnalyticBound) {
  const auto dir = scratch("wf_hp");
  const auto cfg = RunConfig::from_json_text("", with({"hp.N=200", "hp.battery_size=5"}), dir.string());
  const auto r = run_workflow("hp", cfg);
  const auto doc = nlohmann::json::parse(read_file(dir / "hp_summary.json"));
  EXPECT_DOUBLE_EQ(doc["details"]["analytic_bound"].get<double>(), 16.0);
  EXPECT_EQ(r.verdicts.size(), 3u);
}

TEST(Workflows, UnknownSubcommand) {
  const auto cfg = RunConfig::from_json_text("", kBase);
  EXPECT_THROW(run_workflow("nope", cfg), ConfigError);
  EXPECT_TRUE(is_subcommand("all"));
  EXPECT_EQ(subcommands().size(), 8u);
}
