#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "cli_cases.hpp"
#include "oracles.hpp"
#include "qcfb/report.hpp"
#include "qcfb/system_file.hpp"

namespace qcfb {
namespace {

namespace fs = std::filesystem;
using testing::CliCase;
using testing::run_cli;

bool is_json_case(const CliCase& c) { return !c.args.empty() && c.args[0] == "--format"; }

class Golden : public ::testing::TestWithParam<CliCase> {};

TEST_P(Golden, MatchesFile) {
  const CliCase& c = GetParam();
  const auto r = run_cli(c.args);
  EXPECT_EQ(r.exit_code, c.exit_code) << r.out << r.err;
  const std::string text = testing::normalize(r.out);
  const std::string diff = testing::compare_golden(c.name, text);
  EXPECT_TRUE(diff.empty()) << diff;
}

INSTANTIATE_TEST_SUITE_P(Cli, Golden, ::testing::ValuesIn(testing::golden_cases()),
                         [](const auto& info) { return info.param.name; });

std::vector<CliCase> json_cases() {
  std::vector<CliCase> out;
  for (const auto& c : testing::golden_cases()) {
    if (is_json_case(c)) out.push_back(c);
  }
  return out;
}

class JsonReport : public ::testing::TestWithParam<CliCase> {};

TEST_P(JsonReport, ConformsToSchema) {
  const auto r = run_cli(GetParam().args);
  const std::string problems = testing::validate_schema(r.out, "report.schema.json");
  EXPECT_TRUE(problems.empty()) << problems;
  EXPECT_EQ(cli::Json::parse(r.out).at("exit_code"), r.exit_code);
}

INSTANTIATE_TEST_SUITE_P(Cli, JsonReport, ::testing::ValuesIn(json_cases()),
                         [](const auto& info) { return info.param.name; });

TEST(ExitCodes, ErrorsGoToStderr) {
  const auto r = run_cli({"check", "malformed.json"});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("entry must be [re, im]"), std::string::npos);
}

TEST(ExitCodes, JsonErrorReport) {
  const auto r = run_cli({"--format", "json", "check", "malformed.json"});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_TRUE(testing::validate_schema(r.out, "report.schema.json").empty());
  const auto doc = cli::Json::parse(r.out);
  EXPECT_EQ(doc.at("exit_code"), 2);
  EXPECT_TRUE(doc.contains("error"));
}

TEST(ExitCodes, UnknownOptionIsUsageError) {
  EXPECT_EQ(run_cli({"check", "cavity.json", "--bogus"}).exit_code, 2);
  EXPECT_EQ(run_cli({}).exit_code, 2);
  EXPECT_EQ(run_cli({"--format", "xml", "check", "cavity.json"}).exit_code, 2);
}

TEST(Schema, CorpusFilesConform) {
  for (const auto& entry : fs::directory_iterator(testing::data_dir())) {
    if (entry.path().filename() == "malformed.json") continue;
    std::ifstream in(entry.path());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string problems = testing::validate_schema(buf.str(), "system_file.schema.json");
    EXPECT_TRUE(problems.empty()) << entry.path() << ": " << problems;
  }
}

TEST(Schema, MalformedFileIsRejectedBySchema) {
  std::ifstream in(testing::data_dir() / "malformed.json");
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_FALSE(testing::validate_schema(buf.str(), "system_file.schema.json").empty());
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("qcfb_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

bool bit_identical(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(Complex) * static_cast<std::size_t>(a.size())) == 0;
}

TEST(RoundTrip, RandomSystemsBitIdentical) {
  TempDir tmp;
  testing::Gen gen(60);
  for (int trial = 0; trial < 20; ++trial) {
    const SystemKind kind = trial % 2 == 0 ? SystemKind::annihilation : SystemKind::general;
    const auto r = random_pr_system(1 + trial % 3, 1 + trial % 2, trial, kind);
    const cli::SystemFile f = cli::from_system(r.system);
    const fs::path path = tmp / "system.json";
    cli::write_system_file(path, f);
    const cli::SystemFile back = cli::read_system_file(path);
    ASSERT_EQ(back.matrices.size(), f.matrices.size());
    for (std::size_t i = 0; i < f.matrices.size(); ++i) {
      EXPECT_EQ(back.matrices[i].first, f.matrices[i].first);
      EXPECT_TRUE(bit_identical(back.matrices[i].second, f.matrices[i].second))
          << "trial " << trial << " matrix " << f.matrices[i].first;
    }
    EXPECT_EQ(cli::dump(back), cli::dump(f));
  }
}

TEST(RoundTrip, ExtremeValues) {
  Matrix m(2, 2);
  m << Complex(5e-324, -1.7976931348623157e308), Complex(0.1, 1.0 / 3.0),
      Complex(-0.0, 2.2250738585072014e-308), Complex(123456789.12345678, -1e-300);
  const cli::Json j = cli::matrix_to_json(m);
  const Matrix back = cli::matrix_from_json(cli::Json::parse(j.dump()), "m", 2);
  EXPECT_TRUE(bit_identical(m, back));
}

TEST(RoundTrip, PlantAndController) {
  const PlantModel p = random_pr_plant(2, 2, 1, 3, 2, 2);
  const cli::SystemFile pf = cli::from_plant(p);
  const PlantModel p2 = cli::to_plant(cli::parse_system_file(cli::Json::parse(cli::dump(pf))));
  EXPECT_TRUE(bit_identical(p.f, p2.f));
  EXPECT_TRUE(bit_identical(p.g_u, p2.g_u));
  ASSERT_TRUE(p2.cost && p2.selector);
  EXPECT_TRUE(bit_identical(p.cost->c, p2.cost->c));
  EXPECT_TRUE(bit_identical(*p.selector, *p2.selector));
  const ControllerModel c = random_pr_controller(1, 2, 4);
  const ControllerModel c2 = cli::to_controller(
      cli::parse_system_file(cli::Json::parse(cli::dump(cli::from_controller(c)))));
  EXPECT_TRUE(bit_identical(c.g_cw, c2.g_cw));
  EXPECT_TRUE(bit_identical(c.h_c, c2.h_c));
}

TEST(Output, GenThenCheck) {
  TempDir tmp;
  const std::string out = (tmp / "gen.json").string();
  ASSERT_EQ(run_cli({"--seed", "11", "gen", "2", "2", "-o", out}).exit_code, 0);
  EXPECT_EQ(run_cli({"check", out, "--transfer"}).exit_code, 0);
  std::ifstream in(out);
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_TRUE(testing::validate_schema(buf.str(), "system_file.schema.json").empty());
}

TEST(Output, SynthThenCompose) {
  TempDir tmp;
  const std::string out = (tmp / "controller.json").string();
  ASSERT_EQ(run_cli({"synth", "triple_admissible.json", "-o", out}).exit_code, 0);
  const auto r = run_cli({"compose", "cavity_plant.json", out, "--require-stable"});
  EXPECT_EQ(r.exit_code, 0) << r.out << r.err;
}

TEST(Output, ParamsThenCheck) {
  TempDir tmp;
  const std::string out = (tmp / "params.json").string();
  ASSERT_EQ(run_cli({"params", "cavity_detuned.json", "-o", out}).exit_code, 0);
  EXPECT_EQ(run_cli({"check", out}).exit_code, 0);
}

TEST(Normalize, SmallValuesAndDigits) {
  EXPECT_EQ(testing::normalize("a 1.0000000000000002 b 3e-13 c -2.5e-20 d 0.0"), "a 1 b ~0 c ~0 d 0");
  EXPECT_EQ(testing::normalize("tol 1e-08, x 12"), "tol 1e-08, x 12");
}

}  // namespace
}  // namespace qcfb
