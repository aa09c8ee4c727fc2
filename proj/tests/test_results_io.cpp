#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "mipt/results_io.hpp"

using namespace mipt;

namespace {

const char* kHeader = "model,L,p,beta,gamma,chi,seed_base,n_traj,t,observable,cut,value,stderr,n_samples\n";

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_path(const char* name) { return (std::filesystem::temp_directory_path() / name).string(); }

EnsembleTable sample_table() {
  RunConfig c;
  c.spec.model = Model::CliffordDual;
  c.spec.L = 8;
  c.spec.p = 0.5;
  c.spec.gamma = 1.0;
  c.sched.t_max = 3;
  c.sched.cuts = {2, 4};
  c.sched.observables = {Observable::EE, Observable::PE};
  return run_ensemble(c, 3, 17);
}

}  // namespace

TEST(Csv, EmptyTableIsHeaderOnly) { EXPECT_EQ(to_csv({}), kHeader); }

TEST(Csv, UnsetParametersAreEmpty) {
  const auto rows = flatten(sample_table());
  ASSERT_FALSE(rows.empty());
  const std::string csv = to_csv(rows);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line.rfind("clifford-dual,8,0.5,,1,,17,3,0,ee,2,", 0), 0u) << line;
  EXPECT_EQ(csv.find('\r'), std::string::npos);
}

TEST(Csv, RoundTripReproducesTable) {
  const auto rows = flatten(sample_table());
  std::istringstream in(to_csv(rows));
  EXPECT_EQ(parse_csv(in), rows);
}

TEST(Csv, RoundTripKeepsFullPrecision) {
  ResultRow r;
  r.model = "selfdual";
  r.L = 48;
  r.p = 0.1 + 0.2;
  r.beta = 0.8;
  r.chi = 64;
  r.value = 1.0 / 3.0;
  r.stderr_ = 1e-17;
  r.n_samples = 2000;
  std::istringstream in(to_csv({r}));
  const auto back = parse_csv(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], r);
}

TEST(Csv, HeaderErrorsListMissingColumns) {
  std::istringstream in("model,L,p\nx,1,2\n");
  try {
    parse_csv(in);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("n_samples"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("beta"), std::string::npos);
  }
  std::istringstream empty("");
  EXPECT_THROW(parse_csv(empty), IoError);
}

TEST(Csv, BadFieldReportsLine) {
  std::istringstream in(std::string(kHeader) + "qa,8,0.1,,,,0,1,0,pe,0,1,0,0\nqa,8,oops,,,,0,1,0,pe,0,1,0,0\n");
  try {
    parse_csv(in);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::istringstream short_row(std::string(kHeader) + "qa,8\n");
  EXPECT_THROW(parse_csv(short_row), IoError);
}

TEST(Json, RowObjectsWithIdenticalKeys) {
  const auto j = to_json_rows(flatten(sample_table()));
  ASSERT_TRUE(j.is_array());
  ASSERT_FALSE(j.empty());
  for (const auto& row : j) {
    ASSERT_EQ(row.size(), kCsvColumns.size());
    for (const char* c : kCsvColumns) EXPECT_TRUE(row.contains(c)) << c;
    EXPECT_TRUE(row["beta"].is_null());
    EXPECT_TRUE(row["chi"].is_null());
    EXPECT_EQ(row["gamma"], 1.0);
  }
}

TEST(Emit, WritesBothFormats) {
  const auto table = sample_table();
  const auto csv = temp_path("mipt_emit_test.csv");
  const auto json = temp_path("mipt_emit_test.json");
  emit_results(table, csv, OutputFormat::Csv);
  emit_results(table, json, parse_format("json"));
  EXPECT_EQ(slurp(csv), to_csv(flatten(table)));
  EXPECT_EQ(nlohmann::json::parse(slurp(json)), to_json_rows(flatten(table)));
  EXPECT_EQ(read_csv(csv), flatten(table));
  std::remove(csv.c_str());
  std::remove(json.c_str());
}

TEST(Emit, SurfacesIoFailures) {
  EXPECT_THROW(emit_results(std::vector<ResultRow>{}, "/nonexistent-dir/x.csv", OutputFormat::Csv), IoError);
  EXPECT_THROW(read_csv("/nonexistent-dir/x.csv"), IoError);
  EXPECT_THROW(parse_format("xml"), ConfigError);
}
