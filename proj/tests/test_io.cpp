#include <gtest/gtest.h>

#include <sstream>

#include "tailray/io.hpp"

using namespace tailray;

TEST(Csv, ReadsHeaderAndRows) {
  std::istringstream in("a,b\n1.5,2\n3,4e-1\n\n");
  const auto r = read_csv(in);
  EXPECT_EQ(r.names(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(r.size(), 2u);
  EXPECT_EQ(r.column(1)[1], 0.4);
}

TEST(Csv, RejectsBadInput) {
  std::istringstream one("a\n1\n");
  EXPECT_THROW(read_csv(one), DomainError);
  std::istringstream four("a,b,c,d\n1,2,3,4\n");
  EXPECT_THROW(read_csv(four), DomainError);
  std::istringstream ragged("a,b\n1,2\n3\n");
  EXPECT_THROW(read_csv(ragged), DomainError);
  std::istringstream word("a,b\n1,x\n");
  EXPECT_THROW(read_csv(word), DomainError);
  std::istringstream empty("");
  EXPECT_THROW(read_csv(empty), DomainError);
}

TEST(Csv, WriteReadRoundTripIsExact) {
  const auto s = sample(CopulaModel(TrivariateMaxPareto{}), 50, 3);
  std::stringstream buf;
  write_csv(buf, s);
  std::string header;
  std::getline(buf, header);
  EXPECT_EQ(header, "x,y,z");
  buf.seekg(0);
  const auto raw = read_csv(buf);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(raw.column(j)[i], s.column(j)[i]);
}

TEST(Config, ParsesFieldsAndKeepsDefaults) {
  const auto c = parse_benchmark_config(Json::parse(
      R"({"model": {"name": "bvn", "rho": 0.5}, "reps": 7, "omegas": [0.5, 0.2], "methods": ["wt", "HT"], "seed_base": 9})"));
  EXPECT_TRUE(c.model.is<BivariateNormal>());
  EXPECT_EQ(c.reps, 7u);
  EXPECT_EQ(c.m, 5000u);
  EXPECT_EQ(c.omegas, (std::vector<double>{0.5, 0.2}));
  EXPECT_EQ(c.methods, (std::vector<Method>{Method::wt, Method::ht}));
  EXPECT_EQ(c.seed_base, 9u);
}

TEST(Config, ErrorsCarryJsonPointer) {
  auto pointer_of = [](const char* text) {
    try {
      parse_benchmark_config(Json::parse(text));
    } catch (const ConfigError& e) {
      return e.pointer();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(pointer_of(R"({"reps": "many"})"), "/reps");
  EXPECT_EQ(pointer_of(R"({"omegas": [0.5, 1.5]})"), "/omegas/1");
  EXPECT_EQ(pointer_of(R"({"methods": ["wt", "xx"]})"), "/methods/1");
  EXPECT_EQ(pointer_of(R"({"model": {"name": "bvn", "rho": 2}})"), "/model");
  EXPECT_EQ(pointer_of(R"({"model": {"name": "bvn", "rho": "a"}})"), "/model/rho");
  EXPECT_EQ(pointer_of(R"({"colour": 1})"), "/colour");
  EXPECT_EQ(pointer_of(R"({"frac": 0})"), "/frac");
  EXPECT_EQ(pointer_of(R"([1])"), "");
}

TEST(Json, ReportSerializesNanAsNull) {
  BenchmarkReport r;
  BenchmarkCell c;
  r.cells.push_back(c);
  const auto j = to_json(r);
  EXPECT_TRUE(j["cells"][0]["rmse_nonzero_log"].is_null());
  EXPECT_TRUE(j["ht"]["alpha_mean"].is_null());
}

TEST(TidyCsv, LongFormat) {
  BenchmarkReport r;
  BenchmarkCell c;
  c.method = Method::lt;
  c.omega = 0.25;
  c.prop_zero = 0.5;
  r.cells.push_back(c);
  std::ostringstream out;
  write_tidy_csv(out, r);
  const auto s = out.str();
  EXPECT_EQ(s.rfind("method,omega,metric,value\n", 0), 0u);
  EXPECT_NE(s.find("LT,0.25,prop_zero,0.5\n"), std::string::npos);
  EXPECT_NE(s.find("LT,0.25,rmse_nonzero_log,NA\n"), std::string::npos);
}
