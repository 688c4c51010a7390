#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "covplan/cli/commands.hpp"
#include "covplan/cli/csv.hpp"
#include "covplan/cli/model_io.hpp"
#include "covplan/error.hpp"
#include "covplan/simulation.hpp"
#include "support.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace covplan;
using namespace covplan::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("covplan_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_dataset(const std::string& path, const TrialDataset& d, const std::string& outcome = "y",
                   const std::string& group = "arm") {
  CsvTable t;
  t.header = {outcome, group};
  for (const auto& n : d.names()) t.header.push_back(n);
  for (int i = 0; i < d.n(); ++i) {
    std::vector<std::string> row{format_number(d.outcome()(i)), std::to_string(d.group()[i])};
    for (int j = 0; j < d.k(); ++j) row.push_back(format_number(d.covariates()(i, j)));
    t.rows.push_back(row);
  }
  write_csv_file(path, t);
}

std::string value_of(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  }
  return "";
}

}  // namespace

TEST_CASE("CSV round trip") {
  std::mt19937_64 rng(71);
  const std::string alphabet = "ab,\"\n x.1-";
  for (int rep = 0; rep < 200; ++rep) {
    CsvTable t;
    const int cols = 1 + static_cast<int>(rng() % 5);
    const int rows = static_cast<int>(rng() % 6);
    auto field = [&] {
      if (rng() % 2) return format_number(std::ldexp(static_cast<double>(rng() % 1000000) - 5e5, static_cast<int>(rng() % 40) - 20));
      std::string s;
      const int len = 1 + static_cast<int>(rng() % 6);
      for (int i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
      return s;
    };
    for (int c = 0; c < cols; ++c) t.header.push_back("h" + std::to_string(c) + field());
    for (int r = 0; r < rows; ++r) {
      std::vector<std::string> row;
      for (int c = 0; c < cols; ++c) row.push_back(field());
      t.rows.push_back(row);
    }
    std::stringstream buffer;
    write_csv(buffer, t);
    const CsvTable back = read_csv(buffer);
    CHECK(back == t);
  }
}

TEST_CASE("numbers round trip exactly") {
  std::mt19937_64 rng(72);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(parse_number(format_number(v), "test") == v);
  }
  CHECK(parse_number("+2.5", "x") == 2.5);
  CHECK(parse_number("1e-3", "x") == 0.001);
  CHECK(parse_number(" 1 ", "x") == 1.0);  // surrounding blanks are trimmed
  for (const char* bad : {"", "1.2.3", "abc", "1,5", "1 2", "nan?"}) {
    CHECK_THROWS_AS(parse_number(bad, "x"), Error);
  }
}

TEST_CASE("CSV errors") {
  std::istringstream ragged("a,b\n1,2\n3\n");
  CHECK_THROWS_AS(read_csv(ragged), Error);
  std::istringstream ok("a,b\r\n1,2\r\n\r\n3,4\r\n");
  const CsvTable t = read_csv(ok);
  CHECK(t.rows.size() == 2);
  CHECK(t.column("b") == 1);
  CHECK(t.column("c") == -1);
  try {
    t.require_column("c");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingColumn);
    CHECK(std::string(e.what()).find("'c'") != std::string::npos);
  }
}

TEST_CASE("model file round trip") {
  CompositeModel m;
  m.covariate_names = {"age", "weight, kg"};
  m.center = (VectorXd(2) << 51.25, -0.1).finished();
  m.weights = (VectorXd(2) << 0.1 / 3, 1e-300).finished();
  m.scale = (VectorXd(2) << 12.0, 0.5).finished();
  m.lambda = 0.75;
  m.m = 100;
  m.trained_nu_w = 0.31;
  std::stringstream buffer;
  write_model(buffer, m);
  const std::string text = buffer.str();
  CHECK(text.rfind("name,center,weight\n", 0) == 0);
  CHECK(text.find("__lambda__,0.75,") != std::string::npos);
  CHECK(text.find("__m__,100,") != std::string::npos);
  CHECK(text.find("__scale__,age,12") != std::string::npos);
  const CompositeModel back = read_model(buffer);
  CHECK(back.covariate_names == m.covariate_names);
  CHECK(back.center == m.center);
  CHECK(back.weights == m.weights);
  CHECK(back.scale == m.scale);
  CHECK(back.lambda == m.lambda);
  CHECK(back.m == m.m);
  CHECK(back.trained_nu_w == m.trained_nu_w);
  std::istringstream broken("name,center,weight\nx,0,1\n__bogus__,1,\n");
  CHECK_THROWS_AS(read_model(broken), Error);
}

TEST_CASE("help and usage errors") {
  const Outcome help = invoke({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("simulate") != std::string::npos);
  CHECK(invoke({}).code == kExitUsage);
  CHECK(invoke({"frobnicate"}).code == kExitUsage);
  CHECK(invoke({"plan", "--n", "fifty", "--nu-p", "0.3"}).code == kExitUsage);
  CHECK(invoke({"plan", "--n", "50"}).code == kExitUsage);
}

TEST_CASE("analyze") {
  TempDir dir;
  SUBCASE("zero-noise outcome") {
    const VectorXd y = (VectorXd(6) << 1, 1, 1, 0, 0, 0).finished();
    write_dataset(dir.file("d.csv"), TrialDataset(y, {1, 1, 1, 2, 2, 2}));
    const Outcome r = invoke({"analyze", "--data", dir.file("d.csv"), "--outcome", "y", "--group", "arm"});
    CHECK(r.code == 0);
    CHECK(r.out.find("treatment,1,0,") != std::string::npos);
    CHECK(value_of(r.out, "residual_df") == "4");
  }
  SUBCASE("orthogonal covariate") {
    MatrixXd x(8, 1);
    x << 1, -1, -1, 1, 1, -1, -1, 1;
    const VectorXd y = (VectorXd(8) << 2, 4, 3, 5, 0, 1, -1, 2).finished();
    write_dataset(dir.file("d.csv"), TrialDataset(y, {1, 1, 1, 1, 2, 2, 2, 2}, x, {"x"}));
    const Outcome with = invoke({"analyze", "--data", dir.file("d.csv"), "--outcome", "y", "--group", "arm", "--covariates", "x"});
    const Outcome without = invoke({"analyze", "--data", dir.file("d.csv"), "--outcome", "y", "--group", "arm"});
    REQUIRE(with.code == 0);
    REQUIRE(without.code == 0);
    auto effect_line = [](const std::string& s) {
      const auto at = s.find("treatment,");
      return s.substr(at, s.find(',', at + 10) - at);
    };
    CHECK(effect_line(with.out) == effect_line(without.out));
    CHECK(value_of(with.out, "residual_df") == "5");
    CHECK(value_of(without.out, "residual_df") == "6");
    CHECK(value_of(with.out, "r2_zx") == "0");
  }
  SUBCASE("contrasts and group coding") {
    std::mt19937_64 rng(73);
    write_dataset(dir.file("g.csv"), test::random_groups(30, 3, 2, rng));
    const Outcome bad = invoke({"analyze", "--data", dir.file("g.csv"), "--outcome", "y", "--group", "arm", "--contrast", "1,0,-0.5"});
    CHECK(bad.code == kExitUsage);
    CHECK(bad.err.find("invalid contrast") != std::string::npos);
    const Outcome good = invoke({"analyze", "--data", dir.file("g.csv"), "--outcome", "y", "--group", "arm", "--covariates", "x1,x2", "--contrast", "1,-1,0;0,1,-1"});
    CHECK(good.code == 0);
    CHECK(good.out.find("contrast2,") != std::string::npos);
    CHECK(value_of(good.out, "residual_df") == "25");
    const Outcome defaults = invoke({"analyze", "--data", dir.file("g.csv"), "--outcome", "y", "--group", "arm"});
    CHECK(defaults.out.find("group1-group3,") != std::string::npos);
    // 0/1 coding: 1 = treatment.
    std::ofstream(dir.file("z.csv")) << "y,z\n1,1\n1,1\n0,0\n0,0\n1,1\n0,0\n";
    const Outcome z = invoke({"analyze", "--data", dir.file("z.csv"), "--outcome", "y", "--group", "z"});
    CHECK(z.out.find("treatment,1,0,") != std::string::npos);
  }
  SUBCASE("failures") {
    std::mt19937_64 rng(74);
    const TrialDataset base = test::random_two_group(20, 2, rng);
    write_dataset(dir.file("d.csv"), base.with_column("copy", base.covariates().col(1) * 3.0));
    const Outcome rank = invoke({"analyze", "--data", dir.file("d.csv"), "--outcome", "y", "--group", "arm", "--covariates", "x1,x2,copy"});
    CHECK(rank.code == kExitNumeric);
    CHECK(rank.err.find("x2") != std::string::npos);
    CHECK(rank.err.find("copy") != std::string::npos);
    const Outcome missing = invoke({"analyze", "--data", dir.file("d.csv"), "--outcome", "y", "--group", "arm", "--covariates", "x9"});
    CHECK(missing.code == kExitUsage);
    CHECK(missing.err.find("x9") != std::string::npos);
    std::ofstream(dir.file("bad.csv")) << "y,arm\n1,1\nfoo,2\n";
    CHECK(invoke({"analyze", "--data", dir.file("bad.csv"), "--outcome", "y", "--group", "arm"}).code == kExitUsage);
    CHECK(invoke({"analyze", "--data", dir.file("nope.csv"), "--outcome", "y", "--group", "arm"}).code == kExitUsage);
  }
}

TEST_CASE("plan") {
  const Outcome half = invoke({"plan", "--n", "50", "--g", "2", "--nu-p", "0.5"});
  CHECK(half.code == 0);
  CHECK(value_of(half.out, "max_beneficial_covariates") == "23");
  CHECK(half.out.find("\n1,0.0212766,yes,") != std::string::npos);
  const Outcome none = invoke({"plan", "--n", "50", "--g", "2", "--nu-p", "0.0"});
  CHECK(none.code == 0);
  CHECK(value_of(none.out, "max_beneficial_covariates") == "0");
  CHECK(none.out.find("1/47") != std::string::npos);
  CHECK(invoke({"plan", "--n", "50", "--nu-p", "1.5"}).code == kExitUsage);

  TempDir dir;
  SimProtocol protocol;
  protocol.k_max = 8;
  std::mt19937_64 rng(75);
  write_dataset(dir.file("h.csv"), generate_study(protocol, 100, 0.5, rng));
  const Outcome hist = invoke({"plan", "--n", "50", "--historical", dir.file("h.csv"), "--outcome", "y", "--group", "arm", "--ranking", "x1,x2,x3,x4,x5,x6"});
  CHECK(hist.code == 0);
  CHECK(value_of(hist.out, "optimal_p") != "");
  CHECK(hist.out.find("\n6,x6,") != std::string::npos);

  // A single pure-noise covariate: usually nothing to gain.
  int zero = 0;
  for (int r = 0; r < 20; ++r) {
    MatrixXd x = test::normal_matrix(100, 1, rng);
    VectorXd y = test::normal_matrix(100, 1, rng).col(0);
    std::vector<int> arm(100);
    for (int i = 0; i < 100; ++i) arm[i] = i % 2 + 1;
    write_dataset(dir.file("noise.csv"), TrialDataset(y, arm, x, {"noise"}));
    const Outcome r2 = invoke({"plan", "--n", "50", "--historical", dir.file("noise.csv"), "--outcome", "y", "--group", "arm", "--ranking", "noise"});
    zero += value_of(r2.out, "optimal_p") == "0";
  }
  CHECK(zero > 10);
}

TEST_CASE("composite train and apply") {
  TempDir dir;
  SimProtocol protocol;
  protocol.k_max = 12;
  std::mt19937_64 rng(76);
  write_dataset(dir.file("h.csv"), generate_study(protocol, 100, 0.0, rng));
  write_dataset(dir.file("t.csv"), generate_study(protocol, 50, 0.8, rng));
  const std::string covs = "x1,x2,x3,x4,x5,x6,x7,x8,x9,x10";
  const Outcome train = invoke({"composite", "train", "--historical", dir.file("h.csv"), "--outcome", "y", "--group", "arm", "--covariates", covs, "--out", dir.file("model.csv")});
  REQUIRE(train.code == 0);
  CHECK(slurp(dir.file("model.csv")).find("__scale__,x10,") != std::string::npos);

  for (const std::string& data : {std::string("h.csv"), std::string("t.csv")}) {
    const Outcome apply = invoke({"composite", "apply", "--model", dir.file("model.csv"), "--data", dir.file(data), "--out-column", "W", "--out", dir.file("w.csv")});
    REQUIRE(apply.code == 0);
    const CsvTable original = read_csv_file(dir.file(data));
    const CsvTable extended = read_csv_file(dir.file("w.csv"));
    CHECK(extended.header.back() == "W");
    CHECK(extended.rows.size() == original.rows.size());
    const Outcome a = invoke({"analyze", "--data", dir.file("w.csv"), "--outcome", "y", "--group", "arm", "--covariates", "W"});
    CHECK(a.code == 0);
    CHECK(value_of(a.out, "residual_df") == std::to_string(original.rows.size() - 3));
  }

  // All-zero weights.
  std::ofstream(dir.file("zero.csv")) << "name,center,weight\nx1,0.5,0\nx2,-1,0\n__lambda__,1,\n__m__,10,\n";
  REQUIRE(invoke({"composite", "apply", "--model", dir.file("zero.csv"), "--data", dir.file("t.csv"), "--out", dir.file("z.csv")}).code == 0);
  for (double w : read_csv_file(dir.file("z.csv")).numeric_column("W")) CHECK(w == 0.0);

  std::ofstream(dir.file("short.csv")) << "y,arm,x1\n1,1,0\n2,2,1\n";
  const Outcome missing = invoke({"composite", "apply", "--model", dir.file("model.csv"), "--data", dir.file("short.csv"), "--out", dir.file("s.csv")});
  CHECK(missing.code == kExitUsage);
  CHECK(missing.err.find("x2") != std::string::npos);

  const Outcome bad_lambda = invoke({"composite", "train", "--historical", dir.file("h.csv"), "--outcome", "y", "--group", "arm", "--covariates", "x1", "--lambda", "-1", "--out", dir.file("m2.csv")});
  CHECK(bad_lambda.code == kExitUsage);
  const Outcome fixed = invoke({"composite", "train", "--historical", dir.file("h.csv"), "--outcome", "y", "--group", "arm", "--covariates", "x1,x2", "--lambda", "0", "--out", dir.file("m3.csv")});
  CHECK(fixed.code == 0);
  CHECK(value_of(fixed.out, "lambda") == "0");
}

TEST_CASE("simulate") {
  TempDir dir;
  const std::vector<std::string> common{"--nsim", "40", "--p-grid", "1:41:10", "--seed", "7"};
  auto args = [&](const std::string& out) {
    std::vector<std::string> a{"simulate", "both", "--out-dir", dir.file(out)};
    a.insert(a.end(), common.begin(), common.end());
    return a;
  };
  ::setenv("COVPLAN_THREADS", "1", 1);
  REQUIRE(invoke(args("a")).code == 0);
  ::setenv("COVPLAN_THREADS", "3", 1);
  REQUIRE(invoke(args("b")).code == 0);
  ::unsetenv("COVPLAN_THREADS");
  for (const char* f : {"figure2.csv", "figure3.csv", "protocol.txt"}) {
    CHECK(slurp(dir.file(std::string("a/") + f)) == slurp(dir.file(std::string("b/") + f)));
  }
  const CsvTable fig2 = read_csv_file(dir.file("a/figure2.csv"));
  CHECK(fig2.header == std::vector<std::string>{"p", "re_p_emp", "re_p_lo", "re_p_hi", "re_p_theory", "re_w_emp", "re_w_lo", "re_w_hi", "re_w_ideal"});
  CHECK(fig2.rows.size() == 5);
  const CsvTable fig3 = read_csv_file(dir.file("a/figure3.csv"));
  CHECK(fig3.header.size() == 13);
  CHECK(fig3.column("power_c_ideal") == 12);
  const std::string protocol = slurp(dir.file("a/protocol.txt"));
  CHECK(protocol.find("seed = 7\n") != std::string::npos);
  CHECK(protocol.find("p_grid = 1,11,21,31,41\n") != std::string::npos);
  CHECK(protocol.find("gamma = ") != std::string::npos);

  const Outcome no_seed = invoke({"simulate", "figure2", "--nsim", "3", "--p-grid", "2", "--out-dir", dir.file("c")});
  CHECK(no_seed.code == 0);
  CHECK(value_of(no_seed.out, "seed") != "");
  CHECK_FALSE(fs::exists(dir.file("c/figure3.csv")));

  CHECK(invoke({"simulate", "both", "--p-grid", "0:5", "--nsim", "3", "--out-dir", dir.file("d")}).code == kExitUsage);
  CHECK(invoke({"simulate", "both", "--p-grid", "5:1", "--nsim", "3", "--out-dir", dir.file("d")}).code == kExitUsage);
  CHECK(invoke({"simulate", "both", "--p-grid", "1,x", "--nsim", "3", "--out-dir", dir.file("d")}).code == kExitUsage);
  CHECK(invoke({"simulate", "figure9", "--nsim", "3"}).code == kExitUsage);
}

TEST_CASE("region") {
  const Outcome tie = invoke({"region", "--n", "50", "--nu-p", "0.3", "--nu-w", "0.3", "--p", "1"});
  CHECK(tie.code == 0);
  CHECK(value_of(tie.out, "ordering") == "W = p > 0");
  const Outcome bound = invoke({"region", "--n", "50", "--nu-p", "0.3", "--nu-w", "0.4", "--p", "5"});
  CHECK(bound.code == kExitUsage);
  CHECK(bound.err.find("cannot explain more variance") != std::string::npos);
  CHECK(invoke({"region", "--n", "50", "--nu-p", "0.3"}).code == kExitUsage);

  TempDir dir;
  const Outcome grid = invoke({"region", "--n", "50", "--nu-p", "0.5", "--grid", "--out", dir.file("region.csv")});
  REQUIRE(grid.code == 0);
  CHECK(value_of(grid.out, "triple_point") == "p=23.5 nu_w=0.0212766");
  // With the triple point just below an integer p all six orderings reach a cell.
  REQUIRE(invoke({"region", "--n", "50", "--nu-p", "0.51", "--grid", "--out", dir.file("region.csv")}).code == 0);
  const CsvTable t = read_csv_file(dir.file("region.csv"));
  CHECK(t.header == std::vector<std::string>{"kind", "p", "nu_w", "label"});
  std::set<std::string> kinds, labels;
  for (const auto& row : t.rows) {
    kinds.insert(row[0]);
    if (row[0] == "cell" && row[3].find('=') == std::string::npos) labels.insert(row[3]);
  }
  CHECK(kinds == std::set<std::string>{"cell", "composite_vs_none", "covariates_vs_none", "composite_vs_covariates"});
  CHECK(labels.size() == 6);
}
