#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pathcalc/path.hpp"

namespace fs = std::filesystem;
using namespace pathcalc;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::path(::testing::TempDir()) / (std::string("pathcalc_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path file(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  int run(const std::string& args) {
    const std::string cmd = std::string(PATHCALC_TOOL) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  nlohmann::json meta(const fs::path& out) {
    std::ifstream in(out / "meta.txt");
    return nlohmann::json::parse(in);
  }

  fs::path dir_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Relative path -> contents of every file under root.
std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

// Rows of a CSV with a header line, as name -> column.
std::map<std::string, std::vector<double>> read_table(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> names;
  std::stringstream hs(line);
  for (std::string c; std::getline(hs, c, ',');) names.push_back(c);
  std::map<std::string, std::vector<double>> cols;
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::size_t k = 0;
    for (std::string c; std::getline(ls, c, ','); ++k) cols[names.at(k)].push_back(std::stod(c));
  }
  return cols;
}

void write_ramp(const fs::path& p, int level) {
  const auto g = dyadic_refinement(1.0, level);
  write_csv_file(p.string(),
                 CadlagPath::scalar(g, std::vector<double>(g.times().begin(), g.times().end())));
}

}  // namespace

TEST_F(Cli, SimulateIsDeterministic) {
  const auto cfg = file("sim.ini", "[generator]\nlevel = 8\ndimension = 2\n[run]\npaths = 3\n");
  const auto a = dir_ / "a", b = dir_ / "b";
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --seed 5 --out " + a.string()), 0);
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --seed 5 --out " + b.string()), 0);
  EXPECT_EQ(tree(a), tree(b));
  EXPECT_TRUE(fs::exists(a / "paths" / "path_00002.csv"));
  EXPECT_TRUE(fs::exists(a / "paths" / "path_00002.json"));
  std::ifstream in(a / "paths" / "path_00000.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,x1,x2");
  EXPECT_EQ(meta(a)["config"]["generator"]["seed"], 5);
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --seed 6 --out " + b.string()), 0);
  EXPECT_NE(slurp(a / "paths" / "path_00000.csv"), slurp(b / "paths" / "path_00000.csv"));
}

TEST_F(Cli, SimulateUnitDrift) {
  const auto cfg = file("sim.ini",
                        "[generator]\nkind = ito_euler\nlevel = 6\ndrift = constant:1\n"
                        "vol = constant:0\nseed = 1\n");
  const auto out = dir_ / "o";
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + out.string()), 0);
  const auto w = read_csv_file((out / "paths" / "path_00000.csv").string());
  for (std::size_t k = 0; k < w.size(); ++k) EXPECT_EQ(w.at(k, 0), w.grid()[k]);
}

TEST_F(Cli, IntegrateConstantIntegrand) {
  const auto in = dir_ / "in.csv";
  {
    const auto g = dyadic_refinement(1.0, 6);
    std::vector<double> v;
    for (std::size_t k = 0; k < g.size(); ++k) v.push_back(std::sin(7.0 * g[k]));
    write_csv_file(in.string(), CadlagPath::scalar(g, v));
  }
  const auto cfg = file("i.ini", "[functional]\nname = constant:2\n[run]\ninput = " +
                                     in.string() + "\n");
  const auto out = dir_ / "o";
  ASSERT_EQ(run("integrate --config " + cfg.string() + " --out " + out.string()), 0);
  const auto x = read_csv_file(in.string());
  const auto r = read_csv_file((out / "results" / "integral.csv").string());
  for (std::size_t k = 0; k < x.size(); ++k) EXPECT_EQ(r.at(k, 0), 2.0 * x.at(k, 0));
  EXPECT_TRUE(fs::exists(out / "paths" / "input.csv"));
}

TEST_F(Cli, IntegrateRampAgainstItself) {
  const auto in = dir_ / "ramp.csv";
  write_ramp(in, 14);
  const auto cfg = file("i.ini", "[functional]\nname = coordinate:1\n[bk]\nmax_level = 12\n"
                                 "[run]\ninput = " + in.string() + "\n");
  const auto out = dir_ / "o";
  ASSERT_EQ(run("integrate --config " + cfg.string() + " --out " + out.string()), 0);
  const auto r = read_csv_file((out / "results" / "integral.csv").string());
  for (std::size_t k = 0; k < r.size(); k += 101) {
    const double t = r.grid()[k];
    EXPECT_NEAR(r.at(k, 0), 0.5 * t * t, 2.0 * std::ldexp(1.0, -12));
  }
  EXPECT_TRUE(meta(out)["results"]["bk"]["converged"].get<bool>());
}

TEST_F(Cli, IntegrateNonConvergence) {
  const auto sim = file("s.ini", "[generator]\nlevel = 10\nseed = 3\n");
  ASSERT_EQ(run("simulate --config " + sim.string() + " --out " + (dir_ / "s").string()), 0);
  const auto in = dir_ / "s" / "paths" / "path_00000.csv";
  const auto cfg = file("i.ini", "[functional]\nname = coordinate:1\n[bk]\nmax_level = 1\n"
                                 "cauchy_tol = 1e-9\n[run]\ninput = " + in.string() + "\n");
  const auto out = dir_ / "o";
  ASSERT_EQ(run("integrate --config " + cfg.string() + " --out " + out.string()), 0);
  EXPECT_FALSE(meta(out)["results"]["bk"]["converged"].get<bool>());
  EXPECT_EQ(run("integrate --config " + cfg.string() + " --strict-bk --out " + out.string()), 4);
  const auto r = read_csv_file((out / "results" / "integral.csv").string());
  EXPECT_EQ(r.sup_norm(), 0.0);
}

TEST_F(Cli, QvOfPureJump) {
  const auto in = dir_ / "jump.csv";
  write_csv_file(in.string(), CadlagPath::scalar(Partition({0.0, 0.5, 1.0}), {0.0, 1.25, 1.25}));
  const auto cfg = file("q.ini", "[run]\ninput = " + in.string() + "\n");
  const auto out = dir_ / "o";
  ASSERT_EQ(run("qv --config " + cfg.string() + " --out " + out.string()), 0);
  const auto B = read_csv_file((out / "results" / "qv_1_1.csv").string());
  EXPECT_EQ(B.at(0, 0), 0.0);
  EXPECT_EQ(B.at(1, 0), 1.5625);
  EXPECT_EQ(meta(out)["results"]["pairs"][0]["final_value"], 1.5625);
}

TEST_F(Cli, ItoCheckQvSelfConsistency) {
  const auto cfg = file("c.ini", "[generator]\nlevel = 10\n[functional]\nname = qv\n"
                                 "[run]\nensemble = 8\nlevels = 6,8,10\n");
  const auto out = dir_ / "o";
  ASSERT_EQ(run("ito-check --config " + cfg.string() + " --seed 9 --out " + out.string()), 0);
  const auto rep = read_table(out / "results" / "ito_report.csv");
  for (double m : rep.at("median_sup")) EXPECT_LT(m, 1e-12);
  EXPECT_TRUE(fs::exists(out / "results" / "ito_trace.csv"));
  EXPECT_TRUE(fs::exists(out / "results" / "ito_components.csv"));
}

TEST_F(Cli, ItoCheckDoleansDadeDecreases) {
  const auto cfg = file("c.ini", "[generator]\nlevel = 12\n[functional]\nname = doleans_dade\n"
                                 "[run]\nensemble = 20\nlevels = 6,8,10\n");
  const auto out = dir_ / "o";
  ASSERT_EQ(run("ito-check --config " + cfg.string() + " --seed 2024 --out " + out.string()), 0);
  const auto m = read_table(out / "results" / "ito_report.csv").at("median_sup");
  ASSERT_EQ(m.size(), 3u);
  EXPECT_GT(m[0], m[1]);
  EXPECT_GT(m[1], m[2]);
}

TEST_F(Cli, ItoCheckSquareMatchesOracle) {
  const auto cfg = file("c.ini", "[generator]\nlevel = 12\n[functional]\nname = square:1\n"
                                 "[run]\nensemble = 4\nlevels = 8,12\n");
  const auto out = dir_ / "o";
  ASSERT_EQ(run("ito-check --config " + cfg.string() + " --seed 1 --out " + out.string()), 0);
  const auto c = read_table(out / "results" / "ito_components.csv");
  ASSERT_TRUE(c.count("oracle"));
  const auto& rhs = c.at("rhs");
  const auto& oracle = c.at("oracle");
  for (std::size_t k = 0; k < rhs.size(); ++k) EXPECT_NEAR(rhs[k], oracle[k], 0.05);
}

TEST_F(Cli, DeriveQvAndBkIntegral) {
  const auto sim = file("s.ini", "[generator]\nlevel = 8\nseed = 4\n");
  ASSERT_EQ(run("simulate --config " + sim.string() + " --out " + (dir_ / "s").string()), 0);
  const auto in = (dir_ / "s" / "paths" / "path_00000.csv").string();

  const auto qv = file("q.ini", "[functional]\nname = qv\n[run]\ninput = " + in + "\n");
  ASSERT_EQ(run("derive --config " + qv.string() + " --out " + (dir_ / "q").string()), 0);
  const auto q = read_table(dir_ / "q" / "results" / "derive.csv");
  EXPECT_EQ(q.at("t").size(), 8u);
  for (double h : q.at("hess11")) EXPECT_EQ(h, 2.0);
  for (double h : q.at("hess11_num")) EXPECT_NEAR(h, 2.0, 1e-4);

  const auto jz = file("j.ini", "[functional]\nname = bk_integral\nintegrand = sin:1\n"
                                "[run]\ninput = " + in + "\nh = 1e-6\n");
  ASSERT_EQ(run("derive --config " + jz.string() + " --out " + (dir_ / "j").string()), 0);
  const auto j = read_table(dir_ / "j" / "results" / "derive.csv");
  for (std::size_t k = 0; k < j.at("t").size(); ++k) {
    EXPECT_EQ(j.at("d0")[k], 0.0);
    EXPECT_EQ(j.at("hess11")[k], 0.0);
    EXPECT_LT(j.at("grad1_gap")[k], 2.0 * std::ldexp(1.0, -14));
  }
}

TEST_F(Cli, RegularityFlagsAnticipating) {
  const auto ok = file("r.ini", "[generator]\nlevel = 10\n[functional]\nname = sin:1\n"
                                "[run]\nensemble = 10\nlevels = 4,6,8\n");
  ASSERT_EQ(run("regularity --config " + ok.string() + " --seed 2 --out " + (dir_ / "a").string()),
            0);
  EXPECT_EQ(read_table(dir_ / "a" / "results" / "regularity.csv").at("level").size(), 3u);
  const auto bad = file("b.ini", "[generator]\nlevel = 8\n[functional]\nname = anticipating\n"
                                 "[run]\nensemble = 4\nlevels = 4\n");
  EXPECT_EQ(run("regularity --config " + bad.string() + " --seed 2 --out " + (dir_ / "b").string()),
            2);
}

TEST_F(Cli, ExitCodes) {
  const auto out = " --out " + (dir_ / "o").string();
  EXPECT_EQ(run("simulate" + out), 2);  // no seed
  EXPECT_EQ(run("simulate --config " + (dir_ / "missing.ini").string() + out), 3);
  EXPECT_EQ(run("simulate --bogus" + out), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("--help"), 0);
  const auto bad = file("bad.ini", "[generator]\ncolour = red\n");
  EXPECT_EQ(run("simulate --config " + bad.string() + " --seed 1" + out), 2);
  const auto noin = file("n.ini", "[run]\ninput = " + (dir_ / "none.csv").string() + "\n");
  EXPECT_EQ(run("qv --config " + noin.string() + out), 3);
  EXPECT_EQ(run("simulate --seed 1 --levels 8,4" + out), 2);
}

TEST_F(Cli, ThreadCountDoesNotChangeOutputs) {
  const auto cfg = file("c.ini", "[generator]\nlevel = 10\n[functional]\nname = doleans_dade\n"
                                 "[run]\nensemble = 12\nlevels = 6,8,10\n");
  const auto a = dir_ / "a", b = dir_ / "b";
  ASSERT_EQ(run("ito-check --config " + cfg.string() + " --seed 3 --threads 1 --out " + a.string()),
            0);
  ASSERT_EQ(run("ito-check --config " + cfg.string() + " --seed 3 --threads 4 --out " + b.string()),
            0);
  EXPECT_EQ(tree(a), tree(b));
}
