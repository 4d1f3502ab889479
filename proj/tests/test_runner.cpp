#include "stackseek/experiment/runner.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace stackseek::experiment;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

long count_lines(const fs::path& p) {
  const auto s = slurp(p);
  return static_cast<long>(std::count(s.begin(), s.end(), '\n'));
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("stackseek_test_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig testbed_config(const fs::path& out, long K = 200) {
  auto c = parse_config_text("scenario = testbed\nseed = 7\n[schedule]\neta_bar = 0.15\n");
  c.iterations = K;
  c.out = out.string();
  return c;
}

}  // namespace

TEST(Runner, TestbedTracesAreByteIdentical) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  const auto ra = run_experiment(testbed_config(a));
  const auto rb = run_experiment(testbed_config(b));
  ASSERT_TRUE(ra.ok() && rb.ok());
  EXPECT_EQ(slurp(ra.replicates[0].trace_path), slurp(rb.replicates[0].trace_path));
  EXPECT_EQ(slurp(ra.summary_csv), slurp(rb.summary_csv));
}

TEST(Runner, SummaryShape) {
  const auto out = scratch("shape");
  const auto r = run_experiment(testbed_config(out, 150));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(count_lines(r.summary_csv), 151);
  EXPECT_EQ(count_lines(r.replicates[0].trace_path), 150);
  const auto csv = slurp(r.summary_csv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "k,y,J0,best_J0,beta,eta,delta,grad_norm,residual,residual_hat,tol");
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  ASSERT_TRUE(r.stationarity.has_value());
  for (std::size_t k = 1; k < r.replicates[0].best_J0.size(); ++k)
    EXPECT_LE(r.replicates[0].best_J0[k], r.replicates[0].best_J0[k - 1]);
  EXPECT_TRUE(fs::exists(r.summary_json));
}

TEST(Runner, ReplicatesUseConsecutiveSeeds) {
  const auto out = scratch("reps");
  auto c = testbed_config(out, 50);
  c.replicates = 5;
  const auto r = run_experiment(c);
  ASSERT_EQ(r.replicates.size(), 5u);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(r.replicates[i].seed, 7u + i);
    EXPECT_TRUE(fs::exists(r.replicates[i].trace_path));
  }
  EXPECT_NE(slurp(r.replicates[0].trace_path), slurp(r.replicates[1].trace_path));
  EXPECT_EQ(count_lines(r.summary_csv), 51);
}

TEST(Runner, IllustrativeExactMatchesGridOracle) {
  const auto out = scratch("ill");
  auto c = parse_config_text(
      "scenario = illustrative\niterations = 5000\n[regime]\nkind = exact\neta = 0.05\n"
      "[illustrative]\nepsilon = 1.2\ny0 = 1\n");
  c.out = out.string();
  const auto r = run_experiment(c);
  ASSERT_TRUE(r.ok());
  const auto il = stackseek::scenarios::build_illustrative(c.illustrative);
  const auto [ystar, j] = stackseek::scenarios::grid_argmin(
      [&](double y) { return il.induced_objective(y); }, -1.2 + 1e-4, 5, 1e-4);
  // final CSV row: k,y,...
  const auto csv = slurp(r.summary_csv);
  const auto last = csv.substr(csv.rfind('\n', csv.size() - 2) + 1);
  const double y_last = std::stod(last.substr(last.find(',') + 1));
  EXPECT_LE(std::abs(y_last - ystar), 1e-2);
  (void)j;
}

TEST(Runner, FaultGivesPartialOutputsAndNotOk) {
  const auto out = scratch("fault");
  auto c = parse_config_text("scenario = illustrative\niterations = 5000\n[regime]\neta = 0.05\n");
  c.out = out.string();
  const auto r = run_experiment(c);  // eps = 0.1 drifts out of the domain
  EXPECT_FALSE(r.ok());
  const auto trace = slurp(r.replicates[0].trace_path);
  EXPECT_NE(trace.find("\"fault\""), std::string::npos);
  EXPECT_TRUE(fs::exists(r.summary_csv));
}

TEST(Runner, UnwritableOutputDirectory) {
  auto c = testbed_config("/proc/stackseek_cannot_write", 5);
  EXPECT_THROW(run_experiment(c), std::runtime_error);
}

TEST(Runner, OracleTestbed) {
  const auto out = scratch("oracle");
  auto c = testbed_config(out);
  const auto text = run_oracle(c);
  EXPECT_NE(text.find("\"y_star\": 0.66666666666666663"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "run_oracle.json"));
}

TEST(Runner, ChecksPassOnTestbed) {
  for (const auto& line : run_checks(testbed_config(scratch("chk")), 200))
    EXPECT_TRUE(line.passed) << line.name << ": " << line.detail;
}

TEST(Cli, RunCheckOracleAndErrors) {
  const auto out = scratch("cli");
  fs::create_directories(out);
  const auto cfg = out / "tb.ini";
  std::ofstream(cfg) << "scenario = testbed\n[schedule]\neta_bar = 0.1\n";
  const std::string exe = STACKSEEK_CLI;
  const auto sh = [&](const std::string& args) {
    return std::system((exe + " " + args + " > /dev/null 2>&1").c_str());
  };
  EXPECT_EQ(sh("run " + cfg.string() + " --iters 20 --seed 3 --out " + (out / "r").string()), 0);
  EXPECT_TRUE(fs::exists(out / "r" / "run_seed3.jsonl"));
  EXPECT_EQ(sh("run " + cfg.string() + " --iters 5 --replicates 2 --paper-sign --out " +
               (out / "p").string()),
            0);
  EXPECT_TRUE(fs::exists(out / "p" / "run_seed2.jsonl"));
  EXPECT_EQ(sh("check " + cfg.string() + " --samples 100"), 0);
  EXPECT_EQ(sh("oracle " + cfg.string() + " --out " + (out / "o").string()), 0);
  EXPECT_NE(sh("run " + cfg.string() + " --iters 0"), 0);
  const auto bad = out / "bad.ini";
  std::ofstream(bad) << "scenario = testbed\n[schedule]\nalpha = 0.4\n";
  EXPECT_NE(sh("run " + bad.string()), 0);
}

TEST(Runner, EnergyCsvHasOneRowPerIteration) {
  const auto out = scratch("energy");
  auto c = parse_config_text("scenario = energy\niterations = 2000\n");
  c.out = out.string();
  const auto r = run_experiment(c);
  ASSERT_TRUE(r.ok()) << *r.replicates[0].fault;
  EXPECT_EQ(count_lines(r.summary_csv), 2001);
  const auto csv = slurp(r.summary_csv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "k,y0,y1,J0,best_J0,beta,eta,delta,grad_norm,residual,residual_hat,tol");
}
