#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "fmtk/error.hpp"
#include "fmtk/harness.hpp"

using namespace fmtk;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

Errc code_of(const std::function<void()>& fn, std::string* what = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (what) *what = e.what();
    return e.code();
  }
  ADD_FAILURE() << "no fmtk::Error thrown";
  return Errc::InvalidArgument;
}

json small_config() {
  return json{{"schema", kConfigSchema},
              {"signals", json::array({json{{"id", "a"}, {"zeta", {1.0, 0.5}}, {"epsilon", 3.0}, {"beta", 0.0}},
                                       json{{"id", "b"}, {"zeta", {0.5, 1.0}}, {"epsilon", "inf"}, {"beta", 0.3}}})},
              {"pairs", json::array({json{{"m1", "fourier"}, {"m2", "fresnel:0.7,1.3"}},
                                     json{{"m1", "frft:0.4"}, {"m2", "random:3"}}})},
              {"lemma_stride", 1}};
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / ("fmtk_test_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FMTK_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Harness, MatrixSpecs) {
  const SympMatrix f = resolve_matrix({"f", "fresnel:0.7,1.3"}, 2);
  EXPECT_DOUBLE_EQ(f.B()(0, 0), 0.7);
  EXPECT_DOUBLE_EQ(f.B()(1, 1), 1.3);
  const SympMatrix one = resolve_matrix({"r", "frft:0.4"}, 2);
  EXPECT_DOUBLE_EQ(one.A()(0, 0), one.A()(1, 1));
  EXPECT_EQ(resolve_matrix({"r", "random:5"}, 2).matrix(), random_free(2, 5).base.matrix());
  const json inline_spec = matrix_to_json(random_free(2, 8).base);
  const MatrixSpec ms = matrix_spec_from_json(inline_spec);
  EXPECT_EQ(resolve_matrix(ms, 2).matrix(), random_free(2, 8).base.matrix());

  std::string what;
  EXPECT_EQ(code_of([] { resolve_matrix({"bad", "twist:1"}, 2); }, &what), Errc::ConfigParse);
  EXPECT_NE(what.find("matrix 'bad'"), std::string::npos);
  EXPECT_EQ(code_of([] { resolve_matrix({"r", "random:x"}, 2); }), Errc::ConfigParse);
  EXPECT_EQ(code_of([] { resolve_matrix({"f", "frft:0.1,0.2,0.3"}, 2); }), Errc::ConfigParse);
  EXPECT_EQ(code_of([&] { resolve_matrix(ms, 3); }), Errc::DimensionMismatch);

  const fs::path p = scratch_dir() / "m.json";
  std::ofstream(p) << inline_spec.dump();
  EXPECT_EQ(resolve_matrix({"file", p.string()}, 2).matrix(), random_free(2, 8).base.matrix());
}

TEST(Harness, ConfigErrors) {
  json j = small_config();
  j["unexpected"] = 1;
  EXPECT_EQ(code_of([&] { parse_config(j); }), Errc::ConfigParse);

  j = small_config();
  j["schema"] = "fmtk-verify/0";
  EXPECT_EQ(code_of([&] { parse_config(j); }), Errc::ConfigParse);

  j = small_config();
  j["bounds"] = {"second_moment", "nonsense"};
  EXPECT_EQ(code_of([&] { parse_config(j); }), Errc::ConfigParse);

  j = small_config();
  j["p_values"] = {0.5};
  EXPECT_EQ(code_of([&] { parse_config(j); }), Errc::ConfigParse);

  j = small_config();
  j["pairs"] = json::array();
  EXPECT_EQ(code_of([&] { parse_config(j); }), Errc::ConfigParse);

  j = small_config();
  j["pairs"][0]["m2"] = json{{"id", "skew"}, {"n", 2},
                            {"blocks", {{"A", {{1, 0.5}, {0, 1}}}, {"B", {{1, 0}, {0, 1}}},
                                        {"C", {{0, 0}, {0, 0}}}, {"D", {{1, 0}, {0, 1}}}}}};
  std::string what;
  EXPECT_EQ(code_of([&] { parse_config(j); }, &what), Errc::NotSymplectic);
  EXPECT_NE(what.find("skew"), std::string::npos) << what;

  EXPECT_EQ(code_of([] { load_config("/nonexistent/config.json"); }), Errc::ConfigParse);
}

TEST(Harness, ConfigSelectsBoundGroups) {
  json j = small_config();
  j["bounds"] = {"lp", "rs"};
  const RunConfig cfg = parse_config(j);
  EXPECT_TRUE(cfg.bounds.lp);
  EXPECT_TRUE(cfg.bounds.rs);
  EXPECT_FALSE(cfg.bounds.second_moment);
  EXPECT_FALSE(cfg.bounds.lemma);

  json b = {{"schema", kConfigSchema}, {"preset", "battery"}};
  const RunConfig bat = parse_config(b);
  EXPECT_EQ(bat.signals.size(), 72u);
  EXPECT_EQ(bat.pairs.size(), 13u);
}

TEST(Harness, SmallRunPassesAndIsDeterministic) {
  RunConfig cfg = parse_config(small_config());
  cfg.threads = 1;
  const VerifyResult a = run_verify(cfg);
  EXPECT_EQ(a.cells.size(), 4u);
  EXPECT_EQ(a.violations, 0u);
  EXPECT_EQ(a.errored, 0u);
  EXPECT_EQ(a.exit_code(), 0);
  EXPECT_GT(a.entries, 4u * 20u);

  cfg.threads = 4;
  const VerifyResult b = run_verify(cfg);
  EXPECT_EQ(result_to_json(a).dump(), result_to_json(b).dump());
  EXPECT_EQ(result_to_csv(a), result_to_csv(b));

  const std::string csv = result_to_csv(a);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "signal_id,m1_id,m2_id,bound_name,lhs,rhs,slack,pass");

  // At p = 2 the Lᵖ entry and the trace entry carry the same slack.
  for (const auto& cell : a.cells) {
    const BoundEntry* trace = nullptr;
    const BoundEntry* two = nullptr;
    for (const auto& e : cell.entries) {
      if (e.name == "trace") trace = &e;
      if (e.name == "lp_two_fmt_p2") two = &e;
    }
    ASSERT_NE(trace, nullptr);
    ASSERT_NE(two, nullptr);
    EXPECT_NEAR(two->slack, trace->slack, 1e-9 * trace->lhs);
  }

  const json r = result_to_json(a);
  EXPECT_EQ(r.at("schema"), "fmtk-report/1");
  EXPECT_EQ(r.at("cells").size(), 4u);
}

TEST(Harness, ExitCodePriority) {
  VerifyResult r;
  EXPECT_EQ(r.exit_code(), 0);
  r.errored = 1;
  EXPECT_EQ(r.exit_code(), 1);
  r.violations = 1;
  EXPECT_EQ(r.exit_code(), 2);
}

TEST(Harness, ErroredCellIsReportedNotFatal) {
  json j = small_config();
  // A window too coarse for the chirp: every cell of that signal errors.
  j["signals"] = json::array({json{{"id", "fast"}, {"zeta", {1.0, 1.0}}, {"epsilon", 0.05}, {"beta", 0.0}}});
  j["grid"] = {{"samples", 32}, {"half_extent", 8.0}};
  const VerifyResult r = run_verify(parse_config(j));
  EXPECT_EQ(r.errored, r.cells.size());
  EXPECT_EQ(r.exit_code(), 1);
  const std::string csv = result_to_csv(r);
  EXPECT_NE(csv.find("error,,,,false"), std::string::npos);
}

TEST(Harness, FileSignalIsRecenteredAndShiftReported) {
  const GaussianChirp g{{1.0}, 2.0, 0.0};
  SampledSignal f = sample_gaussian_chirp(g, uniform_grid(1, 256, 10.0));
  // The chirp centered at 0.4 with a linear phase 0.25x on top.
  const Grid& grid = f.grid;
  for (int i = 0; i < grid.samples[0]; ++i) {
    const double x = grid.coord(0, i);
    const double y = x - 0.4;
    f.values[i] = std::polar(std::pow(kPi, -0.25) * std::exp(-y * y / 2.0), 2.0 * kPi * (y * y / 4.0 + 0.25 * x));
  }
  const fs::path sig = scratch_dir() / "shifted.json";
  std::ofstream(sig) << signal_to_json(f).dump();

  json j = small_config();
  j["signals"] = json::array({json{{"id", "shifted"}, {"file", sig.string()}}});
  j["pairs"] = json::array({json{{"m1", "fourier"}, {"m2", "frft:0.7"}}});
  const VerifyResult r = run_verify(parse_config(j));
  EXPECT_EQ(r.exit_code(), 0);
  ASSERT_EQ(r.recentered.size(), 1u);
  EXPECT_NEAR(r.recentered[0].shift_x(0), 0.4, 1e-8);
  EXPECT_NEAR(r.recentered[0].shift_w(0), 0.25, 1e-8);
  const json rep = result_to_json(r);
  EXPECT_EQ(rep.at("recentered")[0].at("signal_id"), "shifted");
  EXPECT_FALSE(result_to_json(run_verify(parse_config(small_config()))).contains("recentered"));
}

TEST(Harness, WriteAtomicLeavesNoTempFile) {
  const fs::path p = scratch_dir() / "out.txt";
  write_atomic(p.string(), "hello\n");
  EXPECT_EQ(slurp(p), "hello\n");
  EXPECT_FALSE(fs::exists(p.string() + ".tmp"));
}

TEST(Harness, WorkedExampleDoesNotDependOnBeta) {
  const PaperExample a = run_paper_example(0.0);
  const PaperExample b = run_paper_example(0.3);
  EXPECT_TRUE(a.analytic_ok);
  EXPECT_TRUE(a.quadrature_ok);
  EXPECT_EQ(a.samples, 128);
  EXPECT_EQ(a.analytic.product, b.analytic.product);
  EXPECT_NEAR(a.quadrature.product, b.quadrature.product, 1e-10 * a.quadrature.product);
  EXPECT_NEAR(a.quadrature.trace, b.quadrature.trace, 1e-10 * a.quadrature.trace);
}

TEST(Harness, TransformSummary) {
  const GaussianChirp g{{1.0, 0.5}, 3.0, 0.0};
  const SampledSignal f = sample_gaussian_chirp(g, default_grid(g, 64));
  const TransformSummary s = run_transform(f, {"fresnel:0.8", "fresnel:0.8"});
  EXPECT_LT(s.unitarity_residual, 1e-6);
  EXPECT_NEAR(s.out_norm, s.in_norm, 1e-6);
  EXPECT_EQ(code_of([&] { run_transform(f, {"frft:0", "frft:0"}); }), Errc::SingularB);
}

TEST(Harness, CliExitCodes) {
  const fs::path dir = scratch_dir();
  const fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << small_config().dump();
  const fs::path out = dir / "report.csv";
  EXPECT_EQ(run_cli("verify --config " + cfg.string() + " --out " + out.string() + " --format csv"), 0);
  EXPECT_EQ(slurp(out).rfind("signal_id,", 0), 0u);

  json bad = small_config();
  bad["extra"] = true;
  const fs::path bad_cfg = dir / "bad.json";
  std::ofstream(bad_cfg) << bad.dump();
  EXPECT_EQ(run_cli("verify --config " + bad_cfg.string()), 1);
  EXPECT_EQ(run_cli("verify --config " + cfg.string() + " --format xml"), 1);
  EXPECT_EQ(run_cli("no-such-command"), 1);

  // A signal file through the transform subcommand.
  const GaussianChirp g{{1.0}, 2.0, 0.0};
  const fs::path sig = dir / "sig.json";
  std::ofstream(sig) << signal_to_json(sample_gaussian_chirp(g, default_grid(g))).dump();
  const fs::path tout = dir / "t.json";
  EXPECT_EQ(run_cli("transform --in " + sig.string() + " --matrix frft:0.5 --out " + tout.string()), 0);
  EXPECT_NO_THROW(signal_from_json(json::parse(slurp(tout))));
  EXPECT_EQ(run_cli("transform --in " + sig.string() + " --matrix frft:0 --out " + tout.string()), 1);
}
