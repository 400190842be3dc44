#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "fmtk/error.hpp"
#include "fmtk/harness.hpp"

namespace {

int cmd_verify(const std::string& config_path, const std::string& out, const std::string& format, std::uint64_t seed,
               int grid, double extent) {
  fmtk::RunConfig cfg = config_path.empty() ? fmtk::battery_config(seed) : fmtk::load_config(config_path, seed);
  if (grid > 0) cfg.grid_samples = grid;
  if (extent > 0.0) cfg.grid_extent = extent;
  if (!out.empty()) cfg.output_path = out;
  if (!format.empty()) cfg.format = format;

  const fmtk::VerifyResult r = fmtk::run_verify(cfg);
  if (!cfg.output_path.empty()) fmtk::write_result(r, cfg.output_path, cfg.format);

  for (const auto& c : r.cells) {
    if (!c.error.empty()) {
      std::fprintf(stderr, "errored: %s / %s / %s: %s\n", c.signal_id.c_str(), c.m1_id.c_str(), c.m2_id.c_str(),
                   c.error.c_str());
    }
    for (const auto& e : c.entries) {
      if (!e.pass) {
        std::fprintf(stderr, "violated: %s / %s / %s: %s lhs=%.12g rhs=%.12g slack=%.3g\n", c.signal_id.c_str(),
                     c.m1_id.c_str(), c.m2_id.c_str(), e.name.c_str(), e.lhs, e.rhs, e.slack);
      }
    }
  }
  std::printf("cells %zu  entries %zu  violations %zu  errored %zu\n", r.cells.size(), r.entries, r.violations,
              r.errored);
  return r.exit_code();
}

int cmd_paper_example(int grid) {
  const fmtk::PaperExample ex = fmtk::run_paper_example(0.0, grid > 0 ? grid : 0);
  const auto row = [](const char* name, double expected, double a, double q) {
    std::printf("%-10s expected %.15f  analytic %.15f (%.2e)  quadrature %.15f (%.2e)\n", name, expected, a,
                a / expected - 1.0, q, q / expected - 1.0);
  };
  row("product", ex.expected.product, ex.analytic.product, ex.quadrature.product);
  row("trace", ex.expected.trace, ex.analytic.trace, ex.quadrature.trace);
  row("component", ex.expected.component, ex.analytic.component, ex.quadrature.component);
  std::printf("grid %d^2  analytic %.3f s  quadrature %.3f s\n", ex.samples, ex.seconds_analytic,
              ex.seconds_quadrature);
  if (!ex.analytic_ok || !ex.quadrature_ok) {
    throw fmtk::Error(fmtk::Errc::MismatchBeyondTolerance,
                      std::string("example values off: analytic ") + (ex.analytic_ok ? "ok" : "bad") +
                          ", quadrature " + (ex.quadrature_ok ? "ok" : "bad"));
  }
  return 0;
}

int cmd_transform(const std::string& in_path, const std::string& matrix, const std::string& out_path) {
  std::ifstream in(in_path);
  if (!in) throw fmtk::Error(fmtk::Errc::SignalLoad, "cannot open '" + in_path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw fmtk::Error(fmtk::Errc::SignalLoad, std::string("bad signal JSON: ") + e.what());
  }
  const fmtk::SampledSignal f = fmtk::signal_from_json(j);
  const fmtk::TransformSummary s = fmtk::run_transform(f, fmtk::MatrixSpec{matrix, matrix});
  fmtk::write_atomic(out_path, fmtk::signal_to_json(s.out).dump() + "\n");
  std::printf("in_norm %.15g\nout_norm %.15g\nunitarity_residual %.3e\n", s.in_norm, s.out_norm,
              s.unitarity_residual);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free metaplectic transforms and uncertainty bounds"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  int grid = 0;
  double extent = 0.0;
  app.add_option("--seed", seed, "Seed offset for random matrices");
  app.add_option("--grid", grid, "Samples per axis");
  app.add_option("--extent", extent, "Grid half-extent L");

  std::string config, out, format;
  auto* verify = app.add_subcommand("verify", "Run the bound battery");
  verify->add_option("--config", config, "Config JSON (default: built-in battery)");
  verify->add_option("--out", out, "Report path");
  verify->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* example = app.add_subcommand("paper-example", "Reproduce the worked Example");

  std::string in_path, matrix, out_path;
  auto* transform = app.add_subcommand("transform", "Apply one transform to a signal file");
  transform->add_option("--in", in_path, "Input signal JSON")->required();
  transform->add_option("--matrix", matrix, "Matrix spec")->required();
  transform->add_option("--out", out_path, "Output signal JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (verify->parsed()) return cmd_verify(config, out, format, seed, grid, extent);
    if (example->parsed()) return cmd_paper_example(grid);
    if (transform->parsed()) return cmd_transform(in_path, matrix, out_path);
  } catch (const fmtk::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
