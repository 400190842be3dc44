#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fmtk/bounds.hpp"
#include "fmtk/grid.hpp"
#include "fmtk/symplectic.hpp"

namespace fmtk {

// Matrix spec: "fourier", "frft:a[,b,..]", "fresnel:..", "lorentz:..",
// "random:<seed>", a path to a matrix JSON file, or an inline JSON object
// {"n", "blocks"} (an optional "id" key names it). A single parameter is
// repeated over all axes.
struct MatrixSpec {
  std::string id;
  nlohmann::json spec;  // string or object
};

SympMatrix resolve_matrix(const MatrixSpec& m, int n);
MatrixSpec matrix_spec_from_json(const nlohmann::json& j);

struct SignalSpec {
  std::string id;
  std::optional<GaussianChirp> chirp;
  std::string file;  // used when chirp is empty
};

struct PairSpec {
  MatrixSpec m1;
  MatrixSpec m2;
};

struct BoundSelection {
  bool second_moment = true;  // componentwise, trace, time–FMT
  bool lp = true;
  bool mo = true;
  bool extra_strong = true;
  bool ordering = true;
  bool rs = true;
  bool lemma = true;
};

struct Tolerances {
  double relative = 1e-3;  // inequality entries, times |lhs|
  double ordering = 1e-10;
  double rs = 1e-8;
  double lemma_relative = 1e-3;
  double lemma_absolute = 1e-3;
};

struct RunConfig {
  std::vector<SignalSpec> signals;
  std::vector<PairSpec> pairs;
  BoundSelection bounds;
  std::vector<double> p_values{1.0, 1.5, 2.0};
  std::optional<int> grid_samples;
  std::optional<double> grid_extent;
  std::string output_path;
  std::string format = "json";
  Tolerances tol;
  std::size_t lemma_stride = 36;  // lemma entries on every k-th cell
  unsigned threads = 0;           // 0: hardware concurrency
};

inline constexpr const char* kConfigSchema = "fmtk-verify/1";

// 72 Gaussian chirps in two dimensions against 13 matrix pairs.
RunConfig battery_config(std::uint64_t seed = 0);

// Throws ConfigParse on any unknown key or malformed value, NotSymplectic
// (naming the matrix) when a spec fails validation.
RunConfig parse_config(const nlohmann::json& j, std::uint64_t seed = 0);
RunConfig load_config(const std::string& path, std::uint64_t seed = 0);

// The bounds of one (signal, pair) cell. The right-hand sides come from
// `rhs_mom`; `quad_mom` holds the moments of the sampled signal and feeds the
// lemma check and the position spread on the left.
struct CellInput {
  std::string signal_id;
  const SampledSignal* f = nullptr;
  const MomentSummary* rhs_mom = nullptr;
  const MomentSummary* quad_mom = nullptr;
  std::string m1_id;
  std::string m2_id;
  const SympMatrix* m1 = nullptr;
  const SympMatrix* m2 = nullptr;
  bool with_lemma = false;
};

BoundReport evaluate_cell(const CellInput& in, const RunConfig& cfg);

// Shift removed from a file signal before its moments were taken.
struct SignalShift {
  std::string signal_id;
  Vec shift_x;
  Vec shift_w;
};

struct VerifyResult {
  std::vector<BoundReport> cells;
  std::vector<SignalShift> recentered;  // file signals only, in config order
  std::size_t entries = 0;
  std::size_t violations = 0;
  std::size_t errored = 0;

  // 0 all pass, 2 any violation, 1 errored cells without violations.
  int exit_code() const;
};

VerifyResult run_verify(const RunConfig& cfg);

nlohmann::json result_to_json(const VerifyResult& r);
std::string result_to_csv(const VerifyResult& r);

// Writes to path.tmp and renames over path.
void write_atomic(const std::string& path, const std::string& content);
void write_result(const VerifyResult& r, const std::string& path, const std::string& format);

struct ExampleValues {
  double product = 0.0;
  double trace = 0.0;
  double component = 0.0;
};

struct PaperExample {
  ExampleValues expected;
  ExampleValues analytic;
  ExampleValues quadrature;
  int samples = 0;
  double seconds_analytic = 0.0;
  double seconds_quadrature = 0.0;
  bool analytic_ok = false;    // ≤ 1e-9 relative
  bool quadrature_ok = false;  // ≤ 1e-3 relative
};

// ζ = (1, 2), ε = 1 against (I, −I; 0, I) and (I, I; 0, I). The quadrature
// path uses 128 samples per axis unless `samples` says otherwise.
PaperExample run_paper_example(double beta = 0.0, int samples = 0);

struct TransformSummary {
  SampledSignal out;
  double in_norm = 0.0;
  double out_norm = 0.0;
  double unitarity_residual = 0.0;
};

TransformSummary run_transform(const SampledSignal& in, const MatrixSpec& m);

}  // namespace fmtk
