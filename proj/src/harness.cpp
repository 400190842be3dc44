#include "fmtk/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "fmtk/error.hpp"
#include "fmtk/moments.hpp"
#include "fmtk/transform.hpp"

namespace fmtk {

namespace {

using nlohmann::json;

json read_json_file(const std::string& path, Errc code) {
  std::ifstream in(path);
  if (!in) throw Error(code, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(code, "'" + path + "' is not valid JSON: " + e.what());
  }
}

std::vector<double> parse_params(const std::string& text, int n, const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw Error(Errc::ConfigParse, "bad number in matrix spec '" + spec + "'");
    out.push_back(v);
  }
  if (out.size() == 1 && n > 1) out.assign(static_cast<std::size_t>(n), out[0]);
  if (out.size() != static_cast<std::size_t>(n)) {
    throw Error(Errc::ConfigParse, "matrix spec '" + spec + "' needs 1 or " + std::to_string(n) + " parameters");
  }
  return out;
}

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(Errc::ConfigParse, where + " must be an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) throw Error(Errc::ConfigParse, "unknown key '" + item.key() + "' in " + where);
  }
}

std::string chirp_id(const GaussianChirp& g) {
  std::string id = "gc_z";
  for (std::size_t k = 0; k < g.zeta.size(); ++k) id += (k ? "x" : "") + fmt_g(g.zeta[k]);
  id += "_e" + (std::isinf(g.epsilon) ? std::string("inf") : fmt_g(g.epsilon));
  id += "_b" + fmt_g(g.beta);
  return id;
}

json block_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

json blocks_spec(const std::string& id, const Mat& a, const Mat& b, const Mat& c, const Mat& d) {
  return {{"id", id},
          {"n", a.rows()},
          {"blocks", {{"A", block_json(a)}, {"B", block_json(b)}, {"C", block_json(c)}, {"D", block_json(d)}}}};
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

}  // namespace

SympMatrix resolve_matrix(const MatrixSpec& m, int n) {
  try {
    if (m.spec.is_object()) {
      json j = m.spec;
      j.erase("id");
      if (j.contains("n") && j.at("n").is_number_integer() && j.at("n").get<int>() != n) {
        throw Error(Errc::DimensionMismatch, "matrix has n = " + j.at("n").dump() + ", signal has " + std::to_string(n));
      }
      return matrix_from_json(j);
    }
    const std::string s = m.spec.get<std::string>();
    if (s == "fourier") return table1_matrix(Table1Kind::fourier, {}, n);
    const auto colon = s.find(':');
    if (colon != std::string::npos) {
      const std::string kind = s.substr(0, colon);
      const std::string rest = s.substr(colon + 1);
      if (kind == "random") {
        std::size_t used = 0;
        unsigned long long seed = 0;
        try {
          seed = std::stoull(rest, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || used != rest.size()) throw Error(Errc::ConfigParse, "bad seed in matrix spec '" + s + "'");
        return random_free(n, seed).base;
      }
      if (kind == "frft" || kind == "fresnel" || kind == "lorentz") {
        return table1_matrix(parse_table1_kind(kind), parse_params(rest, n, s), n);
      }
    }
    if (std::filesystem::is_regular_file(s)) {
      json j = read_json_file(s, Errc::ConfigParse);
      j.erase("id");
      return matrix_from_json(j);
    }
    throw Error(Errc::ConfigParse, "unrecognized matrix spec '" + s + "'");
  } catch (const Error& e) {
    throw Error(e.code(), "matrix '" + m.id + "': " + e.what(), e.value(), e.axis());
  }
}

MatrixSpec matrix_spec_from_json(const json& j) {
  if (j.is_string()) return {j.get<std::string>(), j};
  if (j.is_object()) {
    std::string id = "inline";
    if (j.contains("id")) {
      if (!j.at("id").is_string()) throw Error(Errc::ConfigParse, "matrix id must be a string");
      id = j.at("id").get<std::string>();
    }
    return {id, j};
  }
  throw Error(Errc::ConfigParse, "matrix spec must be a string or an object");
}

RunConfig battery_config(std::uint64_t seed) {
  RunConfig cfg;
  const double zetas[] = {0.5, 1.0, 2.0};
  const double eps[] = {0.5, 1.0, 2.0, std::numeric_limits<double>::infinity()};
  const double betas[] = {0.0, 0.3};
  for (double z1 : zetas) {
    for (double z2 : zetas) {
      for (double e : eps) {
        for (double b : betas) {
          GaussianChirp g{{z1, z2}, e, b};
          cfg.signals.push_back({chirp_id(g), g, {}});
        }
      }
    }
  }
  const Mat id = Mat::Identity(2, 2), zero = Mat::Zero(2, 2);
  auto named = [](const json& spec) { return matrix_spec_from_json(spec); };
  cfg.pairs.push_back({named(blocks_spec("shear_minus", id, -id, zero, id)),
                       named(blocks_spec("shear_plus", id, id, zero, id))});
  for (std::uint64_t k = 1; k <= 10; ++k) {
    cfg.pairs.push_back({named("random:" + std::to_string(seed + k)), named("random:" + std::to_string(seed + 100 + k))});
  }
  cfg.pairs.push_back({named("fourier"), named("fresnel:0.7,1.3")});
  cfg.pairs.push_back({named("frft:0.4"), named("frft:1.1")});
  return cfg;
}

RunConfig parse_config(const json& j, std::uint64_t seed) {
  reject_unknown_keys(j, {"schema", "preset", "signals", "pairs", "bounds", "p_values", "grid", "output", "tolerance",
                          "lemma_stride", "threads"},
                      "config");
  if (!j.contains("schema") || j.at("schema") != kConfigSchema) {
    throw Error(Errc::ConfigParse, std::string("config schema must be \"") + kConfigSchema + "\"");
  }
  RunConfig cfg;
  try {
    if (j.contains("preset")) {
      if (j.at("preset") != "battery") throw Error(Errc::ConfigParse, "unknown preset " + j.at("preset").dump());
      RunConfig b = battery_config(seed);
      cfg.signals = b.signals;
      cfg.pairs = b.pairs;
    }
    if (j.contains("signals")) {
      cfg.signals.clear();
      for (const auto& s : j.at("signals")) {
        if (!s.is_object()) throw Error(Errc::ConfigParse, "signal entry must be an object");
        SignalSpec spec;
        if (s.contains("file")) {
          reject_unknown_keys(s, {"id", "file"}, "signal");
          spec.file = s.at("file").get<std::string>();
          spec.id = s.value("id", spec.file);
        } else {
          json c = s;
          c.erase("id");
          spec.chirp = chirp_from_json(c);
          spec.id = s.contains("id") ? s.at("id").get<std::string>() : chirp_id(*spec.chirp);
        }
        cfg.signals.push_back(std::move(spec));
      }
    }
    if (j.contains("pairs")) {
      cfg.pairs.clear();
      for (const auto& p : j.at("pairs")) {
        reject_unknown_keys(p, {"m1", "m2"}, "pair");
        if (!p.contains("m1") || !p.contains("m2")) throw Error(Errc::ConfigParse, "pair needs m1 and m2");
        cfg.pairs.push_back({matrix_spec_from_json(p.at("m1")), matrix_spec_from_json(p.at("m2"))});
      }
    }
    if (j.contains("bounds")) {
      BoundSelection none{false, false, false, false, false, false, false};
      for (const auto& b : j.at("bounds")) {
        const std::string name = b.get<std::string>();
        if (name == "all") none = BoundSelection{};
        else if (name == "second_moment") none.second_moment = true;
        else if (name == "lp") none.lp = true;
        else if (name == "mo") none.mo = true;
        else if (name == "extra_strong") none.extra_strong = true;
        else if (name == "ordering") none.ordering = true;
        else if (name == "rs") none.rs = true;
        else if (name == "lemma") none.lemma = true;
        else throw Error(Errc::ConfigParse, "unknown bound group '" + name + "'");
      }
      cfg.bounds = none;
    }
    if (j.contains("p_values")) {
      cfg.p_values = j.at("p_values").get<std::vector<double>>();
      for (double p : cfg.p_values) {
        if (!(p >= 1.0 && p <= 2.0)) throw Error(Errc::ConfigParse, "p_values must lie in [1, 2]");
      }
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      reject_unknown_keys(g, {"samples", "half_extent"}, "grid");
      if (g.contains("samples")) cfg.grid_samples = g.at("samples").get<int>();
      if (g.contains("half_extent")) cfg.grid_extent = g.at("half_extent").get<double>();
    }
    if (j.contains("output")) {
      const auto& o = j.at("output");
      reject_unknown_keys(o, {"path", "format"}, "output");
      cfg.output_path = o.value("path", std::string());
      cfg.format = o.value("format", std::string("json"));
    }
    if (j.contains("tolerance")) {
      const auto& t = j.at("tolerance");
      reject_unknown_keys(t, {"relative", "ordering", "rs", "lemma_relative", "lemma_absolute"}, "tolerance");
      cfg.tol.relative = t.value("relative", cfg.tol.relative);
      cfg.tol.ordering = t.value("ordering", cfg.tol.ordering);
      cfg.tol.rs = t.value("rs", cfg.tol.rs);
      cfg.tol.lemma_relative = t.value("lemma_relative", cfg.tol.lemma_relative);
      cfg.tol.lemma_absolute = t.value("lemma_absolute", cfg.tol.lemma_absolute);
    }
    if (j.contains("lemma_stride")) cfg.lemma_stride = j.at("lemma_stride").get<std::size_t>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigParse, std::string("bad config value: ") + e.what());
  }
  if (cfg.format != "json" && cfg.format != "csv") throw Error(Errc::ConfigParse, "format must be json or csv");
  if (cfg.signals.empty() || cfg.pairs.empty()) {
    throw Error(Errc::ConfigParse, "config needs at least one signal and one matrix pair");
  }
  if (cfg.lemma_stride == 0) throw Error(Errc::ConfigParse, "lemma_stride must be positive");
  // Matrices are checked now for every dimension the chirp signals use.
  std::set<int> dims;
  for (const auto& s : cfg.signals) {
    if (s.chirp) dims.insert(s.chirp->dim());
  }
  for (int n : dims) {
    for (const auto& p : cfg.pairs) {
      resolve_matrix(p.m1, n);
      resolve_matrix(p.m2, n);
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path, std::uint64_t seed) {
  return parse_config(read_json_file(path, Errc::ConfigParse), seed);
}

namespace {

BoundEntry identity_entry(std::string name, double lhs, double rhs, double tol) {
  BoundEntry e;
  e.name = std::move(name);
  e.lhs = lhs;
  e.rhs = rhs;
  e.slack = lhs - rhs;
  e.tolerance = tol;
  e.pass = std::isfinite(e.slack) && std::abs(e.slack) <= tol;
  return e;
}

}  // namespace

BoundReport evaluate_cell(const CellInput& in, const RunConfig& cfg) {
  BoundReport r{in.signal_id, in.m1_id, in.m2_id, {}, {}};
  try {
    const SampledSignal& f = *in.f;
    const MomentSummary& mom = *in.rhs_mom;
    const MomentSummary& quad = *in.quad_mom;
    const FreeSympMatrix m1 = make_free(*in.m1);
    const FreeSympMatrix m2 = make_free(*in.m2);
    const double rel = cfg.tol.relative;
    const bool approx = mom.approximate;

    const ShearedTransform t1 = fmt_sheared(m1, f, 0, in.with_lemma && cfg.bounds.lemma);
    const ShearedTransform t2 = fmt_sheared(m2, f);
    const double s1 = sheared_second_moment(t1);
    const double s2 = sheared_second_moment(t2);
    const double product = s1 * s2;
    const double dx2 = quad.dx2 * quad.norm2;
    const double comp = bound_componentwise(mom, m1, m2);
    const double trace = bound_trace(mom, m1, m2);

    if (cfg.bounds.second_moment) {
      r.entries.push_back(make_entry("componentwise", product, comp, rel));
      r.entries.push_back(make_entry("trace", product, trace, rel));
      r.entries.push_back(make_entry("time_fmt_m1", dx2 * s1, bound_time_fmt(mom, m1), rel));
      r.entries.push_back(make_entry("time_fmt_m2", dx2 * s2, bound_time_fmt(mom, m2), rel));
    }
    if (cfg.bounds.lp) {
      for (double p : cfg.p_values) {
        const std::string tag = "_p" + fmt_g(p);
        const double n1 = sheared_weighted_lp(t1, p);
        const double n2 = sheared_weighted_lp(t2, p);
        const double xn = weighted_lp(f, Weight{Weight::radius}, p);
        const LpBound two = bound_lp_two_fmt(mom, m1, m2, p, n1, n2);
        r.entries.push_back(make_entry("lp_two_fmt" + tag, two.lhs, two.rhs, rel));
        const LpBound a1 = bound_lp_time_fmt(mom, m1, p, xn, n1);
        const LpBound a2 = bound_lp_time_fmt(mom, m2, p, xn, n2);
        r.entries.push_back(make_entry("lp_time_fmt_m1" + tag, a1.lhs, a1.rhs, rel));
        r.entries.push_back(make_entry("lp_time_fmt_m2" + tag, a2.lhs, a2.rhs, rel));
        const LpBound q1 = bound_lq_time_fmt(mom, m1, p, xn, n1);
        const LpBound q2 = bound_lq_time_fmt(mom, m2, p, xn, n2);
        r.entries.push_back(make_entry("lq_time_fmt_m1" + tag, q1.lhs, q1.rhs, rel));
        r.entries.push_back(make_entry("lq_time_fmt_m2" + tag, q2.lhs, q2.rhs, rel));
      }
    }
    if (cfg.bounds.mo) {
      r.entries.push_back(make_entry("mo_component", product, bound_mo_component(mom, *in.m1, *in.m2), rel));
      r.entries.push_back(make_entry("mo_trace", product, bound_mo_trace(mom, *in.m1, *in.m2), rel));
    }
    if (cfg.bounds.extra_strong) {
      const bool diag = is_diagonal(m1.A()) && is_diagonal(m1.B()) && is_diagonal(m2.A()) && is_diagonal(m2.B());
      if (diag) {
        r.entries.push_back(
            make_entry("extra_strong_diag", product, bound_extra_strong_diag(mom, *in.m1, *in.m2), rel, approx));
      }
      if (scalar_shape(*in.m1, *in.m2)) {
        const ExtraStrongScalar es = bound_extra_strong_scalar(mom, *in.m1, *in.m2);
        r.entries.push_back(make_entry("extra_strong_scalar", product, es.rhs, rel, approx));
        if (es.singular_rhs) {
          r.entries.push_back(make_entry("extra_strong_singular", product, *es.singular_rhs, rel, approx));
        }
        if (es.abs_cov_rhs) r.entries.push_back(make_entry("extra_strong_abs_cov", product, *es.abs_cov_rhs, rel, approx));
      }
    }
    if (cfg.bounds.ordering) r.entries.push_back(make_abs_entry("ordering", comp, trace, cfg.tol.ordering));
    if (cfg.bounds.rs) {
      const RsCheck rs = robertson_schrodinger_check(mom, *in.m1, *in.m2);
      r.entries.push_back(make_abs_entry("robertson_schrodinger", rs.min_eigenvalue, 0.0, cfg.tol.rs));
    }
    if (cfg.bounds.lemma && in.with_lemma) {
      const LemmaCheck lc = lemma_identity_check(t1, quad, m1, m2.A(), m2.B());
      const auto add = [&](const std::string& name, const IdentityGap& g) {
        r.entries.push_back(identity_entry(name + "_re", g.lhs.real(), g.rhs.real(),
                                           cfg.tol.lemma_relative * std::max(g.scale, 1e-12)));
        r.entries.push_back(identity_entry(name + "_im", g.lhs.imag(), g.rhs.imag(), cfg.tol.lemma_absolute));
      };
      add("lemma_first", lc.first);
      add("lemma_second", lc.second);
    }
  } catch (const std::exception& e) {
    r.entries.clear();
    r.error = e.what();
  }
  return r;
}

int VerifyResult::exit_code() const {
  if (violations > 0) return 2;
  if (errored > 0) return 1;
  return 0;
}

namespace {

struct PreparedSignal {
  SampledSignal f;
  MomentSummary rhs;
  MomentSummary quad;
  std::optional<Recentered> shift;
  std::string error;
};

Grid chirp_grid(const GaussianChirp& g, const RunConfig& cfg) {
  if (cfg.grid_extent) {
    const int samples = cfg.grid_samples.value_or(g.dim() <= 2 ? 128 : 48);
    return uniform_grid(g.dim(), samples, *cfg.grid_extent);
  }
  return default_grid(g, cfg.grid_samples.value_or(0));
}

}  // namespace

VerifyResult run_verify(const RunConfig& cfg) {
  // File signals are loaded up front so that a bad file is an input error.
  std::vector<std::optional<SampledSignal>> loaded(cfg.signals.size());
  for (std::size_t i = 0; i < cfg.signals.size(); ++i) {
    const auto& s = cfg.signals[i];
    if (s.chirp) continue;
    try {
      loaded[i] = signal_from_json(read_json_file(s.file, Errc::SignalLoad));
    } catch (const Error& e) {
      throw Error(Errc::SignalLoad, "signal '" + s.id + "': " + e.what());
    }
  }
  std::map<int, std::vector<std::pair<SympMatrix, SympMatrix>>> mats;
  for (std::size_t i = 0; i < cfg.signals.size(); ++i) {
    const int n = cfg.signals[i].chirp ? cfg.signals[i].chirp->dim() : loaded[i]->grid.dim();
    if (mats.count(n)) continue;
    auto& v = mats[n];
    for (const auto& p : cfg.pairs) v.emplace_back(resolve_matrix(p.m1, n), resolve_matrix(p.m2, n));
  }

  std::vector<PreparedSignal> prep(cfg.signals.size());
  parallel_for(cfg.signals.size(), cfg.threads, [&](std::size_t i) {
    const auto& s = cfg.signals[i];
    auto& p = prep[i];
    try {
      if (s.chirp) {
        p.f = normalize(sample_gaussian_chirp(*s.chirp, chirp_grid(*s.chirp, cfg)));
        p.quad = compute_moments(p.f);
        p.rhs = analytic_gaussian_moments(*s.chirp);
      } else {
        Recentered rc = recenter(normalize(*loaded[i]));
        p.f = std::move(rc.signal);
        rc.signal = SampledSignal{};
        p.shift = std::move(rc);
        p.quad = compute_moments(p.f);
        p.rhs = p.quad;
      }
    } catch (const std::exception& e) {
      p.error = e.what();
    }
  });

  const std::size_t np = cfg.pairs.size();
  VerifyResult out;
  out.cells.resize(cfg.signals.size() * np);
  parallel_for(out.cells.size(), cfg.threads, [&](std::size_t c) {
    const std::size_t si = c / np, pi = c % np;
    const auto& s = cfg.signals[si];
    const auto& p = prep[si];
    if (!p.error.empty()) {
      out.cells[c] = BoundReport{s.id, cfg.pairs[pi].m1.id, cfg.pairs[pi].m2.id, {}, p.error};
      return;
    }
    const auto& pair = mats.at(p.f.grid.dim())[pi];
    CellInput in{s.id, &p.f, &p.rhs, &p.quad, cfg.pairs[pi].m1.id, cfg.pairs[pi].m2.id, &pair.first, &pair.second,
                 c % cfg.lemma_stride == 0};
    out.cells[c] = evaluate_cell(in, cfg);
  });

  for (std::size_t i = 0; i < prep.size(); ++i) {
    if (prep[i].shift) out.recentered.push_back({cfg.signals[i].id, prep[i].shift->shift_x, prep[i].shift->shift_w});
  }
  for (const auto& r : out.cells) {
    if (!r.error.empty()) ++out.errored;
    out.entries += r.entries.size();
    for (const auto& e : r.entries) out.violations += e.pass ? 0 : 1;
  }
  return out;
}

json result_to_json(const VerifyResult& r) {
  json cells = json::array();
  for (const auto& c : r.cells) cells.push_back(report_to_json(c));
  json out = {{"schema", "fmtk-report/1"},
              {"summary",
               {{"cells", r.cells.size()}, {"entries", r.entries}, {"violations", r.violations}, {"errored", r.errored}}},
              {"cells", cells}};
  if (!r.recentered.empty()) {
    json shifts = json::array();
    for (const auto& s : r.recentered) {
      shifts.push_back({{"signal_id", s.signal_id},
                        {"shift_x", std::vector<double>(s.shift_x.begin(), s.shift_x.end())},
                        {"shift_w", std::vector<double>(s.shift_w.begin(), s.shift_w.end())}});
    }
    out["recentered"] = shifts;
  }
  return out;
}

std::string result_to_csv(const VerifyResult& r) {
  std::string out = "signal_id,m1_id,m2_id,bound_name,lhs,rhs,slack,pass\n";
  for (const auto& c : r.cells) {
    const std::string prefix = c.signal_id + "," + c.m1_id + "," + c.m2_id + ",";
    if (!c.error.empty()) {
      out += prefix + "error,,,,false\n";
      continue;
    }
    for (const auto& e : c.entries) {
      out += prefix + e.name + "," + fmt_full(e.lhs) + "," + fmt_full(e.rhs) + "," + fmt_full(e.slack) + "," +
             (e.pass ? "true" : "false") + "\n";
    }
  }
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream o(tmp, std::ios::binary | std::ios::trunc);
    if (!o) throw Error(Errc::InvalidArgument, "cannot write '" + tmp + "'");
    o << content;
    o.flush();
    if (!o) {
      std::filesystem::remove(tmp);
      throw Error(Errc::InvalidArgument, "write to '" + tmp + "' failed");
    }
  }
  std::filesystem::rename(tmp, path);
}

void write_result(const VerifyResult& r, const std::string& path, const std::string& format) {
  if (format == "csv") {
    write_atomic(path, result_to_csv(r));
  } else {
    write_atomic(path, result_to_json(r).dump(2) + "\n");
  }
}

PaperExample run_paper_example(double beta, int samples) {
  using clock = std::chrono::steady_clock;
  PaperExample ex;
  ex.expected = {0.114347245036271, 0.101682097080979, 0.101722056292651};
  const GaussianChirp g{{1.0, 2.0}, 1.0, beta};
  const Mat id = Mat::Identity(2, 2), zero = Mat::Zero(2, 2);
  const FreeSympMatrix m1 = make_free(validate_symplectic(assemble_blocks(id, -id, zero, id)));
  const FreeSympMatrix m2 = make_free(validate_symplectic(assemble_blocks(id, id, zero, id)));

  auto t0 = clock::now();
  const MomentSummary am = analytic_gaussian_moments(g);
  ex.analytic = {moment_identity(am, m1.A(), m1.B()) * moment_identity(am, m2.A(), m2.B()),
                 bound_trace(am, m1, m2), bound_componentwise(am, m1, m2)};
  ex.seconds_analytic = std::chrono::duration<double>(clock::now() - t0).count();

  t0 = clock::now();
  const Grid grid = default_grid(g, samples > 0 ? samples : 128);
  ex.samples = grid.samples[0];
  const SampledSignal f = normalize(sample_gaussian_chirp(g, grid));
  const MomentSummary qm = compute_moments(f);
  ex.quadrature = {sheared_second_moment(fmt_sheared(m1, f)) * sheared_second_moment(fmt_sheared(m2, f)),
                   bound_trace(qm, m1, m2), bound_componentwise(qm, m1, m2)};
  ex.seconds_quadrature = std::chrono::duration<double>(clock::now() - t0).count();

  const auto within = [&](const ExampleValues& v, double tol) {
    const auto ok = [&](double a, double b) { return std::abs(a - b) <= tol * std::abs(b); };
    return ok(v.product, ex.expected.product) && ok(v.trace, ex.expected.trace) &&
           ok(v.component, ex.expected.component);
  };
  ex.analytic_ok = within(ex.analytic, 1e-9);
  ex.quadrature_ok = within(ex.quadrature, 1e-3);
  return ex;
}

TransformSummary run_transform(const SampledSignal& in, const MatrixSpec& m) {
  const FreeSympMatrix fm = make_free(resolve_matrix(m, in.grid.dim()));
  TransformSummary s;
  s.out = fmt_apply(fm, in);
  s.in_norm = l2_norm(in);
  s.out_norm = l2_norm(s.out);
  s.unitarity_residual = std::abs(s.out_norm / s.in_norm - 1.0);
  return s;
}

}  // namespace fmtk
