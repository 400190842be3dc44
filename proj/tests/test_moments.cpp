#include <gtest/gtest.h>

#include <cmath>

#include "fmtk/error.hpp"
#include "fmtk/moments.hpp"

using namespace fmtk;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no fmtk::Error thrown";
  return Errc::InvalidArgument;
}

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

// f(x − a)·e^{2πi b·x} sampled directly from the closed form.
SampledSignal shifted_chirp(const GaussianChirp& g, const Grid& grid, const std::vector<double>& a,
                            const std::vector<double>& b) {
  const int n = g.dim();
  double zp = 1.0;
  for (double z : g.zeta) zp *= z;
  const double amp = std::pow(kPi, -n / 4.0) * std::pow(zp, -0.25);
  SampledSignal f{grid, CVec(grid.size())};
  for_each_point(grid, [&](std::size_t lin, const double* x) {
    double env = 0.0, r2 = 0.0, lin_phase = 0.0;
    for (int j = 0; j < n; ++j) {
      const double y = x[j] - a[j];
      env += y * y / (2.0 * g.zeta[j]);
      r2 += y * y;
      lin_phase += b[j] * x[j];
    }
    f.values[lin] = std::polar(amp * std::exp(-env), 2.0 * kPi * (r2 * g.inv_epsilon() / 2.0 + g.beta + lin_phase));
  });
  return f;
}

}  // namespace

TEST(Moments, ClosedFormForChirpedGaussian) {
  // X = ζ/2, W = 1/(8π²ζ) + ζ/(2ε²), Cov = ζ/(2ε) per axis.
  const GaussianChirp g{{1.0, 2.0}, 1.0, 0.0};
  const MomentSummary a = analytic_gaussian_moments(g);
  EXPECT_DOUBLE_EQ(a.dx2, 1.5);
  EXPECT_NEAR(a.dw2, 1.0 / (8 * kPi * kPi) + 1.0 / (16 * kPi * kPi) + 0.5 + 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(a.cov, 1.5);
  EXPECT_DOUBLE_EQ(a.cov_abs_total, 1.5);
  EXPECT_DOUBLE_EQ(a.cov_abs_diag_sum, 1.5);
  EXPECT_NEAR(a.cov_abs_per_pair(0, 1), std::sqrt(2.0) / kPi, 1e-15);
  EXPECT_EQ(a.Sigma.rows(), 4);
  EXPECT_EQ(a.Sigma(0, 2), a.CovXW(0, 0));
}

TEST(Moments, QuadratureMatchesClosedForm) {
  for (const GaussianChirp& g : {GaussianChirp{{1.0, 2.0}, 1.0, 0.0}, GaussianChirp{{0.5, 1.5}, -2.0, 0.2},
                                 GaussianChirp{{0.7}, 0.8, 0.0}}) {
    const SampledSignal f = sample_gaussian_chirp(g, default_grid(g));
    const MomentSummary q = compute_moments(f);
    const MomentSummary a = analytic_gaussian_moments(g);
    EXPECT_LT(max_abs(q.X - a.X), 1e-6);
    EXPECT_LT(max_abs(q.W - a.W), 1e-6);
    EXPECT_LT(max_abs(q.CovXW - a.CovXW), 1e-6);
    for (int j = 0; j < g.dim(); ++j) EXPECT_NEAR(q.cov_abs_per_pair(j, j), a.cov_abs_per_pair(j, j), 1e-6);
    EXPECT_NEAR(q.cov_abs_total, a.cov_abs_total, 1e-6);
    EXPECT_NEAR(q.norm2, 1.0, 1e-6);
    EXPECT_FALSE(q.approximate);
    EXPECT_LT(q.w_crosscheck, 1e-6);
  }
}

TEST(Moments, AbsoluteCovarianceOffDiagonal) {
  // ∫|x_0||∂_1φ||f|² with ∂_1φ = x_1/ε; the |·| kinks make the lattice sum
  // second order in h, so compare with the same sum done by hand.
  const GaussianChirp g{{1.0, 2.0}, 1.0, 0.0};
  const SampledSignal f = sample_gaussian_chirp(g, default_grid(g));
  const MomentSummary q = compute_moments(f);
  const double amp2 = 1.0 / (kPi * std::sqrt(2.0));
  double riemann = 0.0;
  for_each_point(f.grid, [&](std::size_t, const double* x) {
    riemann += std::abs(x[0]) * std::abs(x[1]) * amp2 * std::exp(-x[0] * x[0] - x[1] * x[1] / 2.0);
  });
  riemann *= f.grid.cell_volume();
  EXPECT_NEAR(q.cov_abs_per_pair(0, 1), riemann, 1e-7);
  const double h = std::max(f.grid.step(0), f.grid.step(1));
  EXPECT_NEAR(q.cov_abs_per_pair(0, 1), std::sqrt(2.0) / kPi, h * h);
  EXPECT_GT(std::abs(q.cov_abs_per_pair(0, 1) - std::sqrt(2.0) / kPi), 1e-6);
}

TEST(Moments, UnchirpedGaussianHasNoCovariance) {
  const GaussianChirp g{{0.5, 2.0}, std::numeric_limits<double>::infinity(), 0.0};
  const MomentSummary q = compute_moments(sample_gaussian_chirp(g, default_grid(g)));
  EXPECT_LT(max_abs(q.CovXW), 1e-10);
  EXPECT_LT(q.cov_abs_total, 1e-10);
  // X_jj·W_jj = 1/16π² per axis.
  for (int j = 0; j < 2; ++j) EXPECT_NEAR(q.X(j, j) * q.W(j, j), 1.0 / (16 * kPi * kPi), 1e-8);
}

TEST(Moments, BetaDoesNotChangeMoments) {
  GaussianChirp g{{1.0, 0.5}, 1.5, 0.0};
  const Grid grid = default_grid(g);
  const MomentSummary m0 = compute_moments(sample_gaussian_chirp(g, grid));
  g.beta = 0.37;
  const MomentSummary m1 = compute_moments(sample_gaussian_chirp(g, grid));
  EXPECT_LT(max_abs(m0.Sigma - m1.Sigma), 1e-12);
  EXPECT_NEAR(m0.cov_abs_total, m1.cov_abs_total, 1e-12);
}

TEST(Moments, OffCenterSignalsNeedRecentering) {
  const GaussianChirp g{{1.0, 0.5}, 2.0, 0.0};
  const Grid grid = uniform_grid(2, 256, 10.0);
  const SampledSignal f = shifted_chirp(g, grid, {0.8, -0.5}, {0.3, 0.6});
  EXPECT_EQ(code_of([&] { compute_moments(f); }), Errc::NotCentered);

  MomentOptions loose;
  loose.require_centered = false;
  const MomentSummary raw = compute_moments(f, loose);
  EXPECT_NEAR(raw.mean_x(0), 0.8, 1e-8);
  EXPECT_NEAR(raw.mean_x(1), -0.5, 1e-8);
  // The chirp is centered at a, so ⟨w⟩ = b.
  EXPECT_NEAR(raw.mean_w(0), 0.3, 1e-8);
  EXPECT_NEAR(raw.mean_w(1), 0.6, 1e-8);

  const Recentered rc = recenter(f);
  EXPECT_NEAR(rc.shift_x(0), 0.8, 1e-8);
  EXPECT_NEAR(rc.shift_w(1), 0.6, 1e-8);
  const MomentSummary c = compute_moments(rc.signal);
  const MomentSummary a = analytic_gaussian_moments(g);
  EXPECT_LT(max_abs(c.Sigma - a.Sigma), 1e-6);
  EXPECT_LT(c.mean_x.cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT(c.mean_w.cwiseAbs().maxCoeff(), 1e-6);
  // Central moments do not depend on the means.
  EXPECT_LT(max_abs(raw.Sigma - a.Sigma), 1e-6);
}

TEST(Moments, ZeroSignalIsRejected) {
  const SampledSignal z{uniform_grid(1, 16, 2.0), CVec(16)};
  EXPECT_EQ(code_of([&] { compute_moments(z); }), Errc::ZeroSignal);
}

TEST(Moments, SecondMomentOfTransformMatchesIdentity) {
  const GaussianChirp g{{1.0, 0.5}, 3.0, 0.0};
  const SampledSignal f = sample_gaussian_chirp(g, default_grid(g));
  const MomentSummary mom = compute_moments(f);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const FreeSympMatrix m = random_free(2, seed);
    const SecondMoment s = second_moment_fmt(f, m, mom);
    EXPECT_NEAR(s.direct / s.identity, 1.0, 1e-6) << "seed " << seed;
  }
  const GaussianChirp g1{{1.3}, -1.0, 0.0};
  const SampledSignal f1 = sample_gaussian_chirp(g1, default_grid(g1));
  const SecondMoment s = second_moment_fmt(f1, make_free(table1_matrix(Table1Kind::frft, {0.9}, 1)));
  EXPECT_NEAR(s.direct / s.identity, 1.0, 1e-6);
}

TEST(Moments, WignerSecondMomentsGiveSigma) {
  const GaussianChirp g{{0.8, 1.2}, -1.5, 0.0};
  const SampledSignal f = sample_gaussian_chirp(g, default_grid(g, 64));
  const Mat s = sigma_via_wigner(f);
  const MomentSummary a = analytic_gaussian_moments(g);
  EXPECT_LT(max_abs(s - a.Sigma), 1e-4);
  EXPECT_LT(max_abs(s - s.transpose()), 1e-12);
}

TEST(Moments, JsonCarriesTheBlocks) {
  const MomentSummary a = analytic_gaussian_moments(GaussianChirp{{1.0, 2.0}, 1.0, 0.0});
  const auto j = moments_to_json(a);
  EXPECT_DOUBLE_EQ(j.at("dx2").get<double>(), 1.5);
  EXPECT_TRUE(j.contains("Sigma"));
}
