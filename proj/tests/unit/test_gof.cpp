#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numbers>
#include <numeric>

#include "taperspec/errors.hpp"
#include "taperspec/gof.hpp"

using namespace taperspec;

namespace {
constexpr double pi = std::numbers::pi;

double ks_chi2(std::vector<double> s, double dof) {
  std::sort(s.begin(), s.end());
  boost::math::chi_squared law(dof);
  double d = 0.0;
  const double n = static_cast<double>(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double F = boost::math::cdf(law, s[i]);
    d = std::max({d, std::abs(F - i / n), std::abs((i + 1) / n - F)});
  }
  return d;
}

Periodogram synthetic(const SpectralModel& f, std::size_t T) {
  Periodogram p;
  p.grid = canonical_grid(T, 2);
  p.T = T;
  for (double l : p.grid.points) p.values.push_back(f.density(l));
  return p;
}
}  // namespace

TEST(Gof, BasisCertificates) {
  const auto c = TestBasis::cosine(5);
  EXPECT_LT(c.gram_residual, 1e-6);
  EXPECT_EQ(c.size(), 5u);
  const auto a = TestBasis::ar_example(SpectralModel::ar1(0.6), 4);
  EXPECT_LT(a.gram_residual, 1e-6);
  EXPECT_TRUE(a.vanishing[0]);
  EXPECT_FALSE(a.vanishing[1]);
  // the numeric normalisation recovers 1/sqrt(pi)
  const auto ar2 = TestBasis::ar_example(SpectralModel::arma({0.5, -0.3}, {}), 5);
  EXPECT_LT(ar2.gram_residual, 1e-6);
  EXPECT_TRUE(ar2.vanishing[1]);
  EXPECT_THROW(TestBasis::ar_example(SpectralModel::arma({0.5}, {0.2}), 4), UnsupportedError);
  EXPECT_THROW(TestBasis::ar_example(SpectralModel::ar1(0.5), 1), DomainError);
  EXPECT_THROW(parse_basis("legendre:3"), ConfigError);
  EXPECT_THROW(parse_basis("cosine:x"), ConfigError);
  EXPECT_EQ(parse_basis("cosine:3")(SpectralModel::ar1(0.1)).size(), 3u);
}

TEST(Gof, PhiVectorWiring) {
  const auto f0 = SpectralModel::ar1(0.5);
  const auto b = TestBasis::cosine(3);
  for (double v : phi_vector(synthetic(f0, 256), f0, b, 1.0)) EXPECT_NEAR(v, 0.0, 1e-12);
  EXPECT_EQ((MixtureLaw{{1, 1, 1}}.upper_tail(0.0)), 1.0);
  const auto ts = simulate(f0, NoiseDriver(), 512, 3);
  const auto p = tapered_periodogram(ts, Taper::tukey_hanning(), canonical_grid(512, 2));
  const auto a1 = phi_vector(p, f0, b, 1.0);
  const auto a2 = phi_vector(p, f0, b, 2.0);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(a2[j], a1[j] / std::sqrt(2.0), 1e-14);
  EXPECT_THROW(phi_vector(p, SpectralModel::arfima0d0(0.3), b, 1.0), DomainError);  // pole on the unshifted grid
}

TEST(Gof, GammaAndB) {
  EXPECT_NEAR(gamma_matrix(SpectralModel::ar1(0.0), std::vector<double>{0.0})(0, 0), 1.0, 1e-10);
  const auto arma = SpectralModel::arma({0.5}, {0.3});
  const auto G = gamma_matrix(arma, std::vector<double>{0.5, 0.3});
  EXPECT_NEAR(G(0, 1), G(1, 0), 1e-15);
  EXPECT_GT(G(0, 0), 0.0);
  EXPECT_GT(G(1, 1), 0.0);
  // score-orthogonal basis: B = 0; zero rows for phi = 0
  const auto ar = SpectralModel::ar1(0.6);
  const auto th = std::vector<double>{0.6};
  const auto Bz = b_matrix(ar, th, TestBasis::ar_example(ar, 4), Taper::tukey_hanning());
  EXPECT_LT(Bz.cwiseAbs().maxCoeff(), 1e-8);
  const auto cb = TestBasis::cosine(3);
  const auto B1 = b_matrix(ar, th, cb, 1.0);
  const auto Bh = b_matrix(ar, th, cb, Taper::tukey_hanning());
  EXPECT_GT(std::abs(B1(0, 0)), 0.1);
  EXPECT_NEAR(Bh(0, 0), B1(0, 0) / std::sqrt(35.0 / 18.0), 1e-12);
  // the AR score is 2 sum_k phi^{k-1} cos(k l), so int phi_1 score = 2 pi / sqrt(pi)
  EXPECT_NEAR(B1(0, 0), 2.0 * pi / std::sqrt(pi) / std::sqrt(4 * pi), 1e-9);
}

TEST(Gof, DeltaVector) {
  const auto f = SpectralModel::ar1(0.5);
  EXPECT_NEAR(delta_vector(synthetic(f, 256), f, 1.0)[0], 0.0, 1e-12);
  const auto p = synthetic(f, 256);
  const double over = delta_vector(p, SpectralModel::ar1(0.6), 1.0)[0];
  const double under = delta_vector(p, SpectralModel::ar1(0.4), 1.0)[0];
  EXPECT_LT(over * under, 0.0);
  EXPECT_LT(over, 0.0);  // theta too large: the objective slope pushes back down
}

TEST(Gof, MixtureWeights) {
  Eigen::MatrixXd G(2, 2);
  G << 2.0, 0.3, 0.3, 1.0;
  const Eigen::LLT<Eigen::MatrixXd> llt(G);
  const Eigen::MatrixXd Bsq = llt.matrixL().transpose();  // B'B = G
  for (double nu : mixture_weights(G, Bsq).nu) EXPECT_NEAR(nu, 0.0, 1e-12);
  for (double nu : mixture_weights(G, Eigen::MatrixXd::Zero(3, 2)).nu) EXPECT_EQ(nu, 1.0);
  // scalar case against a scan of det[(1 - nu) gamma - b'b]
  Eigen::MatrixXd g1(1, 1), b1(2, 1);
  g1 << 1.7;
  b1 << 0.5, 0.6;
  const double bb = 0.25 + 0.36;
  double root = -1;
  for (int i = 0; i < 1000000; ++i) {
    const double nu = i / 1e6, nu2 = (i + 1) / 1e6;
    if (((1 - nu) * 1.7 - bb) * ((1 - nu2) * 1.7 - bb) <= 0) {
      root = nu;
      break;
    }
  }
  EXPECT_NEAR(mixture_weights(g1, b1).nu[0], 1 - bb / 1.7, 1e-12);
  EXPECT_NEAR(mixture_weights(g1, b1).nu[0], root, 1e-6);
  // clamping is counted
  Eigen::MatrixXd big(1, 1);
  big << 2.0;
  const auto cl = mixture_weights(g1, big);
  EXPECT_EQ(cl.clamped, 1u);
  EXPECT_EQ(cl.nu[0], 0.0);
  EXPECT_THROW(mixture_weights(Eigen::MatrixXd::Zero(1, 1), b1), SingularInformationError);
}

TEST(Gof, MixtureLaw) {
  const MixtureLaw chi3{{1, 1, 1, 0}};
  std::size_t k = 0;
  EXPECT_TRUE(chi3.is_chi_square(&k));
  EXPECT_EQ(k, 3u);
  const double q = boost::math::quantile(boost::math::chi_squared(3), 0.95);
  EXPECT_NEAR(chi3.quantile(0.95), q, 1e-12);
  // Monte Carlo route on the same law
  auto xs = chi3.sample(200000, 4);
  std::sort(xs.begin(), xs.end());
  EXPECT_NEAR(xs[static_cast<std::size_t>(0.95 * (xs.size() - 1))], q, 0.05);
  const MixtureLaw mixed{{1, 1, 0.4}};
  EXPECT_FALSE(mixed.is_chi_square());
  const double t = mixed.upper_tail(5.0);
  EXPECT_GT(t, (MixtureLaw{{1, 1}}.upper_tail(5.0)));
  EXPECT_LT(t, (MixtureLaw{{1, 1, 1}}.upper_tail(5.0)));
  EXPECT_EQ(mixed.upper_tail(5.0), t);  // fixed internal seed
}

TEST(Gof, SimpleTestSizeAndPower) {
  const auto f0 = SpectralModel::ar1(0.5);
  const auto b = TestBasis::cosine(3);
  const std::size_t T = 1024;
  const int R = 2000;
  for (const auto& h : {Taper::rectangular(), Taper::tukey_hanning()}) {
    int rej = 0;
    double m1 = 0.0, m2 = 0.0;
    for (int r = 0; r < R; ++r) {
      const auto res = simple_test(simulate(f0, NoiseDriver(), T, derive_seed(40, r)).view(), h, f0, b);
      rej += res.reject;
      m1 += res.phi[0] / R;
      m2 += res.phi[0] * res.phi[0] / R;
    }
    const double size = double(rej) / R;
    EXPECT_GE(size, 0.03) << h.name();
    EXPECT_LE(size, 0.07) << h.name();
    EXPECT_NEAR(m1, 0.0, 0.1);
    EXPECT_NEAR(m2, 1.0, 0.1);
  }
  int rej = 0;
  for (int r = 0; r < 300; ++r)
    rej += simple_test(simulate(SpectralModel::ar1(0.7), NoiseDriver(), T, derive_seed(41, r)).view(),
                       Taper::tukey_hanning(), f0, b).reject;
  EXPECT_GT(rej / 300.0, 0.5);
}

TEST(Gof, CompositeArExample) {
  const auto fam = SpectralModel::ar1(0.5);
  const auto basis = parse_basis("ar-example:4");
  const auto h = Taper::tukey_hanning();
  const std::size_t T = 1024;
  std::vector<double> S;
  for (int r = 0; r < 600; ++r) {
    const auto res = composite_test(simulate(fam, NoiseDriver(), T, derive_seed(50, r)).view(), h, fam, basis);
    if (r == 0) {
      EXPECT_EQ(res.dof, 3u);
      EXPECT_EQ(res.mc_half_width, 0.0);
      ASSERT_EQ(res.nu.size(), 1u);
      EXPECT_EQ(res.nu[0], 1.0);  // B = 0 forces nu = 1 in the bare equation
    }
    S.push_back(res.statistic);
  }
  EXPECT_LT(ks_chi2(S, 3.0), 0.07);
}

TEST(Gof, CompositeCosineMixture) {
  const auto fam = SpectralModel::ar1(0.5);
  const auto basis = parse_basis("cosine:3");
  const auto cov = composite_covariance(fam, basis(fam));
  // first cosine is collinear with the AR score: one weight well below 1
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  EXPECT_LT(es.eigenvalues()(0), 0.9);
  EXPECT_GT(es.eigenvalues()(0), -1e-9);
  const auto res = composite_test(simulate(fam, NoiseDriver(), 2048, 7).view(), Taper::tukey_hanning(), fam, basis);
  EXPECT_EQ(res.dof, 0u);
  EXPECT_GT(res.mc_half_width, 0.0);
  EXPECT_GE(res.p_value, 0.0);
  EXPECT_LE(res.p_value, 1.0);
}

TEST(Gof, CompositeMatchesSimpleAtTruthAndRelation) {
  // B = 0 basis: Phi(theta_hat) and Phi(theta_0) nearly coincide
  const auto fam = SpectralModel::ar1(0.5);
  const auto h = Taper::tukey_hanning();
  const std::size_t T = 4096;
  const double e = 35.0 / 18.0;
  const auto b0 = TestBasis::ar_example(fam, 4);
  std::vector<double> a, b, resid;
  for (int r = 0; r < 150; ++r) {
    const auto ts = simulate(fam, NoiseDriver(), T, derive_seed(60, r));
    a.push_back(composite_test(ts.view(), h, fam, parse_basis("ar-example:4")).statistic);
    b.push_back(simple_test(ts.view(), h, fam, b0).statistic);
    // sqrt(T)(theta_hat - theta_0) against sqrt(e/4pi) Gamma^-1 Delta
    const auto fit = whittle_estimate(ts, h, fam);
    const double d = delta_vector(ts.view(), h, fam, std::vector<double>{0.5})[0];
    resid.push_back(std::abs(std::sqrt(double(T)) * (fit.theta_hat[0] - 0.5) - std::sqrt(e / (4 * pi)) * 0.75 * d));
  }
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / b.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  EXPECT_GT(sab / std::sqrt(saa * sbb), 0.95);
  std::sort(resid.begin(), resid.end());
  EXPECT_LT(resid[resid.size() / 2], 0.1);  // against sd(sqrt(T) theta_hat) ~ 1.2
}

TEST(Gof, CompositeCosineSize) {
  // the mixture law (not chi^2_m) gives the nominal size when theta is estimated
  const auto fam = SpectralModel::ar1(0.5);
  const auto basis = parse_basis("cosine:3");
  CompositeOptions opt;
  opt.mixture_draws = 20000;
  int rej = 0, naive = 0;
  const int R = 1000;
  boost::math::chi_squared chi3(3);
  const double d = boost::math::quantile(boost::math::complement(chi3, 0.05));
  for (int r = 0; r < R; ++r) {
    const auto res = composite_test(simulate(fam, NoiseDriver(), 1024, derive_seed(70, r)).view(),
                                    Taper::tukey_hanning(), fam, basis, 0.05, opt);
    rej += res.reject;
    naive += res.statistic > d;
  }
  EXPECT_NEAR(rej / double(R), 0.05, 0.02);
  EXPECT_LT(naive / double(R), 0.035);
}
