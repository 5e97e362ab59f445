#include "taperspec/gof.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <charconv>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "taperspec/errors.hpp"
#include "taperspec/quadrature.hpp"

namespace taperspec {
namespace {

constexpr double kPi = std::numbers::pi;
using cd = std::complex<double>;

bool fractional(const SpectralModel& m) {
  return m.family() == Family::arfima0d0 || m.family() == Family::arfima_pdq ||
         m.family() == Family::fgn;
}

double full_integral(const std::function<double(double)>& fn) {
  return quad::integrate(fn, -kPi, kPi);
}

void certify(TestBasis& b) {
  const std::size_t m = b.size();
  b.gram.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  if (b.vanishing.size() != m) b.vanishing.assign(m, false);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      double v = 0.0;
      if (!b.vanishing[i] && !b.vanishing[j])
        v = full_integral([&](double l) { return b.phi[i](l) * b.phi[j](l); });
      b.gram(i, j) = b.gram(j, i) = v;
    }
  for (std::size_t i = 0; i < m; ++i)
    if (b.gram(i, i) < 1e-14) b.vanishing[i] = true;
  b.gram_residual = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (!b.vanishing[i] && !b.vanishing[j])
        b.gram_residual = std::max(b.gram_residual, std::abs(b.gram(i, j) - (i == j ? 1.0 : 0.0)));
}

double e_of(const Taper& taper) { return tapering_factor(taper); }

double checked_density(const SpectralModel& m, double l) {
  const double f = m.density(l);
  if (!(f > 0.0) || !std::isfinite(f))
    throw DomainError("hypothesised density non-positive or non-finite on the grid");
  return f;
}

// C_jk = int phi_j psi_k, psi the score with an optional trailing 1 for ln(scale)
Eigen::MatrixXd cross_integrals(const SpectralModel& m, const TestBasis& basis, bool extend) {
  const std::size_t p = m.dim(), q = extend ? p + 1 : p;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(basis.size()),
                                            static_cast<Eigen::Index>(q));
  const bool singular = fractional(m);
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (basis.vanishing[j]) continue;
    for (std::size_t k = 0; k < q; ++k)
      C(j, k) = quad::integrate_even(
          [&](double l) { return basis.phi[j](l) * (k < p ? m.score(l)[k] : 1.0); }, singular);
  }
  return C;
}

Eigen::MatrixXd score_gram(const SpectralModel& m, bool extend) {
  const std::size_t p = m.dim(), q = extend ? p + 1 : p;
  Eigen::MatrixXd G(q, q);
  const bool singular = fractional(m);
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = i; j < q; ++j)
      G(i, j) = G(j, i) = quad::integrate_even(
                              [&](double l) {
                                const auto s = m.score(l);
                                return (i < p ? s[i] : 1.0) * (j < p ? s[j] : 1.0);
                              },
                              singular) /
                          (4.0 * kPi);
  return G;
}

void check_nonsingular(const Eigen::MatrixXd& G) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
  const double mx = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(es.eigenvalues().minCoeff() > 1e-12 * mx))
    throw SingularInformationError("Gamma is singular");
}

double sum_on_grid(const Periodogram& p, const SpectralModel& f,
                   const std::function<double(double)>& weight) {
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double l = p.grid.points[j];
    acc += (p.values[j] / checked_density(f, l) - 1.0) * weight(l) * p.grid.weights[j];
  }
  return acc;
}

}  // namespace

std::vector<double> TestBasis::on_grid(std::size_t j, const FrequencyGrid& grid) const {
  std::vector<double> v(grid.size(), 0.0);
  if (vanishing[j]) return v;
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = phi[j](grid.points[i]);
  return v;
}

TestBasis TestBasis::cosine(std::size_t m) {
  if (m < 1) throw DomainError("cosine basis needs m >= 1");
  TestBasis b;
  b.name = "cosine:" + std::to_string(m);
  const double c = 1.0 / std::sqrt(kPi);
  for (std::size_t j = 1; j <= m; ++j)
    b.phi.push_back([c, j](double l) { return c * std::cos(static_cast<double>(j) * l); });
  certify(b);
  return b;
}

TestBasis TestBasis::ar_example(const SpectralModel& model, std::size_t m) {
  if (fractional(model) || model.ma_order() != 0 || model.family() == Family::white_noise)
    throw UnsupportedError("ar-example basis requires a pure autoregressive model");
  const std::vector<double> a(model.ar_coefficients().begin(), model.ar_coefficients().end());
  const std::size_t p = a.size();
  if (m <= p) throw DomainError("ar-example basis needs m > p");
  auto alpha = [a](cd z) {
    cd v = 1.0, zk = 1.0;
    for (double c : a) {
      zk *= z;
      v -= c * zk;
    }
    return v;
  };
  auto raw = [alpha](std::size_t j) {
    return [alpha, j](double l) {
      const cd u = std::polar(1.0, static_cast<double>(j) * l) * alpha(std::polar(1.0, -l)) /
                   alpha(std::polar(1.0, l));
      return u.real();
    };
  };
  TestBasis b;
  b.name = "ar-example:" + std::to_string(m);
  for (std::size_t j = 1; j <= m; ++j) {
    if (j <= p) {
      b.phi.push_back([](double) { return 0.0; });
      b.vanishing.push_back(true);
      continue;
    }
    auto r = raw(j);
    const double c = 1.0 / std::sqrt(full_integral([&](double l) { return r(l) * r(l); }));
    b.phi.push_back([r, c](double l) { return c * r(l); });
    b.vanishing.push_back(false);
  }
  certify(b);
  return b;
}

TestBasis TestBasis::custom(std::vector<std::function<double(double)>> phi, std::string name) {
  TestBasis b;
  b.name = std::move(name);
  b.phi = std::move(phi);
  for (const auto& f : b.phi)
    if (!f) throw DomainError("custom basis with an empty function");
  certify(b);
  return b;
}

BasisBuilder parse_basis(std::string_view spec) {
  // bare "ar-example" uses m = p + 3, the smallest basis with three free directions
  if (spec == "ar-example")
    return [](const SpectralModel& fit) { return TestBasis::ar_example(fit, fit.ar_order() + 3); };
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw ConfigError("basis '" + std::string(spec) + "': expected kind:m");
  const auto kind = spec.substr(0, colon);
  const auto num = spec.substr(colon + 1);
  std::size_t m = 0;
  const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), m);
  if (ec != std::errc() || ptr != num.data() + num.size() || m < 1)
    throw ConfigError("basis '" + std::string(spec) + "': bad size");
  if (kind == "cosine") {
    auto b = TestBasis::cosine(m);
    return [b](const SpectralModel&) { return b; };
  }
  if (kind == "ar-example") return [m](const SpectralModel& fit) { return TestBasis::ar_example(fit, m); };
  throw ConfigError("unknown basis '" + std::string(kind) + "' (expected cosine|ar-example)");
}

bool MixtureLaw::is_chi_square(std::size_t* dof) const {
  std::size_t k = 0;
  for (double w : weights) {
    if (std::abs(w - 1.0) < 1e-9) ++k;
    else if (std::abs(w) >= 1e-9) return false;
  }
  if (dof) *dof = k;
  return true;
}

std::vector<double> MixtureLaw::sample(std::size_t n, std::uint64_t seed) const {
  Engine eng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& s : out) {
    double acc = 0.0;
    for (double w : weights) {
      const double z = normal(eng);
      acc += w * z * z;
    }
    s = acc;
  }
  return out;
}

double MixtureLaw::upper_tail(double s, std::size_t draws, std::uint64_t seed) const {
  std::size_t k = 0;
  if (is_chi_square(&k)) {
    if (k == 0) return s > 0.0 ? 0.0 : 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(static_cast<double>(k)),
                                                    std::max(s, 0.0)));
  }
  const auto xs = sample(draws, seed);
  std::size_t above = 0;
  for (double x : xs) above += x >= s;
  return static_cast<double>(above) / static_cast<double>(draws);
}

double MixtureLaw::quantile(double p, std::size_t draws, std::uint64_t seed) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  std::size_t k = 0;
  if (is_chi_square(&k)) {
    if (k == 0) return 0.0;
    return boost::math::quantile(boost::math::chi_squared(static_cast<double>(k)), p);
  }
  auto xs = sample(draws, seed);
  const auto idx = static_cast<std::size_t>(std::floor(p * static_cast<double>(draws - 1)));
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(idx), xs.end());
  return xs[idx];
}

std::vector<double> phi_vector(const Periodogram& pgram, const SpectralModel& f0,
                               const TestBasis& basis, double e) {
  if (!(e > 0.0)) throw DomainError("tapering factor must be positive");
  const double scale = std::sqrt(static_cast<double>(pgram.T)) / std::sqrt(4.0 * kPi * e);
  std::vector<double> out(basis.size(), 0.0);
  for (std::size_t j = 0; j < basis.size(); ++j)
    if (!basis.vanishing[j]) out[j] = scale * sum_on_grid(pgram, f0, basis.phi[j]);
  return out;
}

std::vector<double> phi_vector(std::span<const double> x, const Taper& taper,
                               const SpectralModel& f0, const TestBasis& basis) {
  const auto p = tapered_periodogram(x, taper, whittle_grid(f0, x.size()));
  return phi_vector(p, f0, basis, e_of(taper));
}

GofResult simple_test(std::span<const double> x, const Taper& taper, const SpectralModel& f0,
                      const TestBasis& basis, double alpha) {
  GofResult r;
  r.alpha = alpha;
  r.phi = phi_vector(x, taper, f0, basis);
  for (double v : r.phi) r.statistic += v * v;
  for (bool z : basis.vanishing) r.dof += !z;
  r.mixture.assign(r.dof, 1.0);
  r.p_value = MixtureLaw{r.mixture}.upper_tail(r.statistic);
  r.reject = r.p_value < alpha;
  return r;
}

Eigen::MatrixXd gamma_matrix(const SpectralModel& family, std::span<const double> theta) {
  const auto G = score_gram(family.with_theta(theta), false);
  check_nonsingular(G);
  return G;
}

Eigen::MatrixXd b_matrix(const SpectralModel& family, std::span<const double> theta,
                         const TestBasis& basis, double e) {
  return cross_integrals(family.with_theta(theta), basis, false) / std::sqrt(4.0 * kPi * e);
}

Eigen::MatrixXd b_matrix(const SpectralModel& family, std::span<const double> theta,
                         const TestBasis& basis, const Taper& taper) {
  return b_matrix(family, theta, basis, e_of(taper));
}

std::vector<double> delta_vector(const Periodogram& pgram, const SpectralModel& model, double e) {
  const double scale = std::sqrt(static_cast<double>(pgram.T)) / std::sqrt(4.0 * kPi * e);
  std::vector<double> out(model.dim(), 0.0);
  for (std::size_t j = 0; j < pgram.size(); ++j) {
    const double l = pgram.grid.points[j];
    const double r = (pgram.values[j] / checked_density(model, l) - 1.0) * pgram.grid.weights[j];
    const auto s = model.score(l);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += r * s[k];
  }
  for (auto& v : out) v *= scale;
  return out;
}

std::vector<double> delta_vector(std::span<const double> x, const Taper& taper,
                                 const SpectralModel& family, std::span<const double> theta) {
  const auto m = family.with_theta(theta);
  const auto p = tapered_periodogram(x, taper, whittle_grid(m, x.size()));
  return delta_vector(p, m, e_of(taper));
}

MixtureWeights mixture_weights(const Eigen::MatrixXd& Gamma, const Eigen::MatrixXd& B,
                               double e_factor) {
  if (Gamma.rows() != Gamma.cols() || B.cols() != Gamma.rows())
    throw ShapeError("mixture_weights: Gamma must be p x p and B m x p");
  check_nonsingular(Gamma);
  // Gamma^-1 B'B is similar to the symmetric L^-1 B'B L^-T
  Eigen::LLT<Eigen::MatrixXd> llt(Gamma);
  const Eigen::MatrixXd Li = llt.matrixL().solve(Eigen::MatrixXd::Identity(Gamma.rows(), Gamma.cols()));
  const Eigen::MatrixXd S = Li * (B.transpose() * B) * Li.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  MixtureWeights out;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    double nu = 1.0 - e_factor * es.eigenvalues()(k);
    if (nu < 0.0 || nu > 1.0) {
      ++out.clamped;
      nu = std::clamp(nu, 0.0, 1.0);
    }
    out.nu.push_back(nu);
  }
  return out;
}

Eigen::MatrixXd composite_covariance(const SpectralModel& model, const TestBasis& basis) {
  const bool extend = model.has_scale();
  const auto G = score_gram(model, extend);
  check_nonsingular(G);
  const auto C = cross_integrals(model, basis, extend);
  Eigen::MatrixXd S = basis.gram - C * G.ldlt().solve(C.transpose()) / (4.0 * kPi);
  return 0.5 * (S + S.transpose());
}

GofResult composite_test(std::span<const double> x, const Taper& taper, const SpectralModel& family,
                         const BasisBuilder& make_basis, double alpha, const CompositeOptions& opt) {
  const auto fit = whittle_estimate(x, taper, family, opt.whittle);
  if (!fit.converged) throw ConvergenceError("Whittle estimator did not converge; composite test aborted");
  const auto model = fitted_model(family, fit);
  const auto basis = make_basis(model);
  const double e = e_of(taper);

  GofResult r;
  r.alpha = alpha;
  r.theta_hat = fit.theta_hat;
  const auto p = tapered_periodogram(x, taper, whittle_grid(family, x.size(), opt.whittle.oversample));
  r.phi = phi_vector(p, model, basis, e);
  for (double v : r.phi) r.statistic += v * v;

  const auto mw = mixture_weights(gamma_matrix(family, fit.theta_hat),
                                  b_matrix(family, fit.theta_hat, basis, e), e);
  r.nu = mw.nu;
  r.clamped = mw.clamped;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(composite_covariance(model, basis),
                                                    Eigen::EigenvaluesOnly);
  for (Eigen::Index k = es.eigenvalues().size(); k-- > 0;) {
    double w = es.eigenvalues()(k);
    if (w < 1e-9) w = 0.0;            // eigenvalues of a covariance: negatives are round-off
    if (std::abs(w - 1.0) < 1e-9) w = 1.0;
    r.mixture.push_back(w);
  }
  const MixtureLaw law{r.mixture};
  if (law.is_chi_square(&r.dof)) {
    r.p_value = law.upper_tail(r.statistic);
  } else {
    r.dof = 0;
    r.p_value = law.upper_tail(r.statistic, opt.mixture_draws, opt.mixture_seed);
    r.mc_half_width = 1.96 * std::sqrt(r.p_value * (1.0 - r.p_value) / static_cast<double>(opt.mixture_draws));
  }
  r.reject = r.p_value < alpha;
  return r;
}

}  // namespace taperspec
