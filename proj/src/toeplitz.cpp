#include "taperspec/toeplitz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "taperspec/errors.hpp"
#include "taperspec/quadrature.hpp"

namespace taperspec {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> default_exponents(std::size_t m, std::span<const double> given) {
  if (given.empty()) return std::vector<double>(m, 0.5);
  if (given.size() != m) throw ShapeError("one taper exponent per generator expected");
  return {given.begin(), given.end()};
}

double taper_power_moment(const Taper& taper, double k) {
  const double r = std::round(k);
  if (std::abs(k - r) > 1e-12) throw DomainError("2 * sum of taper exponents must be an integer");
  if (r == 0.0) return 1.0;
  return taper.moment(static_cast<int>(r));
}

struct Eigenpath {
  std::vector<double> values;
  bool symmetric = true;
};

Eigenpath qf_eigenvalues(const SpectralModel& f, const GeneratingFunction& g, const Taper& taper,
                         std::size_t T) {
  const auto Bf = build_matrix(GeneratingFunction::from_model(f), taper, T, 0.0).matrix;
  const auto Bg = build_matrix(g, taper, T, 1.0).matrix;
  Eigenpath out;
  Eigen::LLT<Eigen::MatrixXd> llt(Bf);
  if (llt.info() == Eigen::Success) {
    const Eigen::MatrixXd L = llt.matrixL();
    const Eigen::MatrixXd S = L.transpose() * Bg * L;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  } else {
    out.symmetric = false;
    Eigen::EigenSolver<Eigen::MatrixXd> es(Bf * Bg, false);
    const auto& ev = es.eigenvalues();
    double scale = ev.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < ev.size(); ++j) {
      if (std::abs(ev[j].imag()) > 1e-8 * std::max(scale, 1e-300))
        throw SingularInformationError("B(f) B^h(g) has complex eigenvalues");
      out.values.push_back(ev[j].real());
    }
    std::sort(out.values.begin(), out.values.end());
  }
  return out;
}

double factorial_weight(int k) {
  // 2^{k-1} (k-1)!
  double w = std::pow(2.0, k - 1);
  for (int j = 2; j < k; ++j) w *= j;
  return w;
}

}  // namespace

TaperedToeplitzMatrix build_matrix(const GeneratingFunction& psi, const Taper& taper,
                                   std::size_t T, double taper_exponent) {
  if (T > kToeplitzMaxT)
    throw SizeError("build_matrix: T = " + std::to_string(T) + " exceeds 2048");
  if (T < 1) throw SizeError("build_matrix requires T >= 1");
  TaperedToeplitzMatrix A;
  A.order = T;
  A.generator = psi.name();
  A.taper_exponent = taper_exponent;
  const auto ghat = psi.fourier_coefficients(T);
  auto h = taper.weights(T);
  if (taper_exponent != 1.0)
    for (auto& v : h) v = taper_exponent == 0.0 ? 1.0 : std::pow(v, taper_exponent);
  A.matrix.resize(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(T));
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t s = 0; s < T; ++s)
      A.matrix(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) =
          ghat[t > s ? t - s : s - t] * h[t] * h[s];
  return A;
}

double trace_product(std::span<const TaperedToeplitzMatrix> matrices) {
  const std::size_t m = matrices.size();
  if (m < 2 || m > 4) throw UnsupportedError("trace_product supports 2, 3 or 4 factors");
  const std::size_t T = matrices[0].order;
  for (const auto& A : matrices)
    if (A.order != T) throw OrderMismatchError("trace_product: matrices of different order");
  // tr[XY] = sum_ij X_ij Y_ji, so at most one product is formed on each side
  Eigen::MatrixXd left = matrices[0].matrix;
  Eigen::MatrixXd right;
  switch (m) {
    case 2: right = matrices[1].matrix; break;
    case 3:
      left = matrices[0].matrix * matrices[1].matrix;
      right = matrices[2].matrix;
      break;
    case 4:
      left = matrices[0].matrix * matrices[1].matrix;
      right = matrices[2].matrix * matrices[3].matrix;
      break;
  }
  const double tr = left.cwiseProduct(right.transpose()).sum();
  return tr / static_cast<double>(T);
}

double trace_limit(std::span<const GeneratingFunction> psis, const Taper& taper,
                   std::span<const double> exponents) {
  const std::size_t m = psis.size();
  if (m < 1) throw ShapeError("trace_limit needs at least one generator");
  const auto a = default_exponents(m, exponents);
  double asum = 0.0;
  for (double v : a) asum += v;
  const double H = taper_power_moment(taper, 2.0 * asum);
  double alpha = 0.0;
  std::vector<double> cuts;
  for (const auto& p : psis) {
    if (p.is_zero()) return 0.0;
    alpha += p.pole_exponent();
    const auto b = p.breakpoints();
    cuts.insert(cuts.end(), b.begin(), b.end());
  }
  if (alpha >= 1.0) throw DivergenceError("product of generators is not integrable at 0");
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const double integral = quad::integrate_even(
      [&](double l) {
        double v = 1.0;
        for (const auto& p : psis) v *= p(l);
        return v;
      },
      alpha > 0.0, cuts);
  return std::pow(2.0 * kPi, static_cast<double>(m) - 1.0) * H * integral;
}

double trace_deviation(std::span<const GeneratingFunction> psis, const Taper& taper, std::size_t T,
                       std::span<const double> exponents) {
  const auto a = default_exponents(psis.size(), exponents);
  std::vector<TaperedToeplitzMatrix> mats;
  for (std::size_t i = 0; i < psis.size(); ++i) mats.push_back(build_matrix(psis[i], taper, T, a[i]));
  return std::abs(trace_product(mats) - trace_limit(psis, taper, a));
}

std::vector<double> qf_cumulants(const SpectralModel& f, const GeneratingFunction& g,
                                 const Taper& taper, std::size_t T) {
  if (T > 1024) throw SizeError("qf_cumulant: T exceeds 1024");
  const auto ev = qf_eigenvalues(f, g, taper, T).values;
  std::vector<double> out(4, 0.0);
  for (int k = 1; k <= 4; ++k) {
    double s = 0.0;
    for (double l : ev) s += std::pow(l, k);
    out[static_cast<std::size_t>(k - 1)] = factorial_weight(k) * s;
  }
  return out;
}

double qf_cumulant(const SpectralModel& f, const GeneratingFunction& g, const Taper& taper,
                   std::size_t T, int k) {
  if (k < 1 || k > 4) throw UnsupportedError("qf_cumulant supports k = 1..4");
  return qf_cumulants(f, g, taper, T)[static_cast<std::size_t>(k - 1)];
}

QfDistribution qf_distribution(const SpectralModel& f, const GeneratingFunction& g,
                               const Taper& taper, std::size_t T) {
  if (T > 512) throw SizeError("qf_distribution: T exceeds 512");
  auto path = qf_eigenvalues(f, g, taper, T);
  QfDistribution d;
  d.eigenvalues = std::move(path.values);
  d.symmetric_path = path.symmetric;
  double mx = 0.0;
  for (double l : d.eigenvalues) mx = std::max(mx, std::abs(l));
  for (double l : d.eigenvalues)
    if (std::abs(l) > 1e-12 * mx) ++d.rank;
  return d;
}

double QfDistribution::draw(Engine& engine) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  double acc = 0.0;
  for (double l : eigenvalues) {
    const double z = normal(engine);
    acc += l * z * z;
  }
  return acc;
}

std::vector<double> QfDistribution::sample(std::size_t n, std::uint64_t seed) const {
  Engine engine = make_engine(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = draw(engine);
  return out;
}

double QfDistribution::cumulant(int k) const {
  double s = 0.0;
  for (double l : eigenvalues) s += std::pow(l, k);
  return factorial_weight(k) * s;
}

}  // namespace taperspec
