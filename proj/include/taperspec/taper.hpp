#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace taperspec {

enum class TaperId { rectangular, linear, tukey_hanning, custom };

/// Data taper h on [0, 1] together with its moments H_k = int_0^1 h^k(t) dt.
///
/// Instances are cheap to copy (shared immutable state) and safe to share across
/// threads: the moment cache for k = 1..8 is filled at construction.
class Taper {
 public:
  static constexpr int kCachedMoments = 8;

  static Taper rectangular();
  static Taper linear();          // h(t) = 1 - t
  static Taper tukey_hanning();   // h(t) = 0.5 (1 - cos(pi t))

  /// User-supplied taper. Bounded variation is declared, not verified; nonnegativity
  /// is checked on a 4096-point grid. Throws InvalidTaperError when the check fails
  /// or H_2 = 0.
  static Taper custom(std::function<double(double)> fn, bool bounded_variation,
                      std::string name = "custom");

  /// CLI names: "rect", "linear", "tukey".
  static Taper from_name(std::string_view name);

  TaperId id() const noexcept { return state_->id; }
  const std::string& name() const noexcept { return state_->name; }
  bool declared_bounded_variation() const noexcept { return state_->bounded_variation; }

  /// h(t); zero outside [0, 1].
  double operator()(double t) const;

  /// H_k. Cached for k <= 8, integrated on demand otherwise.
  double moment(int k) const;

  /// e(h) = H_4 / H_2^2.
  double factor() const noexcept { return state_->factor; }

  /// h(t/T) for t = 1..T.
  std::vector<double> weights(std::size_t T) const;

 private:
  struct State {
    TaperId id;
    std::string name;
    std::function<double(double)> fn;
    bool bounded_variation = true;
    std::array<double, kCachedMoments> moments{};
    double factor = 1.0;
  };

  explicit Taper(std::shared_ptr<const State> state) : state_(std::move(state)) {}
  static Taper build(TaperId id, std::string name, std::function<double(double)> fn,
                     bool bounded_variation);

  std::shared_ptr<const State> state_;
};

/// H_k via adaptive Simpson (absolute tolerance 1e-12). k >= 1.
double taper_moment(const Taper& taper, int k);

/// e(h) = H_4 / H_2^2; InvalidTaperError if H_2 = 0.
double tapering_factor(const Taper& taper);

/// Tapered Dirichlet kernel H_{k,T}(lambda) = sum_{t=1}^T h^k(t/T) e^{-i lambda t}.
std::complex<double> dirichlet_kernel(const Taper& taper, int k, std::size_t T, double lambda);

/// Fejer-type kernel
///   F_{k,T}(u) = H_{1,T}(u_1) ... H_{1,T}(u_{k-1}) H_{1,T}(-sum u_j) / ((2 pi)^{k-1} H_{k,T}(0)).
/// Supported arities are k = 2 and k = 3 (u has k - 1 entries). For k = 2 the value is
/// real and nonnegative; for k = 3 it is complex in general.
std::complex<double> fejer_kernel(const Taper& taper, int k, std::size_t T,
                                  std::span<const double> u);

/// Real-valued k = 2 kernel |H_{1,T}(u)|^2 / (2 pi H_{2,T}(0)).
double fejer_kernel2(const Taper& taper, std::size_t T, double u);

/// F_{2,T} evaluated at u_j = -pi + 2 pi j / n, j = 0..n-1, by one FFT. Requires n >= T.
std::vector<double> fejer_kernel2_on_grid(const Taper& taper, std::size_t T, std::size_t n);

}  // namespace taperspec
