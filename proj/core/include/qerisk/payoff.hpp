#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qerisk {

struct LevyModel;

/// Terminal functional xi = f(X(T)) from a closed family.
class Payoff {
 public:
  struct Affine {
    double a, b;  // a + b x
  };
  struct ExpAffine {
    double a, b;  // a exp(b x)
  };
  struct Polynomial {
    std::vector<double> coefficients;  // c_0 + c_1 x + ... + c_4 x^4
  };
  struct Clip {
    std::shared_ptr<const Payoff> inner;
    double lo, hi;
  };
  struct Sum {
    std::vector<Payoff> parts;
  };
  struct Custom {
    std::function<double(double)> fn;
    std::string name;
  };

  static Payoff affine(double a, double b);
  static Payoff exp_affine(double a, double b);
  static Payoff polynomial(std::vector<double> coefficients);
  static Payoff clipped(Payoff inner, double lo, double hi);
  /// Portfolio defined as the sum of its parts. Evaluation adds the parts in
  /// order, so sum_i eta_i(x) == xi(x) holds bit for bit.
  static Payoff portfolio(std::vector<Payoff> parts);
  /// Arbitrary functional; not differentiable and without analytic moments.
  static Payoff custom(std::function<double(double)> fn, std::string name);

  double operator()(double x) const;
  /// f'(x); clip uses the a.e. derivative (0 outside the open band).
  double derivative(double x) const;

  /// E[f(X(T))] under the model when the family admits a closed form.
  std::optional<double> expectation(const LevyModel& model, double horizon) const;

  bool is_bounded() const noexcept;
  bool is_differentiable() const noexcept;
  /// Coefficients c_0..c_4 when f is a polynomial (affine, polynomial, sums).
  std::optional<std::vector<double>> polynomial_form() const;
  /// Parts of a portfolio payoff; empty for single payoffs.
  const std::vector<Payoff>& decomposition() const noexcept;
  std::string describe() const;

 private:
  using Repr = std::variant<Affine, ExpAffine, Polynomial, Clip, Sum, Custom>;
  explicit Payoff(Repr repr) : repr_(std::move(repr)) {}

  Repr repr_;
};

/// True when the declared payoff equals the sum of the parts symbolically
/// (coefficient match for polynomials, probe evaluation otherwise).
bool decomposition_matches(const Payoff& declared, const std::vector<Payoff>& parts,
                           double tolerance = 1e-12);

}  // namespace qerisk
