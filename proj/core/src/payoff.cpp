#include "qerisk/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qerisk/error.hpp"
#include "qerisk/market_model.hpp"

namespace qerisk {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Raw moments E[X^r], r = 0..4, from the first four cumulants.
std::array<double, 5> raw_moments(const std::array<double, 4>& k) {
  const double k1 = k[0], k2 = k[1], k3 = k[2], k4 = k[3];
  return {1.0, k1, k2 + k1 * k1, k3 + 3.0 * k2 * k1 + k1 * k1 * k1,
          k4 + 4.0 * k3 * k1 + 3.0 * k2 * k2 + 6.0 * k2 * k1 * k1 + k1 * k1 * k1 * k1};
}

}  // namespace

Payoff Payoff::affine(double a, double b) {
  require(std::isfinite(a) && std::isfinite(b), "affine payoff coefficients must be finite");
  return Payoff(Affine{a, b});
}

Payoff Payoff::exp_affine(double a, double b) {
  require(std::isfinite(a) && std::isfinite(b), "exp-affine payoff coefficients must be finite");
  return Payoff(ExpAffine{a, b});
}

Payoff Payoff::polynomial(std::vector<double> coefficients) {
  require(!coefficients.empty() && coefficients.size() <= 5,
          "polynomial payoff takes 1 to 5 coefficients (degree <= 4)");
  for (double c : coefficients) require(std::isfinite(c), "polynomial coefficients must be finite");
  return Payoff(Polynomial{std::move(coefficients)});
}

Payoff Payoff::clipped(Payoff inner, double lo, double hi) {
  require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi, "clip bounds must satisfy lo <= hi");
  return Payoff(Clip{std::make_shared<const Payoff>(std::move(inner)), lo, hi});
}

Payoff Payoff::portfolio(std::vector<Payoff> parts) {
  require(!parts.empty(), "portfolio payoff needs at least one part");
  return Payoff(Sum{std::move(parts)});
}

Payoff Payoff::custom(std::function<double(double)> fn, std::string name) {
  require(static_cast<bool>(fn), "custom payoff needs a callable");
  return Payoff(Custom{std::move(fn), std::move(name)});
}

double Payoff::operator()(double x) const {
  return std::visit(
      overloaded{
          [x](const Affine& p) { return p.a + p.b * x; },
          [x](const ExpAffine& p) { return p.a * std::exp(p.b * x); },
          [x](const Polynomial& p) {
            double acc = 0.0;
            for (auto it = p.coefficients.rbegin(); it != p.coefficients.rend(); ++it) {
              acc = acc * x + *it;
            }
            return acc;
          },
          [x](const Clip& p) { return std::clamp((*p.inner)(x), p.lo, p.hi); },
          [x](const Sum& p) {
            double acc = 0.0;
            for (const auto& part : p.parts) acc += part(x);
            return acc;
          },
          [x](const Custom& p) { return p.fn(x); },
      },
      repr_);
}

double Payoff::derivative(double x) const {
  return std::visit(
      overloaded{
          [](const Affine& p) { return p.b; },
          [x](const ExpAffine& p) { return p.a * p.b * std::exp(p.b * x); },
          [x](const Polynomial& p) {
            double acc = 0.0;
            for (std::size_t k = p.coefficients.size(); k-- > 1;) {
              acc = acc * x + static_cast<double>(k) * p.coefficients[k];
            }
            return acc;
          },
          [x](const Clip& p) {
            const double v = (*p.inner)(x);
            return (v > p.lo && v < p.hi) ? p.inner->derivative(x) : 0.0;
          },
          [x](const Sum& p) {
            double acc = 0.0;
            for (const auto& part : p.parts) acc += part.derivative(x);
            return acc;
          },
          [](const Custom& p) -> double {
            fail(ErrorCode::UnsupportedPayoff,
                 "payoff '" + p.name + "' is outside the differentiable family");
          },
      },
      repr_);
}

std::optional<double> Payoff::expectation(const LevyModel& model, double horizon) const {
  const auto kappa = model.terminal_cumulants(horizon);
  return std::visit(
      overloaded{
          [&](const Affine& p) -> std::optional<double> { return p.a + p.b * kappa[0]; },
          [&](const ExpAffine& p) -> std::optional<double> {
            double log_mgf = p.b * (model.x0 + model.mu * horizon) +
                             0.5 * p.b * p.b * model.sigma * model.sigma * horizon;
            for (const auto& j : model.jumps) {
              log_mgf += j.intensity * horizon * std::expm1(p.b * j.size);
            }
            return p.a * std::exp(log_mgf);
          },
          [&](const Polynomial& p) -> std::optional<double> {
            const auto mom = raw_moments(kappa);
            double acc = 0.0;
            for (std::size_t r = 0; r < p.coefficients.size(); ++r) acc += p.coefficients[r] * mom[r];
            return acc;
          },
          [](const Clip&) -> std::optional<double> { return std::nullopt; },
          [&](const Sum& p) -> std::optional<double> {
            double acc = 0.0;
            for (const auto& part : p.parts) {
              const auto e = part.expectation(model, horizon);
              if (!e) return std::nullopt;
              acc += *e;
            }
            return acc;
          },
          [](const Custom&) -> std::optional<double> { return std::nullopt; },
      },
      repr_);
}

bool Payoff::is_bounded() const noexcept {
  return std::visit(overloaded{
                        [](const Affine& p) { return p.b == 0.0; },
                        [](const ExpAffine& p) { return p.a == 0.0 || p.b == 0.0; },
                        [](const Polynomial& p) {
                          return std::all_of(p.coefficients.begin() + 1, p.coefficients.end(),
                                             [](double c) { return c == 0.0; });
                        },
                        [](const Clip&) { return true; },
                        [](const Sum& p) {
                          return std::all_of(p.parts.begin(), p.parts.end(),
                                             [](const Payoff& q) { return q.is_bounded(); });
                        },
                        [](const Custom&) { return false; },
                    },
                    repr_);
}

bool Payoff::is_differentiable() const noexcept {
  return std::visit(overloaded{
                        [](const Clip& p) { return p.inner->is_differentiable(); },
                        [](const Sum& p) {
                          return std::all_of(p.parts.begin(), p.parts.end(), [](const Payoff& q) {
                            return q.is_differentiable();
                          });
                        },
                        [](const Custom&) { return false; },
                        [](const auto&) { return true; },
                    },
                    repr_);
}

std::optional<std::vector<double>> Payoff::polynomial_form() const {
  using Coeffs = std::optional<std::vector<double>>;
  return std::visit(overloaded{
                        [](const Affine& p) -> Coeffs { return std::vector<double>{p.a, p.b, 0, 0, 0}; },
                        [](const Polynomial& p) -> Coeffs {
                          std::vector<double> c(5, 0.0);
                          std::copy(p.coefficients.begin(), p.coefficients.end(), c.begin());
                          return c;
                        },
                        [](const ExpAffine& p) -> Coeffs {
                          if (p.a == 0.0 || p.b == 0.0) return std::vector<double>{p.a, 0, 0, 0, 0};
                          return std::nullopt;
                        },
                        [](const Sum& p) -> Coeffs {
                          std::vector<double> c(5, 0.0);
                          for (const auto& part : p.parts) {
                            const auto pc = part.polynomial_form();
                            if (!pc) return std::nullopt;
                            for (std::size_t r = 0; r < 5; ++r) c[r] += (*pc)[r];
                          }
                          return c;
                        },
                        [](const auto&) -> Coeffs { return std::nullopt; },
                    },
                    repr_);
}

const std::vector<Payoff>& Payoff::decomposition() const noexcept {
  static const std::vector<Payoff> none;
  if (const auto* sum = std::get_if<Sum>(&repr_)) return sum->parts;
  return none;
}

std::string Payoff::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Affine& p) { os << p.a << " + " << p.b << " x"; },
                 [&](const ExpAffine& p) { os << p.a << " exp(" << p.b << " x)"; },
                 [&](const Polynomial& p) {
                   os << "poly(";
                   for (std::size_t r = 0; r < p.coefficients.size(); ++r) {
                     os << (r ? ", " : "") << p.coefficients[r];
                   }
                   os << ")";
                 },
                 [&](const Clip& p) {
                   os << "clip(" << p.inner->describe() << ", " << p.lo << ", " << p.hi << ")";
                 },
                 [&](const Sum& p) {
                   os << "sum[";
                   for (std::size_t r = 0; r < p.parts.size(); ++r) {
                     os << (r ? "; " : "") << p.parts[r].describe();
                   }
                   os << "]";
                 },
                 [&](const Custom& p) { os << p.name; },
             },
             repr_);
  return os.str();
}

bool decomposition_matches(const Payoff& declared, const std::vector<Payoff>& parts,
                           double tolerance) {
  if (parts.empty()) return false;
  const Payoff sum = Payoff::portfolio(parts);
  const auto lhs = declared.polynomial_form();
  const auto rhs = sum.polynomial_form();
  if (lhs && rhs) {
    for (std::size_t r = 0; r < 5; ++r) {
      if (std::abs((*lhs)[r] - (*rhs)[r]) > tolerance * (1.0 + std::abs((*lhs)[r]))) return false;
    }
    return true;
  }
  for (int i = 0; i <= 100; ++i) {
    const double x = -5.0 + 0.1 * i;
    const double a = declared(x);
    if (std::abs(a - sum(x)) > tolerance * (1.0 + std::abs(a))) return false;
  }
  return true;
}

}  // namespace qerisk
