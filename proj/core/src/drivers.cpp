#include "qerisk/drivers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qerisk/error.hpp"
#include "qerisk/random.hpp"

namespace qerisk {
namespace {

void normalise_form(LinearForm& form, std::size_t marks) {
  if (form.jump_coefs.empty()) form.jump_coefs.assign(marks, 0.0);
  require(form.jump_coefs.size() == marks,
          "linear form has " + std::to_string(form.jump_coefs.size()) +
              " jump coefficients for " + std::to_string(marks) + " marks");
  require(std::isfinite(form.offset) && std::isfinite(form.z_coef), "linear form must be finite");
  for (double b : form.jump_coefs) require(std::isfinite(b), "linear form must be finite");
}

void check_intensities(const std::vector<double>& intensities) {
  for (double l : intensities) {
    require(std::isfinite(l) && l > 0.0, "driver intensities must be positive");
  }
}

// j_a(u) = e^{a u} - 1 - a u
double j_alpha(double a, double u) { return std::expm1(a * u) - a * u; }

double l2_nu(std::span<const double> u, std::span<const double> lambda) {
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) acc += lambda[k] * u[k] * u[k];
  return std::sqrt(acc);
}

}  // namespace

double Driver::linear_value(const LinearForm& form, double z, std::span<const double> u) const {
  double acc = form.offset + form.z_coef * z;
  for (std::size_t k = 0; k < u.size(); ++k) acc += form.jump_coefs[k] * u[k] * intensities_[k];
  return acc;
}

std::size_t Driver::argmax_form(double z, std::span<const double> u) const {
  std::size_t best = 0;
  double best_value = linear_value(forms_[0], z, u);
  for (std::size_t j = 1; j < forms_.size(); ++j) {
    const double v = linear_value(forms_[j], z, u);
    if (v > best_value) {
      best = j;
      best_value = v;
    }
  }
  return best;
}

double Driver::value(double z, std::span<const double> u) const {
  if (family_ == DriverFamily::Sublinear) return linear_value(forms_[argmax_form(z, u)], z, u);
  const double a = alpha_;
  double acc = linear_value(linear_, z, u) + 0.5 * a * z * z;
  double jumps = 0.0;
  if (form_ == EntropicForm::Literal) {
    for (std::size_t k = 0; k < u.size(); ++k) {
      jumps += intensities_[k] * (std::expm1(u[k]) - a * u[k]);
    }
  } else {
    for (std::size_t k = 0; k < u.size(); ++k) jumps += intensities_[k] * j_alpha(a, u[k]);
  }
  return acc + jumps / a;
}

double Driver::dz(double z, std::span<const double> u) const {
  if (family_ == DriverFamily::Sublinear) return forms_[argmax_form(z, u)].z_coef;
  return linear_.z_coef + alpha_ * z;
}

void Driver::jump_partials(double z, std::span<const double> u, std::span<double> out) const {
  if (family_ == DriverFamily::Sublinear) {
    const auto& form = forms_[argmax_form(z, u)];
    std::copy(form.jump_coefs.begin(), form.jump_coefs.end(), out.begin());
    return;
  }
  for (std::size_t k = 0; k < u.size(); ++k) {
    out[k] = linear_.jump_coefs[k] + (form_ == EntropicForm::Literal
                                          ? std::exp(u[k]) / alpha_ - 1.0
                                          : std::expm1(alpha_ * u[k]));
  }
}

Driver make_qexp_driver(double alpha, LinearForm ell, std::vector<double> intensities) {
  require(std::isfinite(alpha) && alpha > 0.0, "qexp driver needs alpha > 0");
  check_intensities(intensities);
  normalise_form(ell, intensities.size());
  Driver d;
  d.family_ = DriverFamily::QuadraticExponential;
  d.alpha_ = alpha;
  d.linear_ = std::move(ell);
  d.intensities_ = std::move(intensities);
  return d;
}

Driver make_entropic_driver(double gamma, std::vector<double> intensities, EntropicForm form) {
  require(std::isfinite(gamma) && gamma > 0.0, "entropic driver needs gamma > 0");
  check_intensities(intensities);
  Driver d;
  d.family_ = DriverFamily::Entropic;
  d.form_ = form;
  d.alpha_ = gamma;
  d.linear_.jump_coefs.assign(intensities.size(), 0.0);
  d.intensities_ = std::move(intensities);
  return d;
}

Driver make_sublinear_driver(std::vector<LinearForm> forms, std::vector<double> intensities) {
  require(!forms.empty(), "sublinear driver needs at least one linear form");
  check_intensities(intensities);
  for (auto& form : forms) {
    normalise_form(form, intensities.size());
    require(form.offset == 0.0, "sublinear forms carry no constant term");
    for (double b : form.jump_coefs) {
      require(b > -1.0, "sublinear jump coefficients must exceed -1");
    }
  }
  Driver d;
  d.family_ = DriverFamily::Sublinear;
  d.forms_ = std::move(forms);
  d.linear_.jump_coefs.assign(intensities.size(), 0.0);
  d.intensities_ = std::move(intensities);
  return d;
}

Driver make_zero_driver(std::vector<double> intensities) {
  return make_sublinear_driver({LinearForm{}}, std::move(intensities));
}

GrowthReport check_growth_bound(const Driver& driver, const GrowthBound& bound,
                                const SampleBox& box, std::size_t samples, std::uint64_t seed) {
  CounterStream rng(seed, 101);
  const auto lambda = driver.intensities();
  std::vector<double> u(driver.mark_count());
  GrowthReport report;
  report.samples = samples;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    const double y = rng.uniform(-box.y, box.y);
    const double z = rng.uniform(-box.z, box.z);
    for (auto& uk : u) uk = rng.uniform(-box.u, box.u);
    const double g = driver.value(z, u);
    double up = bound.ell + bound.beta * std::abs(y) + 0.5 * bound.alpha * z * z;
    double down = -bound.ell - bound.beta * std::abs(y) - 0.5 * bound.alpha * z * z;
    for (std::size_t k = 0; k < u.size(); ++k) {
      up += j_alpha(bound.alpha, u[k]) * lambda[k];
      down -= j_alpha(bound.alpha, -u[k]) * lambda[k];
    }
    const double tol = 1e-12 * (1.0 + std::abs(g));
    if (g > up + tol || g < down - tol) ++report.violations;
    report.worst_margin = std::min({report.worst_margin, up - g, g - down});
  }
  return report;
}

LipschitzReport check_local_lipschitz(const Driver& driver, double bound, const SampleBox& box,
                                      std::size_t pairs, std::uint64_t seed) {
  CounterStream rng(seed, 202);
  const auto lambda = driver.intensities();
  const std::size_t marks = driver.mark_count();
  LipschitzReport report;

  auto draw = [&] {
    ControlPoint p;
    p.y = rng.uniform(-bound, bound);
    p.z = rng.uniform(-box.z, box.z);
    p.u.resize(marks);
    for (auto& uk : p.u) uk = rng.uniform(-bound, bound);
    return p;
  };

  for (std::size_t s = 0; s < pairs; ++s) {
    ControlPoint a = draw();
    ControlPoint b;
    if (s % 2 == 0) {
      b = draw();
    } else {
      // Move one coordinate only, staying inside the box.
      b = a;
      const auto axis = static_cast<std::size_t>(rng.uniform() * static_cast<double>(2 + marks));
      const double frac = rng.uniform(-0.1, 0.1);
      if (axis == 0) {
        b.y = std::clamp(a.y + frac * bound, -bound, bound);
      } else if (axis == 1) {
        b.z = std::clamp(a.z + frac * box.z, -box.z, box.z);
      } else {
        auto& uk = b.u[std::min(axis - 2, marks - 1)];
        uk = std::clamp(uk + frac * bound, -bound, bound);
      }
    }
    const double dg = std::abs(driver.value(a.z, a.u) - driver.value(b.z, b.u));
    std::vector<double> du(marks);
    for (std::size_t k = 0; k < marks; ++k) du[k] = a.u[k] - b.u[k];
    const double du2 = l2_nu(du, lambda);
    const double dz = std::abs(a.z - b.z);
    const double weight = 1.0 + std::abs(a.z) + std::abs(b.z) + l2_nu(a.u, lambda) +
                          l2_nu(b.u, lambda);
    const double normalised = std::abs(a.y - b.y) + du2 + weight * dz;
    const double plain = std::abs(a.y - b.y) + du2 + dz;
    if (!std::isfinite(dg)) {
      report.blow_up = true;
      continue;
    }
    if (normalised > 0.0) {
      const double ratio = dg / normalised;
      if (ratio > report.k_estimate) {
        report.k_estimate = ratio;
        report.witness_a = a;
        report.witness_b = b;
      }
    }
    if (plain > 0.0) report.plain_ratio = std::max(report.plain_ratio, dg / plain);
  }
  return report;
}

HomogeneityReport check_positive_homogeneity(const Driver& driver, const SampleBox& box,
                                             std::span<const double> scales,
                                             std::size_t samples, std::uint64_t seed) {
  CounterStream rng(seed, 303);
  const std::size_t marks = driver.mark_count();
  HomogeneityReport report;
  report.pass = true;
  std::vector<double> u(marks), cu(marks);
  for (double c : scales) {
    HomogeneityResidual r{c, 0.0};
    for (std::size_t s = 0; s < samples; ++s) {
      const double z = rng.uniform(-box.z, box.z);
      for (std::size_t k = 0; k < marks; ++k) {
        u[k] = rng.uniform(-box.u, box.u);
        cu[k] = c * u[k];
      }
      r.max_residual =
          std::max(r.max_residual, std::abs(driver.value(c * z, cu) - c * driver.value(z, u)));
    }
    report.pass = report.pass && r.max_residual <= 1e-12;
    report.residuals.push_back(r);
  }
  return report;
}

}  // namespace qerisk
