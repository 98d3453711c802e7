#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qerisk {

enum class DriverFamily { QuadraticExponential, Entropic, Sublinear };

/// l(z, u) = offset + z_coef z + sum_k jump_coef_k u_k lambda_k.
struct LinearForm {
  double offset = 0.0;
  double z_coef = 0.0;
  std::vector<double> jump_coefs;
};

/// Which jump term the entropic family evaluates. Canonical is the
/// quadratic-exponential generator at alpha = gamma; Literal reproduces the
/// (1/gamma) sum lambda (e^u - gamma u - 1) variant for comparison only.
enum class EntropicForm { Canonical, Literal };

/// Deterministic, y-independent BSDE generator g(z, u) over K jump marks.
///
/// Jump partials follow the per-mark density convention: jump_partials()[k]
/// is the derivative of the nu-integrand at mark k, i.e. (dg/du_k) / lambda_k.
/// For the quadratic-exponential family that is e^{alpha u_k} - 1, which is
/// the jump integrand of the measure-change exponential.
class Driver {
 public:
  DriverFamily family() const noexcept { return family_; }
  std::size_t mark_count() const noexcept { return intensities_.size(); }
  std::span<const double> intensities() const noexcept { return intensities_; }

  double value(double z, std::span<const double> u) const;
  double dz(double z, std::span<const double> u) const;
  void jump_partials(double z, std::span<const double> u, std::span<double> out) const;

  bool convex_in_controls() const noexcept { return true; }
  bool positively_homogeneous() const noexcept { return family_ == DriverFamily::Sublinear; }
  bool independent_of_y() const noexcept { return true; }

  /// alpha for quadratic-exponential drivers, gamma for entropic ones, 0 otherwise.
  double alpha() const noexcept { return alpha_; }
  EntropicForm entropic_form() const noexcept { return form_; }
  const LinearForm& linear_part() const noexcept { return linear_; }
  const std::vector<LinearForm>& forms() const noexcept { return forms_; }

  friend Driver make_qexp_driver(double, LinearForm, std::vector<double>);
  friend Driver make_entropic_driver(double, std::vector<double>, EntropicForm);
  friend Driver make_sublinear_driver(std::vector<LinearForm>, std::vector<double>);

 private:
  Driver() = default;
  std::size_t argmax_form(double z, std::span<const double> u) const;
  double linear_value(const LinearForm& form, double z, std::span<const double> u) const;

  DriverFamily family_ = DriverFamily::QuadraticExponential;
  EntropicForm form_ = EntropicForm::Canonical;
  double alpha_ = 0.0;
  LinearForm linear_;
  std::vector<LinearForm> forms_;
  std::vector<double> intensities_;
};

/// g = l(z,u) + alpha/2 z^2 + (1/alpha) sum_k lambda_k (e^{alpha u_k} - 1 - alpha u_k).
Driver make_qexp_driver(double alpha, LinearForm ell, std::vector<double> intensities);
/// Entropic generator; the canonical form equals the qexp driver at alpha = gamma, l = 0.
Driver make_entropic_driver(double gamma, std::vector<double> intensities,
                            EntropicForm form = EntropicForm::Canonical);
/// g = max_j (a_j z + sum_k b_jk u_k lambda_k). Forms carry no offset; every
/// b_jk must exceed -1. Ties resolve to the lowest index.
Driver make_sublinear_driver(std::vector<LinearForm> forms, std::vector<double> intensities);
/// g == 0 (a single zero form).
Driver make_zero_driver(std::vector<double> intensities);

// --- sampled validators ---------------------------------------------------

/// Symmetric sampling box |y| <= y, |z| <= z, |u_k| <= u.
struct SampleBox {
  double y = 1.0;
  double z = 2.0;
  double u = 2.0;
};

struct GrowthBound {
  double alpha = 1.0;
  double beta = 0.0;
  double ell = 0.0;
};

struct GrowthReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;  // min over samples of the slack to the nearer bound
};

/// Counts samples violating
/// -l - b|y| - a/2 z^2 - sum j_a(-u_k) lambda_k <= g <= l + b|y| + a/2 z^2 + sum j_a(u_k) lambda_k,
/// with j_a(u) = e^{a u} - 1 - a u.
GrowthReport check_growth_bound(const Driver& driver, const GrowthBound& bound,
                                const SampleBox& box, std::size_t samples,
                                std::uint64_t seed = 1);

struct ControlPoint {
  double y = 0.0;
  double z = 0.0;
  std::vector<double> u;
};

struct LipschitzReport {
  /// Smallest K_M consistent with the local-Lipschitz inequality on all pairs:
  /// |dg| <= K (|dy| + |du|_2) + K (1 + |z| + |z'| + |u|_2 + |u'|_2) |dz|.
  double k_estimate = 0.0;
  /// Unweighted ratio |dg| / (|dy| + |dz| + |du|_2); grows with the z range
  /// for quadratic drivers.
  double plain_ratio = 0.0;
  bool blow_up = false;
  ControlPoint witness_a;
  ControlPoint witness_b;
};

/// |y|, |u_k| are confined to `bound`; z ranges over [-box.z, box.z].
/// |u|_2 denotes the L^2(nu) norm sqrt(sum_k lambda_k u_k^2).
LipschitzReport check_local_lipschitz(const Driver& driver, double bound, const SampleBox& box,
                                      std::size_t pairs, std::uint64_t seed = 2);

struct HomogeneityResidual {
  double scale = 1.0;
  double max_residual = 0.0;
};

struct HomogeneityReport {
  std::vector<HomogeneityResidual> residuals;
  bool pass = false;  // every residual <= 1e-12
};

HomogeneityReport check_positive_homogeneity(const Driver& driver, const SampleBox& box,
                                             std::span<const double> scales,
                                             std::size_t samples, std::uint64_t seed = 3);

}  // namespace qerisk
