#pragma once

// Gamma-family special functions and Meijer-G / Fox-H evaluation by numerical
// Mellin-Barnes contour integration on vertical lines.
//
// Conventions (used consistently by every caller in this project):
//   H^{m,n}_{p,q}(z) = (1/2pi i) Int_L Theta(s) z^{-s} ds
//   Theta(s) = prod_{j<=m} G(b_j + B_j s) * prod_{j<=n} G(1 - a_j - A_j s)
//            / [ prod_{j>m} G(1 - b_j - B_j s) * prod_{j>n} G(a_j + A_j s) ]
// so numerator factors G(c + k*s) with k > 0 contribute "left" pole families
// (descending from -c/k) and factors with k < 0 contribute "right" families.
// The contour is a vertical line separating the two sets.
//
// The multivariate form follows the same rule per variable, with additional
// "outer" gamma factors whose argument couples several integration variables.

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace thz::specfun {

using cplx = std::complex<double>;

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct ContourError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- gamma family ---------------------------------------------------------

// Principal-branch log Gamma. Throws DomainError at the poles 0, -1, -2, ...
cplx log_gamma(cplx z);

// Gamma(z) for real z (non-positive integers are poles).
double gamma_fn(double z);

// Upper incomplete gamma Gamma(a, x), x >= 0; a may be <= 0 when x > 0.
// Series / continued-fraction switch, with downward recurrence for a <= 0.
double upper_gamma(double a, double x);

// log Gamma(a, x); stays finite where Gamma(a,x) itself over/underflows
// (deeply negative a with small x).
double log_upper_gamma(double a, double x);

// Lower incomplete gamma gamma(a, x), a > 0, x >= 0.
double lower_gamma(double a, double x);

// Regularized P(a,x) = gamma(a,x)/Gamma(a), a > 0.
double reg_lower_gamma(double a, double x);

// Modified Bessel function of the second kind, symmetric in nu -> -nu.
double bessel_k(double nu, double x);

// --- Fox H / Meijer G specs ------------------------------------------------

struct GammaPair {
  double shift = 0.0;  // the a_j or b_j offset
  double scale = 1.0;  // the A_j or B_j multiplier (> 0)
};

struct FoxHSpec {
  int m = 0, n = 0, p = 0, q = 0;
  std::vector<GammaPair> upper;  // length p
  std::vector<GammaPair> lower;  // length q
  bool unit_scales() const;
  void validate() const;
};

// Outer factor of a multivariate H: shift plus one scale per variable.
struct MultiOuter {
  double shift = 0.0;
  std::vector<double> scales;
};

struct MultiFoxHSpec {
  int nvars = 1;
  int outer_n = 0;  // leading outer_upper entries in the numerator group
  std::vector<MultiOuter> outer_upper;
  std::vector<MultiOuter> outer_lower;  // denominator group (standard form)
  std::vector<FoxHSpec> blocks;         // one per variable
  void validate() const;
};

struct ContourConfig {
  std::vector<double> shift;     // per-variable override; empty = automatic
  double half_height = 0.0;      // 0 = grow until the tail panel is negligible
  int nodes = 32;                // Gauss-Legendre nodes per panel
  double tolerance = 1e-9;       // relative convergence target
  int max_panels = 4096;
  double empty_side_margin = 0.5;  // distance from the pole set when one side is empty
  bool check_doubling = true;      // re-evaluate with doubled nodes per panel
  int nvars_cap = 4;
  // With an explicit shift, skip the family-separation rule and only verify
  // that no pole lies on the line. Needed for analytic-continuation contours
  // that deliberately thread between members of one pole family.
  bool trust_shift = false;
};

struct ContourDiagnostics {
  std::vector<double> shift;
  double half_height = 0.0;
  long nodes = 0;
  double imag_residual = 0.0;      // |Im total| / |total|
  double doubling_delta = 0.0;     // relative change under node doubling
  double log10_cancellation = 0.0; // peak integrand magnitude over result
  bool converged = true;
  // The value is below the double-precision noise floor of the integrand
  // scale; it is certifiably negligible but carries no relative accuracy.
  bool at_noise_floor = false;
};

// --- generic gamma-product integrand (internal workhorse) ------------------

struct GammaFactor {
  double shift = 0.0;
  std::vector<double> coeffs;  // one per variable
  bool numerator = true;
};

struct MellinIntegrand {
  int nvars = 1;
  std::vector<GammaFactor> factors;
};

// (1/2pi i)^n contour integral of prod Gamma(shift + c.s)^{+-1} prod z_i^{-s_i}.
// Returns the (asserted real) value. Contour shifts are chosen automatically
// unless provided in cfg; pole separation violations throw ContourError.
double mellin_barnes(const MellinIntegrand& ig, const std::vector<double>& z,
                     const ContourConfig& cfg = {},
                     ContourDiagnostics* diag = nullptr);

// --- public evaluators ------------------------------------------------------

double meijer_g(const FoxHSpec& spec, double x, const ContourConfig& cfg = {},
                ContourDiagnostics* diag = nullptr);

double fox_h(const FoxHSpec& spec, double x, const ContourConfig& cfg = {},
             ContourDiagnostics* diag = nullptr);

double fox_h_bivariate(const MultiFoxHSpec& spec, double x1, double x2,
                       const ContourConfig& cfg = {},
                       ContourDiagnostics* diag = nullptr);

double fox_h_multivariate(const MultiFoxHSpec& spec,
                          const std::vector<double>& xs,
                          const ContourConfig& cfg = {},
                          ContourDiagnostics* diag = nullptr);

// Converts a FoxHSpec (plus outer factors) to the internal integrand form.
MellinIntegrand to_integrand(const MultiFoxHSpec& spec);

}  // namespace thz::specfun
