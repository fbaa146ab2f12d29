#pragma once

// Channel and link-budget layer: per-hop fading/pointing constants for the
// combined density f(x) = A x^{phi-1} Gamma(B, C x^alpha), the shadowed
// access-link statistics, path gain and average SNR.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "thz/specfun.hpp"

namespace thz::channel {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kDbPerNeper = 8.686;

struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// One backhaul hop. phi = +infinity disables pointing errors (s_cap is then
// forced to 1); this limit is exercised by tests against classic fading.
struct ThzHop {
  double alpha = 2.0;
  double mu = 1.0;
  double omega = 1.0;  // alpha-root-mean envelope
  double phi = std::numeric_limits<double>::infinity();
  double s_cap = 1.0;  // collected-power fraction at perfect alignment
  double dist_m = 1.0;
  double k_abs = 0.0;  // molecular absorption coefficient, 1/m
  double gt_dbi = 0.0;
  double gr_dbi = 0.0;

  bool has_pointing() const { return std::isfinite(phi); }
  // derived constants of the combined fading+pointing density
  double big_a_log() const;  // log A (A overflows for large phi)
  double big_b() const { return mu - phi / alpha; }
  double big_c() const {
    return has_pointing() ? mu / std::pow(omega, alpha) * std::pow(s_cap, -alpha)
                          : mu / std::pow(omega, alpha);
  }
  bool pointing_dominated() const { return has_pointing() && big_b() < 0.0; }
  void validate() const;
};

struct PointingGeometry {
  double aperture_r_m = 0.1;
  double beam_w_m = 0.6;
  double jitter_sigma_m = 0.05;
  void validate() const;
};

struct PointingParams {
  double s_cap = 1.0;
  double phi = 1.0;
};

// Generalized-K shadowed access channel with its own pointing pair.
struct AccessLink {
  double m_g = 1.0;      // small-scale shape
  double sigma_db = 2.0; // shadowing spread, dB
  double phi_a = 14.5;
  double s_a = 0.054;
  double d_a = 20.0;
  double k_a = 0.0;
  double g_a_dbi = 10.0;
  double p_a = 1.0;      // transmit power, W (enters b_coefficient only)
  double eta = 2.0;      // path-loss exponent
  double b_override = 0.0;  // > 0 replaces the shape-normalized b below

  double sigma_n() const { return sigma_db / kDbPerNeper; }
  double m_omega() const;
  double m_a() const { return m_omega() + m_g; }
  double m_m() const { return m_omega() - m_g; }
  // Shape-normalized b: sqrt(m_omega m_g / exp(sigma_n^2/2)). The full
  // link-budget form lives in b_coefficient(); scenarios carry the budget in
  // gamma0 and use this normalization so that analytics and the sampler share
  // one distribution.
  double b_shape() const;
  double b() const { return b_override > 0.0 ? b_override : b_shape(); }
  void validate() const;
};

struct LinkBudget {
  double ptx_dbm = 30.0;
  double noise_psd_dbm_hz = -174.0;
  double bandwidth_hz = 10e9;
  double noise_figure_db = 5.0;
  double carrier_hz = 300e9;

  double noise_power_dbm() const {
    return noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
  }
  void validate() const;
};

// (delta, p, {q_n}, k) quadruple of the unified BER expression.
struct Modulation {
  double delta = 1.0;
  double p = 1.0;
  std::vector<double> q_list{1.0};
  int k() const { return static_cast<int>(q_list.size()); }
  void validate() const;

  static Modulation dbpsk() { return {1.0, 1.0, {1.0}}; }
  static Modulation bpsk() { return {1.0, 0.5, {1.0}}; }
  static Modulation qam16() { return {0.75, 0.5, {0.1, 0.9}}; }
  static Modulation by_name(const std::string& name);
};

// --- operations -------------------------------------------------------------

// Gamma-shadowing shape from the dB spread: 1/(exp(sigma_n^2)-1).
double m_omega(double sigma_db);

// Linear amplitude path gain, including molecular absorption.
double path_gain(const ThzHop& hop, double carrier_hz);

// Average SNR (linear) of one hop under a link budget.
double avg_snr(const ThzHop& hop, const LinkBudget& budget);

// (S, phi) from aperture/beam/jitter geometry.
PointingParams pointing_params(const PointingGeometry& geom);

// Access-link b including antenna gain, power, absorption and the eta-power
// free-space term.
double b_coefficient(const AccessLink& link, double carrier_hz);

// Per-hop SNR density/distribution (closed incomplete-gamma forms).
double hop_snr_pdf(const ThzHop& hop, double gamma0, double gamma);
double hop_snr_cdf(const ThzHop& hop, double gamma0, double gamma);

// Same density via the Meijer-G route; used to cross-check the closed form.
double hop_snr_pdf_meijer(const ThzHop& hop, double gamma0, double gamma);

// E[gamma^rho] for one hop.
double hop_snr_moment(const ThzHop& hop, double gamma0, double rho);

// Shadowed access link SNR statistics (generalized-K combined with pointing).
double access_snr_pdf(const AccessLink& link, double gamma0, double gamma);
double access_snr_cdf(const AccessLink& link, double gamma0, double gamma);

// Meijer-G parameter blocks behind the two functions above (shared with the
// analytic module, which reuses them inside larger contour integrands).
specfun::FoxHSpec access_pdf_spec(const AccessLink& link);
specfun::FoxHSpec access_cdf_spec(const AccessLink& link);
double access_pdf_prefactor(const AccessLink& link);  // before the G value
double access_arg_scale(const AccessLink& link, double gamma0);  // kappa

}  // namespace thz::channel
