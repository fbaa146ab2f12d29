#include "thz/channel.hpp"

#include <algorithm>
#include <cmath>

namespace thz::channel {

using specfun::FoxHSpec;

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace

double ThzHop::big_a_log() const {
  // A = phi S^{-phi} mu^{phi/alpha} / (omega^phi Gamma(mu))
  return std::log(phi) - phi * std::log(s_cap) +
         (phi / alpha) * std::log(mu) - phi * std::log(omega) -
         std::lgamma(mu);
}

void ThzHop::validate() const {
  require(alpha > 0.0, "hop: alpha must be > 0");
  require(mu > 0.0, "hop: mu must be > 0");
  require(omega > 0.0, "hop: omega must be > 0");
  require(phi > 0.0, "hop: phi must be > 0");
  require(s_cap > 0.0 && s_cap <= 1.0, "hop: s_cap must lie in (0, 1]");
  require(dist_m > 0.0, "hop: dist_m must be > 0");
  require(k_abs >= 0.0, "hop: k_abs must be >= 0");
  if (!has_pointing())
    require(s_cap == 1.0, "hop: s_cap must be 1 when pointing is disabled");
}

void PointingGeometry::validate() const {
  require(aperture_r_m > 0.0, "pointing: aperture radius must be > 0");
  require(beam_w_m > 0.0, "pointing: beam width must be > 0");
  require(jitter_sigma_m > 0.0, "pointing: jitter sigma must be > 0");
}

double AccessLink::m_omega() const { return channel::m_omega(sigma_db); }

double AccessLink::b_shape() const {
  double sn = sigma_n();
  return std::sqrt(m_omega() * m_g * std::exp(-0.5 * sn * sn));
}

void AccessLink::validate() const {
  require(m_g > 0.0, "access: m_g must be > 0");
  require(sigma_db > 0.0, "access: sigma_db must be > 0");
  require(phi_a > 0.0, "access: phi_a must be > 0");
  require(s_a > 0.0 && s_a <= 1.0, "access: s_a must lie in (0, 1]");
  require(d_a > 0.0, "access: d_a must be > 0");
  require(k_a >= 0.0, "access: k_a must be >= 0");
  require(eta > 0.0, "access: eta must be > 0");
  require(p_a > 0.0, "access: p_a must be > 0");
  require(b() > 0.0, "access: b must be > 0");
}

void LinkBudget::validate() const {
  require(bandwidth_hz > 0.0, "budget: bandwidth must be > 0");
  require(carrier_hz > 0.0, "budget: carrier must be > 0");
}

void Modulation::validate() const {
  require(delta > 0.0, "modulation: delta must be > 0");
  require(p > 0.0, "modulation: p must be > 0");
  require(!q_list.empty(), "modulation: q list must be non-empty");
  for (double q : q_list) require(q > 0.0, "modulation: q_n must be > 0");
}

Modulation Modulation::by_name(const std::string& name) {
  if (name == "dbpsk") return dbpsk();
  if (name == "bpsk") return bpsk();
  if (name == "16qam") return qam16();
  throw ValidationError("modulation: unknown name '" + name + "'");
}

double m_omega(double sigma_db) {
  if (!(sigma_db > 0.0)) throw ValidationError("m_omega: sigma_db must be > 0");
  double sn = sigma_db / kDbPerNeper;
  return 1.0 / std::expm1(sn * sn);
}

double path_gain(const ThzHop& hop, double carrier_hz) {
  hop.validate();
  require(carrier_hz > 0.0, "path_gain: carrier must be > 0");
  double amp_gain = std::pow(10.0, (hop.gt_dbi + hop.gr_dbi) / 20.0);
  return kSpeedOfLight * amp_gain / (4.0 * M_PI * carrier_hz * hop.dist_m) *
         std::exp(-0.5 * hop.k_abs * hop.dist_m);
}

double avg_snr(const ThzHop& hop, const LinkBudget& budget) {
  budget.validate();
  double hl = path_gain(hop, budget.carrier_hz);
  double ptx_w = std::pow(10.0, (budget.ptx_dbm - 30.0) / 10.0);
  double noise_w = std::pow(10.0, (budget.noise_power_dbm() - 30.0) / 10.0);
  return ptx_w * hl * hl / noise_w;
}

PointingParams pointing_params(const PointingGeometry& geom) {
  geom.validate();
  double v = std::sqrt(M_PI / 2.0) * geom.aperture_r_m / geom.beam_w_m;
  double erf_v = std::erf(v);
  double s_cap = erf_v * erf_v;
  double w_eq2 = geom.beam_w_m * geom.beam_w_m * std::sqrt(M_PI) * erf_v /
                 (2.0 * v * std::exp(-v * v));
  double phi =
      w_eq2 / (4.0 * geom.jitter_sigma_m * geom.jitter_sigma_m);
  return {s_cap, phi};
}

double b_coefficient(const AccessLink& link, double carrier_hz) {
  link.validate();
  require(carrier_hz > 0.0, "b_coefficient: carrier must be > 0");
  double sn = link.sigma_n();
  double fs = kSpeedOfLight / (4.0 * M_PI * link.d_a * carrier_hz);
  double g_lin = std::pow(10.0, link.g_a_dbi / 10.0);
  double absorb = std::exp(link.k_a * link.d_a);
  return std::sqrt(link.m_omega() * link.m_g * absorb /
                   (g_lin * g_lin * link.p_a * std::exp(0.5 * sn * sn) *
                    std::pow(fs, link.eta)));
}

double hop_snr_pdf(const ThzHop& hop, double gamma0, double gamma) {
  hop.validate();
  require(gamma0 > 0.0, "hop_snr_pdf: gamma0 must be > 0");
  if (gamma <= 0.0) return 0.0;
  double r = gamma / gamma0;
  if (!hop.has_pointing()) {
    double c = hop.big_c();
    double w = c * std::pow(r, 0.5 * hop.alpha);
    double lg = std::log(0.5 * hop.alpha) + hop.mu * std::log(c) +
                (0.5 * hop.alpha * hop.mu - 1.0) * std::log(r) - w -
                std::lgamma(hop.mu) - std::log(gamma0);
    return std::exp(lg);
  }
  double w = hop.big_c() * std::pow(r, 0.5 * hop.alpha);
  double lg = hop.big_a_log() - std::log(2.0) +
              (0.5 * hop.phi - 1.0) * std::log(gamma) -
              0.5 * hop.phi * std::log(gamma0) +
              specfun::log_upper_gamma(hop.big_b(), w);
  return std::exp(lg);
}

double hop_snr_cdf(const ThzHop& hop, double gamma0, double gamma) {
  hop.validate();
  require(gamma0 > 0.0, "hop_snr_cdf: gamma0 must be > 0");
  if (gamma <= 0.0) return 0.0;
  double r = gamma / gamma0;
  double w = hop.big_c() * std::pow(r, 0.5 * hop.alpha);
  if (!hop.has_pointing())
    return specfun::reg_lower_gamma(hop.mu, w);
  double t1 = 0.5 * hop.phi * std::log(r) + specfun::log_upper_gamma(hop.big_b(), w);
  double t2 = -(hop.phi / hop.alpha) * std::log(hop.big_c()) +
              std::log(specfun::lower_gamma(hop.mu, w));
  double lead = std::max(t1, t2);
  double v = std::exp(hop.big_a_log() - std::log(hop.phi) + lead) *
             (std::exp(t1 - lead) + std::exp(t2 - lead));
  return std::min(v, 1.0);
}

double hop_snr_pdf_meijer(const ThzHop& hop, double gamma0, double gamma) {
  hop.validate();
  require(hop.has_pointing(), "hop_snr_pdf_meijer: needs finite phi");
  require(gamma > 0.0 && gamma0 > 0.0, "hop_snr_pdf_meijer: positive args");
  FoxHSpec g;  // G^{2,0}_{1,2}(w | 1; B, 0) = Gamma(B, w)
  g.m = 2;
  g.n = 0;
  g.p = 1;
  g.q = 2;
  g.upper = {{1.0, 1.0}};
  g.lower = {{hop.big_b(), 1.0}, {0.0, 1.0}};
  double w = hop.big_c() * std::pow(gamma / gamma0, 0.5 * hop.alpha);
  double lg = hop.big_a_log() - std::log(2.0) +
              (0.5 * hop.phi - 1.0) * std::log(gamma) -
              0.5 * hop.phi * std::log(gamma0);
  return std::exp(lg) * specfun::meijer_g(g, w);
}

double hop_snr_moment(const ThzHop& hop, double gamma0, double rho) {
  hop.validate();
  require(gamma0 > 0.0, "hop_snr_moment: gamma0 must be > 0");
  double two_rho_alpha = 2.0 * rho / hop.alpha;
  if (hop.mu + two_rho_alpha <= 0.0)
    throw ValidationError("hop_snr_moment: moment does not exist");
  if (!hop.has_pointing()) {
    double c = hop.big_c();
    return std::exp(rho * std::log(gamma0) - two_rho_alpha * std::log(c) +
                    std::lgamma(hop.mu + two_rho_alpha) - std::lgamma(hop.mu));
  }
  double sigma = (hop.phi + 2.0 * rho) / hop.alpha;
  if (sigma <= 0.0)
    throw ValidationError("hop_snr_moment: moment does not exist");
  return std::exp(hop.big_a_log() - std::log(hop.alpha) +
                  rho * std::log(gamma0) - sigma * std::log(hop.big_c()) +
                  std::lgamma(hop.mu + two_rho_alpha) + std::lgamma(sigma) -
                  std::lgamma(1.0 + sigma));
}

// Access link: SNR = gamma0 * h_p^2 * g1 g2 / b^2, g_i ~ Gamma(m_omega), Gamma(m_g).
// PDF  = pref * kappa * G^{3,0}_{1,3}(kappa g | phi/2; mOm-1, mg-1, phi/2-1)
// CDF  = pref * G^{3,1}_{2,4}(kappa g | 1, 1+phi/2; mOm, mg, phi/2, 0)
// with pref = phi_a / (2 Gamma(mOm) Gamma(mg)), kappa = b^2/(S_A^2 gamma0).

double access_pdf_prefactor(const AccessLink& link) {
  return link.phi_a /
         (2.0 * std::tgamma(link.m_omega()) * std::tgamma(link.m_g));
}

double access_arg_scale(const AccessLink& link, double gamma0) {
  return link.b() * link.b() / (link.s_a * link.s_a * gamma0);
}

FoxHSpec access_pdf_spec(const AccessLink& link) {
  FoxHSpec s;
  s.m = 3;
  s.n = 0;
  s.p = 1;
  s.q = 3;
  double half_phi = 0.5 * link.phi_a;
  s.upper = {{half_phi, 1.0}};
  s.lower = {{link.m_omega() - 1.0, 1.0},
             {link.m_g - 1.0, 1.0},
             {half_phi - 1.0, 1.0}};
  return s;
}

FoxHSpec access_cdf_spec(const AccessLink& link) {
  FoxHSpec s;
  s.m = 3;
  s.n = 1;
  s.p = 2;
  s.q = 4;
  double half_phi = 0.5 * link.phi_a;
  s.upper = {{1.0, 1.0}, {1.0 + half_phi, 1.0}};
  s.lower = {{link.m_omega(), 1.0},
             {link.m_g, 1.0},
             {half_phi, 1.0},
             {0.0, 1.0}};
  return s;
}

double access_snr_pdf(const AccessLink& link, double gamma0, double gamma) {
  link.validate();
  require(gamma0 > 0.0, "access_snr_pdf: gamma0 must be > 0");
  if (gamma <= 0.0) return 0.0;
  double kappa = access_arg_scale(link, gamma0);
  return access_pdf_prefactor(link) * kappa *
         specfun::meijer_g(access_pdf_spec(link), kappa * gamma);
}

double access_snr_cdf(const AccessLink& link, double gamma0, double gamma) {
  link.validate();
  require(gamma0 > 0.0, "access_snr_cdf: gamma0 must be > 0");
  if (gamma <= 0.0) return 0.0;
  double kappa = access_arg_scale(link, gamma0);
  double v = access_pdf_prefactor(link) *
             specfun::meijer_g(access_cdf_spec(link), kappa * gamma);
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace thz::channel
