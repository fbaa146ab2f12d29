#pragma once

// Closed-form and asymptotic performance expressions for CA/FG multihop
// relay chains and the mixed uplink/downlink system: SNR distributions,
// outage, average BER and diversity orders.

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "thz/channel.hpp"
#include "thz/specfun.hpp"

namespace thz::analytic {

enum class Relaying { ca, fg };
enum class Direction { uplink, downlink };
enum class Method { exact, bound, asymptotic, paper_literal };

struct Diagnostics {
  bool clamped = false;          // value nudged into [0,1] within slack
  bool out_of_range = false;     // beyond the 1e-6 slack: caller must surface
  bool degenerate_term = false;  // asymptotic term skipped at a gamma pole
  std::string note;
};

struct EvalResult {
  double value = 0.0;
  Method method = Method::exact;
  Diagnostics diag;
};

// N backhaul hops with their average SNRs. l_i = N+1-i (1-based i) weights
// the FG product bound; psi_list holds the N-1 inter-relay fixed gains
// (semi-blind defaults are filled in by finalize()).
struct MultihopConfig {
  std::vector<channel::ThzHop> hops;
  std::vector<double> gamma0s;
  Relaying relaying = Relaying::ca;
  std::vector<double> psi_list;

  int n_hops() const { return static_cast<int>(hops.size()); }
  double l_weight(int idx0) const { return n_hops() - idx0; }  // l_i, 0-based
  void validate() const;
  void finalize();  // validates and fills psi_list if empty
};

struct MixedConfig {
  MultihopConfig backhaul;
  channel::AccessLink access;
  double gamma0_access = 1.0;
  Direction direction = Direction::uplink;
  double psi = 0.0;  // downlink fixed gain; finalize() fills the semi-blind value

  void validate() const;
  void finalize();
};

// --- multihop statistics ----------------------------------------------------

// Exact CA end-to-end SNR distribution (harmonic combining), evaluated by
// numerical inversion of the product of per-hop reciprocal-SNR MGFs. This is
// the same object as the N-variate contour form below, on a route that stays
// well-conditioned at strong pointing (large phi) and high SNR.
EvalResult ca_cdf(const MultihopConfig& cfg, double gamma);
double ca_pdf(const MultihopConfig& cfg, double gamma);

// The same CDF/PDF through the N-variate Fox-H representation. Exercises
// fox_h_multivariate; usable where its contour conditioning permits.
EvalResult ca_cdf_foxh(const MultihopConfig& cfg, double gamma,
                       const specfun::ContourConfig& ccfg = {});
double ca_pdf_foxh(const MultihopConfig& cfg, double gamma,
                   const specfun::ContourConfig& ccfg = {});

enum class SpecialCase { rayleigh_no_pointing, nakagami2_pe2 };
// Closed special cases as printed in the source text. The Rayleigh case
// coincides with min-combining statistics rather than harmonic combining;
// deviation from the exact law is reported by callers, never asserted equal.
EvalResult ca_cdf_special(const MultihopConfig& cfg, double gamma,
                          SpecialCase which, bool paper_literal = false);

// r-th moment piece of the FG product bound: E[gamma_i^{r l_i / N}].
double fg_moment(const channel::ThzHop& hop, double gamma0, double r,
                 int n_hops, int l_i);

// FG product-bound SNR distribution (single-variate Fox-H).
double fg_pdf(const MultihopConfig& cfg, double gamma);
EvalResult fg_cdf(const MultihopConfig& cfg, double gamma);

// --- outage -----------------------------------------------------------------

EvalResult ca_outage_asymptotic(const MultihopConfig& cfg, double gamma_th);
EvalResult fg_outage_asymptotic(const MultihopConfig& cfg, double gamma_th);
EvalResult ca_outage_asymptotic_literal(const MultihopConfig& cfg,
                                        double gamma_th);

// min{ sum alpha_i mu_i / 2, sum phi_i / 2 }
double diversity_multihop(const MultihopConfig& cfg);

// --- average BER --------------------------------------------------------------

// delta/(2 Gamma(p)) sum_n q_n^p Int gamma^{p-1} e^{-q_n gamma} F(gamma)
// by adaptive quadrature with a certified tail bound.
double avg_ber_from_cdf(const std::function<double(double)>& cdf,
                        const channel::Modulation& mod, double tol = 1e-9);

EvalResult ca_avg_ber(const MultihopConfig& cfg, const channel::Modulation& mod);
EvalResult fg_avg_ber(const MultihopConfig& cfg, const channel::Modulation& mod);

// --- mixed link ---------------------------------------------------------------

// Access-link asymptotics (residue series of the shadowed access CDF).
EvalResult access_cdf_asymptotic(const channel::AccessLink& link, double gamma0,
                                 double gamma);
// Access-link average BER in closed Meijer-G form.
double access_avg_ber(const channel::AccessLink& link, double gamma0,
                      const channel::Modulation& mod);

EvalResult uplink_outage(const MixedConfig& cfg, double gamma_th);
EvalResult uplink_outage_asymptotic(const MixedConfig& cfg, double gamma_th);
double uplink_diversity(const MixedConfig& cfg);
EvalResult uplink_avg_ber(const MixedConfig& cfg, const channel::Modulation& mod);

// Semi-blind fixed gain (E[(1+gamma)^{-1}])^{-1} of the backhaul bound SNR.
double psi_fixed_gain(const MultihopConfig& cfg);

double dl_pdf(const MixedConfig& cfg, double gamma);
EvalResult dl_cdf(const MixedConfig& cfg, double gamma);
EvalResult dl_outage_asymptotic(const MixedConfig& cfg, double gamma_th);
double dl_diversity(const MixedConfig& cfg);
EvalResult dl_avg_ber(const MixedConfig& cfg, const channel::Modulation& mod);

// --- paper-literal special forms (gated by the CLI flag) ----------------------

// Moment special case with a negative base raised to a real power; returns
// the magnitude and flags the diagnostic.
EvalResult fg_moment_special_literal(const channel::ThzHop& hop, double gamma0,
                                     double r, int n_hops, int l_i);

// --- building blocks shared with tests ----------------------------------------

// E[exp(-s / gamma_hop)] for complex s with Re s >= 0.
std::complex<double> hop_recip_mgf(const channel::ThzHop& hop, double gamma0,
                                   std::complex<double> s);

// Numerical Laplace-transform inversion (Abate-Whitt Euler summation) of a
// transform F at argument t > 0.
double euler_laplace_invert(
    const std::function<std::complex<double>(std::complex<double>)>& transform,
    double t, int terms = 28, int avg_terms = 15);

}  // namespace thz::analytic
