#pragma once

// Independent simulation oracle: counter-based RNG streams, channel
// primitive samplers, end-to-end SNR combiners and sharded estimators.

#include <cstdint>
#include <functional>
#include <vector>

#include "thz/analytic.hpp"
#include "thz/channel.hpp"

namespace thz::mc {

// Philox4x32-10 counter-based generator. Identical (seed, stream_id) pairs
// reproduce identical sequences on any platform; distinct stream_ids are
// independent by construction.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);
  std::uint32_t next_u32();
  std::uint64_t next_u64();
  double uniform_oo();  // open interval (0,1)
  double normal();
  double gamma(double shape);  // unit scale, any shape > 0

 private:
  void refill();
  std::uint32_t key_[2];
  std::uint32_t ctr_[4];
  std::uint32_t buf_[4];
  int buf_pos_ = 4;
  bool have_normal_ = false;
  double cached_normal_ = 0.0;
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n = 0;
};

// --- channel primitive samplers ---------------------------------------------

// alpha-mu envelope: r = Omega (g/mu)^{1/alpha}, g ~ Gamma(mu).
double sample_alpha_mu(double alpha, double mu, double omega, RngStream& rng);

// zero-boresight pointing gain: h_p = S u^{1/phi}; phi = +inf collapses to S.
double sample_pointing(double s_cap, double phi, RngStream& rng);

// generalized-K power: |h_k|^2 = g1 g2 / b^2.
double sample_generalized_k(double m_omega, double m_g, double b,
                            RngStream& rng);

// --- end-to-end SNR ----------------------------------------------------------

enum class Combiner { ca, fg_exact, fg_bound, uplink, downlink };

double sample_hop_snr(const channel::ThzHop& hop, double gamma0,
                      RngStream& rng);
double sample_access_snr(const channel::AccessLink& link, double gamma0,
                         RngStream& rng);

double simulate_snr(const analytic::MultihopConfig& cfg, Combiner combiner,
                    RngStream& rng);
double simulate_snr(const analytic::MixedConfig& cfg, Combiner combiner,
                    RngStream& rng);

// --- estimators ----------------------------------------------------------------

// Work is split into fixed-size shards, one RngStream per shard, merged by a
// deterministic ordered reduction: the estimate over n samples equals the
// exact merge of its shards.
constexpr long kShardSize = 1L << 20;

Estimate estimate_outage(const analytic::MultihopConfig& cfg, Combiner combiner,
                         double gamma_th, long n, std::uint64_t seed);
Estimate estimate_outage(const analytic::MixedConfig& cfg, Combiner combiner,
                         double gamma_th, long n, std::uint64_t seed);

// Rao-Blackwellized conditional bit-error estimator: averages
// delta/(2 Gamma(p)) sum_n Gamma(p, q_n gamma) over SNR draws.
Estimate estimate_ber(const analytic::MultihopConfig& cfg, Combiner combiner,
                      const channel::Modulation& mod, long n,
                      std::uint64_t seed);
Estimate estimate_ber(const analytic::MixedConfig& cfg, Combiner combiner,
                      const channel::Modulation& mod, long n,
                      std::uint64_t seed);

double conditional_bep(const channel::Modulation& mod, double gamma);

// --- validation helpers ---------------------------------------------------------

struct EmpiricalCdf {
  std::vector<double> sorted;  // ascending
  explicit EmpiricalCdf(std::vector<double> samples);
  double operator()(double x) const;
};

// sup_x |F_n(x) - F(x)| over the sample points.
double ks_distance(const EmpiricalCdf& ecdf,
                   const std::function<double(double)>& cdf);

// Pearson statistic of `samples` against bin probabilities `probs` over the
// edges; returns the p-value from the chi^2 tail.
double chi2_gof_pvalue(const std::vector<double>& samples,
                       const std::vector<double>& edges,
                       const std::vector<double>& probs);

}  // namespace thz::mc
