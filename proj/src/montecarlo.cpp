#include "thz/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "thz/specfun.hpp"

namespace thz::mc {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t ctr[4], const std::uint32_t key[2]) {
  std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
  std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
  std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  std::uint32_t out0 = hi1 ^ ctr[1] ^ key[0];
  std::uint32_t out1 = lo1;
  std::uint32_t out2 = hi0 ^ ctr[3] ^ key[1];
  std::uint32_t out3 = lo0;
  ctr[0] = out0;
  ctr[1] = out1;
  ctr[2] = out2;
  ctr[3] = out3;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) {
  key_[0] = static_cast<std::uint32_t>(seed);
  key_[1] = static_cast<std::uint32_t>(seed >> 32);
  ctr_[0] = 0;
  ctr_[1] = 0;
  ctr_[2] = static_cast<std::uint32_t>(stream_id);
  ctr_[3] = static_cast<std::uint32_t>(stream_id >> 32);
}

void RngStream::refill() {
  std::uint32_t c[4] = {ctr_[0], ctr_[1], ctr_[2], ctr_[3]};
  std::uint32_t k[2] = {key_[0], key_[1]};
  for (int r = 0; r < 10; ++r) {
    philox_round(c, k);
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
  }
  buf_[0] = c[0];
  buf_[1] = c[1];
  buf_[2] = c[2];
  buf_[3] = c[3];
  buf_pos_ = 0;
  if (++ctr_[0] == 0) ++ctr_[1];  // 2^64 draws per stream before wrap
}

std::uint32_t RngStream::next_u32() {
  if (buf_pos_ >= 4) refill();
  return buf_[buf_pos_++];
}

std::uint64_t RngStream::next_u64() {
  std::uint64_t lo = next_u32();
  std::uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

double RngStream::uniform_oo() {
  return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
}

double RngStream::normal() {
  if (have_normal_) {
    have_normal_ = false;
    return cached_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform_oo() - 1.0;
    v = 2.0 * uniform_oo() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double f = std::sqrt(-2.0 * std::log(s) / s);
  cached_normal_ = v * f;
  have_normal_ = true;
  return u * f;
}

double RngStream::gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
  if (shape < 1.0) {
    // boost the shape, then scale back (valid rejection-free transform)
    double g = gamma(shape + 1.0);
    return g * std::pow(uniform_oo(), 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = uniform_oo();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_alpha_mu(double alpha, double mu, double omega, RngStream& rng) {
  return omega * std::pow(rng.gamma(mu) / mu, 1.0 / alpha);
}

double sample_pointing(double s_cap, double phi, RngStream& rng) {
  if (!std::isfinite(phi)) return s_cap;
  return s_cap * std::pow(rng.uniform_oo(), 1.0 / phi);
}

double sample_generalized_k(double m_omega, double m_g, double b,
                            RngStream& rng) {
  return rng.gamma(m_omega) * rng.gamma(m_g) / (b * b);
}

double sample_hop_snr(const channel::ThzHop& hop, double gamma0,
                      RngStream& rng) {
  double hf = sample_alpha_mu(hop.alpha, hop.mu, hop.omega, rng);
  double hp = sample_pointing(hop.s_cap, hop.phi, rng);
  double h = hf * hp;
  return gamma0 * h * h;
}

double sample_access_snr(const channel::AccessLink& link, double gamma0,
                         RngStream& rng) {
  double hk2 = sample_generalized_k(link.m_omega(), link.m_g, link.b(), rng);
  double hp = sample_pointing(link.s_a, link.phi_a, rng);
  return gamma0 * hk2 * hp * hp;
}

double simulate_snr(const analytic::MultihopConfig& cfg, Combiner combiner,
                    RngStream& rng) {
  const int n = cfg.n_hops();
  double gamma[16];
  for (int i = 0; i < n; ++i)
    gamma[i] = sample_hop_snr(cfg.hops[i], cfg.gamma0s[i], rng);
  switch (combiner) {
    case Combiner::ca: {
      double inv = 0.0;
      for (int i = 0; i < n; ++i) inv += 1.0 / gamma[i];
      return 1.0 / inv;
    }
    case Combiner::fg_exact: {
      // 1/g = sum_i prod_{j<=i} psi_{j-1}/gamma_j with psi_0 = 1
      double prod = 1.0, inv = 0.0;
      for (int i = 0; i < n; ++i) {
        double psi_prev = (i == 0) ? 1.0 : cfg.psi_list[i - 1];
        prod *= psi_prev / gamma[i];
        inv += prod;
      }
      return 1.0 / inv;
    }
    case Combiner::fg_bound: {
      // (1/N) prod_j (gamma_j / psi_{j-1})^{l_j/N}
      double logv = -std::log(static_cast<double>(n));
      for (int i = 0; i < n; ++i) {
        double psi_prev = (i == 0) ? 1.0 : cfg.psi_list[i - 1];
        logv += (cfg.l_weight(i) / n) * std::log(gamma[i] / psi_prev);
      }
      return std::exp(logv);
    }
    default:
      throw std::invalid_argument("simulate_snr: combiner needs a MixedConfig");
  }
}

double simulate_snr(const analytic::MixedConfig& cfg, Combiner combiner,
                    RngStream& rng) {
  switch (combiner) {
    case Combiner::uplink: {
      double gb = simulate_snr(cfg.backhaul, Combiner::ca, rng);
      double ga = sample_access_snr(cfg.access, cfg.gamma0_access, rng);
      return std::min(gb, ga);
    }
    case Combiner::downlink: {
      double gb = simulate_snr(cfg.backhaul, Combiner::fg_exact, rng);
      double ga = sample_access_snr(cfg.access, cfg.gamma0_access, rng);
      return gb * ga / (cfg.psi + ga);
    }
    default:
      return simulate_snr(cfg.backhaul, combiner, rng);
  }
}

namespace {

template <typename Cfg>
Estimate sharded_mean(const Cfg& cfg, Combiner combiner, long n,
                      std::uint64_t seed,
                      const std::function<double(double)>& stat) {
  if (n < 10'000)
    throw std::invalid_argument("estimator: needs at least 1e4 samples");
  double sum = 0.0, sum2 = 0.0;
  long done = 0;
  std::uint64_t shard = 0;
  while (done < n) {
    long count = std::min(kShardSize, n - done);
    RngStream rng(seed, shard);
    double s = 0.0, s2 = 0.0;
    for (long i = 0; i < count; ++i) {
      double v = stat(simulate_snr(cfg, combiner, rng));
      s += v;
      s2 += v * v;
    }
    sum += s;
    sum2 += s2;
    done += count;
    ++shard;
  }
  double mean = sum / n;
  double var = std::max(0.0, sum2 / n - mean * mean);
  return {mean, std::sqrt(var / n), n};
}

}  // namespace

Estimate estimate_outage(const analytic::MultihopConfig& cfg, Combiner combiner,
                         double gamma_th, long n, std::uint64_t seed) {
  return sharded_mean(cfg, combiner, n, seed,
                      [&](double g) { return g < gamma_th ? 1.0 : 0.0; });
}

Estimate estimate_outage(const analytic::MixedConfig& cfg, Combiner combiner,
                         double gamma_th, long n, std::uint64_t seed) {
  return sharded_mean(cfg, combiner, n, seed,
                      [&](double g) { return g < gamma_th ? 1.0 : 0.0; });
}

double conditional_bep(const channel::Modulation& mod, double gamma) {
  double acc = 0.0;
  for (double q : mod.q_list) acc += specfun::upper_gamma(mod.p, q * gamma);
  return 0.5 * mod.delta * acc / specfun::gamma_fn(mod.p);
}

Estimate estimate_ber(const analytic::MultihopConfig& cfg, Combiner combiner,
                      const channel::Modulation& mod, long n,
                      std::uint64_t seed) {
  return sharded_mean(cfg, combiner, n, seed,
                      [&](double g) { return conditional_bep(mod, g); });
}

Estimate estimate_ber(const analytic::MixedConfig& cfg, Combiner combiner,
                      const channel::Modulation& mod, long n,
                      std::uint64_t seed) {
  return sharded_mean(cfg, combiner, n, seed,
                      [&](double g) { return conditional_bep(mod, g); });
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples)
    : sorted(std::move(samples)) {
  std::sort(sorted.begin(), sorted.end());
}

double EmpiricalCdf::operator()(double x) const {
  auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) / sorted.size();
}

double ks_distance(const EmpiricalCdf& ecdf,
                   const std::function<double(double)>& cdf) {
  const auto& xs = ecdf.sorted;
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double f = cdf(xs[i]);
    double lo = static_cast<double>(i) / xs.size();
    double hi = static_cast<double>(i + 1) / xs.size();
    d = std::max(d, std::max(std::abs(f - lo), std::abs(hi - f)));
  }
  return d;
}

double chi2_gof_pvalue(const std::vector<double>& samples,
                       const std::vector<double>& edges,
                       const std::vector<double>& probs) {
  if (edges.size() != probs.size() + 1)
    throw std::invalid_argument("chi2_gof: edges/probs size mismatch");
  std::vector<long> counts(probs.size(), 0);
  long used = 0;
  for (double x : samples) {
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    long bin = it - edges.begin() - 1;
    if (bin >= 0 && bin < static_cast<long>(probs.size())) {
      ++counts[bin];
      ++used;
    }
  }
  double stat = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    double expct = probs[k] * used;
    if (expct < 5.0)
      throw std::invalid_argument("chi2_gof: expected bin count below 5");
    double d = counts[k] - expct;
    stat += d * d / expct;
  }
  double df = static_cast<double>(probs.size() - 1);
  return specfun::upper_gamma(0.5 * df, 0.5 * stat) /
         specfun::gamma_fn(0.5 * df);
}

}  // namespace thz::mc
