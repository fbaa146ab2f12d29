#include <cmath>

#include "doctest.h"
#include "thz/montecarlo.hpp"
#include "thz/quad.hpp"

using namespace thz;
using namespace thz::mc;
using doctest::Approx;

namespace {

analytic::MultihopConfig iid_config(int n, double gamma0, double alpha = 2.0,
                                    double mu = 2.0, bool pointing = true) {
  analytic::MultihopConfig cfg;
  for (int i = 0; i < n; ++i) {
    channel::ThzHop h;
    h.alpha = alpha;
    h.mu = mu;
    if (pointing) {
      h.phi = 37.06;
      h.s_cap = 0.054;
    }
    h.dist_m = 20.0;
    cfg.hops.push_back(h);
    cfg.gamma0s.push_back(gamma0);
  }
  return cfg;
}

}  // namespace

TEST_CASE("rng streams reproduce and differ") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  bool same = true, differ = false;
  for (int i = 0; i < 64; ++i) {
    auto x = a.next_u32();
    same = same && (x == b.next_u32());
    differ = differ || (x != c.next_u32());
  }
  CHECK(same);
  CHECK(differ);
  double u = RngStream(1, 1).uniform_oo();
  CHECK(u > 0.0);
  CHECK(u < 1.0);
}

TEST_CASE("gamma sampler moments") {
  for (double shape : {0.5, 1.0, 3.7}) {
    RngStream rng(11, 0);
    const long n = 200'000;
    double s = 0.0, s2 = 0.0;
    for (long i = 0; i < n; ++i) {
      double g = rng.gamma(shape);
      s += g;
      s2 += g * g;
    }
    double mean = s / n, var = s2 / n - mean * mean;
    CHECK(std::abs(mean - shape) < 4.0 * std::sqrt(shape / n));
    CHECK(std::abs(var - shape) < 0.05 * shape + 4.0 * shape / std::sqrt(n));
  }
}

TEST_CASE("alpha-mu sampler: gamma reduction and moments") {
  const double alpha = 1.6, mu = 2.3, omega = 1.4;
  RngStream rng(5, 1);
  const long n = 400'000;
  double s_pow = 0.0;
  std::vector<double> g(n);
  for (long i = 0; i < n; ++i) {
    double r = sample_alpha_mu(alpha, mu, omega, rng);
    double p = std::pow(r, alpha);
    s_pow += p;
    g[i] = p * mu / std::pow(omega, alpha);
  }
  // E[r^alpha] = omega^alpha
  CHECK(std::abs(s_pow / n - std::pow(omega, alpha)) <
        4.0 * std::pow(omega, alpha) / std::sqrt(static_cast<double>(n) / mu));
  // r^alpha mu / omega^alpha ~ Gamma(mu): KS test at the 1% level
  EmpiricalCdf ecdf(std::move(g));
  double d = ks_distance(
      ecdf, [&](double x) { return specfun::reg_lower_gamma(mu, x); });
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("pointing sampler") {
  RngStream rng(9, 2);
  CHECK(sample_pointing(0.7, std::numeric_limits<double>::infinity(), rng) ==
        0.7);
  const double s_cap = 0.61, phi = 5.5;
  const long n = 300'000;
  double s = 0.0;
  for (long i = 0; i < n; ++i) s += sample_pointing(s_cap, phi, rng);
  double mean = s_cap * phi / (phi + 1.0);
  CHECK(std::abs(s / n - mean) < 4.0 * s_cap / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("generalized-K sampler matches the bessel density") {
  const double m_om = 2.545, m_g = 1.0;
  const double b = std::sqrt(m_om * m_g);
  RngStream rng(13, 3);
  const long n = 300'000;
  std::vector<double> x(n);
  double s = 0.0;
  for (long i = 0; i < n; ++i) {
    x[i] = sample_generalized_k(m_om, m_g, b, rng);
    s += x[i];
  }
  CHECK(std::abs(s / n - m_om * m_g / (b * b)) < 0.02);
  // chi^2 against the closed power density via bessel_k
  auto pdf = [&](double t) {
    return 2.0 * std::pow(b, m_om + m_g) /
           (specfun::gamma_fn(m_om) * specfun::gamma_fn(m_g)) *
           std::pow(t, 0.5 * (m_om + m_g) - 1.0) *
           specfun::bessel_k(m_om - m_g, 2.0 * b * std::sqrt(t));
  };
  std::vector<double> edges{1e-9};
  for (double q = 0.08; q < 8.0; q *= 1.45) edges.push_back(q);
  edges.push_back(60.0);
  std::vector<double> probs;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    probs.push_back(integrate(pdf, edges[i], edges[i + 1], {.rel_tol = 1e-9}));
  double p = chi2_gof_pvalue(x, edges, probs);
  CHECK(p > 0.01);
}

TEST_CASE("estimator sharding invariance") {
  auto cfg = iid_config(2, 200.0);
  const long n = 2 * kShardSize + 12345;
  Estimate full = estimate_outage(cfg, Combiner::ca, 1.0, n, 77);
  // manual shard merge with the same seeds
  double sum = 0.0;
  long done = 0;
  std::uint64_t shard = 0;
  while (done < n) {
    long count = std::min(kShardSize, n - done);
    RngStream rng(77, shard++);
    for (long i = 0; i < count; ++i)
      sum += simulate_snr(cfg, Combiner::ca, rng) < 1.0 ? 1.0 : 0.0;
    done += count;
  }
  CHECK(full.mean == sum / n);  // exact merge, not approximate
  CHECK(full.n == n);
  CHECK_THROWS(estimate_outage(cfg, Combiner::ca, 1.0, 100, 1));
}

TEST_CASE("combiners coincide for a single hop") {
  auto cfg = iid_config(1, 150.0);
  cfg.relaying = analytic::Relaying::fg;
  cfg.finalize();
  RngStream r1(3, 0), r2(3, 0), r3(3, 0);
  for (int i = 0; i < 200; ++i) {
    double ca = simulate_snr(cfg, Combiner::ca, r1);
    double fe = simulate_snr(cfg, Combiner::fg_exact, r2);
    double fb = simulate_snr(cfg, Combiner::fg_bound, r3);
    CHECK(ca == Approx(fe).epsilon(1e-14));
    CHECK(ca == Approx(fb).epsilon(1e-12));
  }
}

TEST_CASE("product bound dominates the exact FG SNR draw by draw") {
  auto cfg = iid_config(3, 120.0);
  cfg.relaying = analytic::Relaying::fg;
  cfg.finalize();
  RngStream r1(21, 0), r2(21, 0);
  for (int i = 0; i < 2000; ++i) {
    double exact = simulate_snr(cfg, Combiner::fg_exact, r1);
    double bound = simulate_snr(cfg, Combiner::fg_bound, r2);
    CHECK(bound >= exact * (1.0 - 1e-12));
  }
}

TEST_CASE("downlink combiner limits") {
  analytic::MixedConfig mix;
  mix.backhaul = iid_config(1, 150.0);
  mix.backhaul.relaying = analytic::Relaying::fg;
  mix.direction = analytic::Direction::downlink;
  mix.gamma0_access = 130.0;
  mix.psi = 1e-9;  // degenerate gain: gamma -> gamma_N
  RngStream r1(4, 0), r2(4, 0);
  for (int i = 0; i < 200; ++i) {
    double dl = simulate_snr(mix, Combiner::downlink, r1);
    double gn = simulate_snr(mix.backhaul, Combiner::fg_exact, r2);
    (void)sample_access_snr(mix.access, mix.gamma0_access, r2);
    CHECK(dl == Approx(gn).epsilon(1e-6));
  }
}

TEST_CASE("conditional bit-error probability") {
  auto mod = channel::Modulation::dbpsk();
  CHECK(conditional_bep(mod, 0.0) == Approx(0.5).epsilon(1e-14));
  CHECK(conditional_bep(mod, 3.1) == Approx(0.5 * std::exp(-3.1)).epsilon(1e-13));
  CHECK(conditional_bep(mod, 200.0) < 1e-80);
  auto qam = channel::Modulation::qam16();
  CHECK(conditional_bep(qam, 0.0) ==
        Approx(0.5 * qam.delta * qam.k()).epsilon(1e-14));
}

TEST_CASE("empirical cdf and ks distance") {
  EmpiricalCdf ecdf({0.1, 0.2, 0.3, 0.4});
  CHECK(ecdf(0.25) == Approx(0.5));
  double d0 = ks_distance(ecdf, [&](double x) { return ecdf(x); });
  CHECK(d0 <= 0.25 + 1e-12);
  // a step function against itself shifted by 0.5 in probability
  double d = ks_distance(ecdf, [](double) { return 0.0; });
  CHECK(d == Approx(1.0));
}
