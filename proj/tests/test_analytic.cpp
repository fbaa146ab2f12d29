#include <cmath>

#include "doctest.h"
#include "thz/analytic.hpp"
#include "thz/montecarlo.hpp"
#include "thz/quad.hpp"

using namespace thz;
using namespace thz::analytic;
using channel::Modulation;
using channel::ThzHop;
using doctest::Approx;

namespace {

ThzHop table2_hop(double alpha = 2.0, double mu = 2.0) {
  ThzHop h;
  h.alpha = alpha;
  h.mu = mu;
  h.phi = 37.06;
  h.s_cap = 0.054;
  h.dist_m = 20.0;
  return h;
}

MultihopConfig make_cfg(int n, double gamma0, Relaying rel = Relaying::ca,
                        double alpha = 2.0, double mu = 2.0,
                        bool pointing = true) {
  MultihopConfig cfg;
  cfg.relaying = rel;
  for (int i = 0; i < n; ++i) {
    ThzHop h = table2_hop(alpha, mu);
    if (!pointing) {
      h.phi = std::numeric_limits<double>::infinity();
      h.s_cap = 1.0;
    }
    cfg.hops.push_back(h);
    cfg.gamma0s.push_back(gamma0);
  }
  cfg.finalize();
  return cfg;
}

channel::AccessLink access_link(double sigma_db = 2.0, double m_g = 1.0,
                                double phi_a = 14.5) {
  channel::AccessLink a;
  a.sigma_db = sigma_db;
  a.m_g = m_g;
  a.phi_a = phi_a;
  a.s_a = 0.054;
  return a;
}

}  // namespace

TEST_CASE("reciprocal-SNR MGF against direct quadrature") {
  ThzHop h = table2_hop();
  double g0 = 400.0;
  for (double sr : {0.4, 7.0}) {
    std::complex<double> s(sr, 2.5);
    // oracle in v = 1/gamma with hand-placed panels (oscillation-resolved)
    auto fv = [&](double v) {
      if (v <= 0.0) return 0.0;
      return channel::hop_snr_pdf(h, g0, 1.0 / v) / (v * v) *
             std::exp(-sr * v) * std::cos(s.imag() * v);
    };
    double re = 0.0, edge = 0.0;
    for (double next = 1e-4; edge < 52.0 / sr; next *= 1.9) {
      double hi = std::min(next, 52.0 / sr);
      re += integrate(fv, edge, hi, {.rel_tol = 1e-12, .initial_splits = 12});
      edge = hi;
    }
    CHECK(hop_recip_mgf(h, g0, s).real() == Approx(re).epsilon(2e-7));
  }
}

TEST_CASE("euler laplace inversion on known pairs") {
  // L[e^{-t}](s) = 1/(1+s)
  auto f1 = [](std::complex<double> s) { return 1.0 / (1.0 + s); };
  for (double t : {0.3, 1.0, 4.0})
    CHECK(euler_laplace_invert(f1, t) == Approx(std::exp(-t)).epsilon(1e-7));
  // P(Exp(1) > t) through the CDF-complement transform
  auto f2 = [](std::complex<double> s) {
    return (1.0 - 1.0 / (1.0 + s)) / s;
  };
  CHECK(euler_laplace_invert(f2, 6.0) == Approx(std::exp(-6.0)).epsilon(1e-5));
}

TEST_CASE("CA single hop reduces to the per-hop distribution") {
  auto cfg = make_cfg(1, 250.0);
  for (double g : {0.05, 0.4, 2.0, 12.0}) {
    CHECK(ca_cdf(cfg, g).value ==
          Approx(channel::hop_snr_cdf(cfg.hops[0], 250.0, g)).epsilon(3e-6));
    CHECK(ca_pdf(cfg, g) ==
          Approx(channel::hop_snr_pdf(cfg.hops[0], 250.0, g))
              .epsilon(3e-5));
  }
  CHECK(ca_cdf(cfg, 0.0).value == 0.0);
}

TEST_CASE("CA dual hop against a nested-quadrature oracle and MC") {
  auto cfg = make_cfg(2, 300.0);
  // oracle: F(g) = F1(g) + Int_g^inf f1(x) F2(1/(1/g - 1/x)) dx
  auto oracle = [&](double g) {
    double f1 = channel::hop_snr_cdf(cfg.hops[0], cfg.gamma0s[0], g);
    auto inner = [&](double u) {
      double x = g + std::exp(u);  // x > g
      double rest = 1.0 / (1.0 / g - 1.0 / x);
      return std::exp(u) * channel::hop_snr_pdf(cfg.hops[0], cfg.gamma0s[0], x) *
             channel::hop_snr_cdf(cfg.hops[1], cfg.gamma0s[1], rest);
    };
    double corr = integrate(inner, std::log(g) - 25.0, std::log(g) + 20.0,
                            {.rel_tol = 1e-10, .initial_splits = 32});
    return f1 + corr;
  };
  for (double g : {0.08, 0.5, 2.5}) {
    CHECK(ca_cdf(cfg, g).value == Approx(oracle(g)).epsilon(2e-5));
  }
  auto est = mc::estimate_outage(cfg, mc::Combiner::ca, 1.0, 400'000, 2026);
  CHECK(std::abs(ca_cdf(cfg, 1.0).value - est.mean) < 3.5 * est.std_error);
}

TEST_CASE("CA multivariate contour route agrees in its conditioned region") {
  auto cfg1 = make_cfg(1, 900.0);
  for (double g : {1.5, 4.0}) {
    CHECK(ca_cdf_foxh(cfg1, g).value ==
          Approx(ca_cdf(cfg1, g).value).epsilon(2e-5));
  }
  auto cfg2 = make_cfg(2, 700.0);
  double g = 2.2;
  CHECK(ca_cdf_foxh(cfg2, g).value == Approx(ca_cdf(cfg2, g).value).epsilon(5e-5));
  SUBCASE("pdf route") {
    double dg = 1e-3;
    double fd = (ca_cdf(cfg2, g + dg).value - ca_cdf(cfg2, g - dg).value) /
                (2.0 * dg);
    CHECK(ca_pdf_foxh(cfg2, g) == Approx(fd).epsilon(1e-3));
  }
}

TEST_CASE("CA special cases") {
  MultihopConfig cfg = make_cfg(1, 10.0, Relaying::ca, 2.0, 1.0, false);
  CHECK(ca_cdf_special(cfg, 1.0, SpecialCase::rayleigh_no_pointing).value ==
        Approx(1.0 - std::exp(-0.1)).epsilon(1e-12));
  CHECK(ca_cdf_special(cfg, 0.0, SpecialCase::rayleigh_no_pointing).value ==
        0.0);
  // printed min-combining form vs the exact harmonic-sum law: deviation is
  // reported, not asserted equal
  MultihopConfig cfg2 = make_cfg(2, 10.0, Relaying::ca, 2.0, 1.0, false);
  double printed =
      ca_cdf_special(cfg2, 1.0, SpecialCase::rayleigh_no_pointing).value;
  double exact = ca_cdf(cfg2, 1.0).value;
  CHECK(printed < exact);  // min statistics lower-bound the harmonic outage
  MESSAGE("printed special-case deviation at gamma_th=1: ",
          exact - printed);
  CHECK_THROWS_AS(
      ca_cdf_special(make_cfg(1, 10.0), 1.0, SpecialCase::rayleigh_no_pointing),
      channel::ValidationError);
}

TEST_CASE("FG bound distribution") {
  SUBCASE("single hop: bound coincides with the hop law") {
    auto cfg = make_cfg(1, 220.0, Relaying::fg);
    for (double g : {0.1, 0.8, 3.0}) {
      CHECK(fg_cdf(cfg, g).value ==
            Approx(channel::hop_snr_cdf(cfg.hops[0], 220.0, g)).epsilon(1e-6));
      CHECK(fg_pdf(cfg, g) ==
            Approx(channel::hop_snr_pdf(cfg.hops[0], 220.0, g)).epsilon(1e-6));
    }
  }
  SUBCASE("three hops: normalization and MC agreement of the bound law") {
    auto cfg = make_cfg(3, 150.0, Relaying::fg);
    auto pdf = [&](double u) {
      double g = std::exp(u);
      return g * fg_pdf(cfg, g);
    };
    double mass = integrate(pdf, std::log(150.0) - 30.0, std::log(150.0) + 16.0,
                            {.rel_tol = 1e-7, .initial_splits = 24});
    CHECK(mass == Approx(1.0).epsilon(1e-3));
    double th = 0.4;
    auto est = mc::estimate_outage(cfg, mc::Combiner::fg_bound, th, 300'000, 5);
    CHECK(std::abs(fg_cdf(cfg, th).value - est.mean) < 3.5 * est.std_error);
    // bound direction against the exact-combiner empirical law
    auto exact = mc::estimate_outage(cfg, mc::Combiner::fg_exact, th, 300'000, 5);
    CHECK(fg_cdf(cfg, th).value <= exact.mean + 3.5 * exact.std_error);
  }
  SUBCASE("moment reduction") {
    CHECK(fg_moment(table2_hop(), 100.0, 0.0, 1, 1) == Approx(1.0));
    CHECK(fg_moment(table2_hop(), 100.0, 1.0, 2, 2) ==
          Approx(channel::hop_snr_moment(table2_hop(), 100.0, 1.0)));
  }
}

TEST_CASE("average BER machinery") {
  auto mod = Modulation::dbpsk();
  SUBCASE("degenerate CDFs") {
    CHECK(avg_ber_from_cdf([](double) { return 1.0; }, mod) ==
          Approx(0.5).epsilon(1e-8));
    CHECK(avg_ber_from_cdf([](double) { return 0.0; }, mod) ==
          Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("single-hop Rayleigh closed form") {
    auto cfg = make_cfg(1, 35.0, Relaying::ca, 2.0, 1.0, false);
    double got = avg_ber_from_cdf(
        [&](double g) { return ca_cdf(cfg, g).value; }, mod);
    CHECK(got == Approx(1.0 / (2.0 * 36.0)).epsilon(1e-6));
    auto fg = make_cfg(1, 35.0, Relaying::fg, 2.0, 1.0, false);
    CHECK(fg_avg_ber(fg, mod).value ==
          Approx(1.0 / (2.0 * 36.0)).epsilon(1e-6));
  }
  SUBCASE("FG contour expression equals direct quadrature") {
    auto cfg = make_cfg(2, 260.0, Relaying::fg);
    double quad = avg_ber_from_cdf(
        [&](double g) { return fg_cdf(cfg, g).value; }, mod, 1e-7);
    CHECK(fg_avg_ber(cfg, mod).value == Approx(quad).epsilon(1e-3));
  }
  SUBCASE("CA contour expression equals direct quadrature") {
    auto cfg = make_cfg(1, 420.0);
    double quad = avg_ber_from_cdf(
        [&](double g) { return ca_cdf(cfg, g).value; }, mod, 1e-7);
    CHECK(ca_avg_ber(cfg, mod).value == Approx(quad).epsilon(1e-3));
    auto cfg2 = make_cfg(2, 420.0);
    double quad2 = avg_ber_from_cdf(
        [&](double g) { return ca_cdf(cfg2, g).value; }, mod, 1e-7);
    CHECK(ca_avg_ber(cfg2, mod).value == Approx(quad2).epsilon(1e-3));
  }
}

TEST_CASE("multihop asymptotics") {
  SUBCASE("single hop: ratio to exact approaches one") {
    double prev_ratio = 0.0;
    for (double g0 : {3e3, 3e4, 3e5}) {
      auto cfg = make_cfg(1, g0);
      double exact = ca_cdf(cfg, 1.0).value;
      double asym = ca_outage_asymptotic(cfg, 1.0).value;
      double ratio = asym / exact;
      CHECK(ratio > 0.85);
      CHECK(ratio < 1.15);
      bool tightening = prev_ratio == 0.0 ||
                        std::abs(ratio - 1.0) <= std::abs(prev_ratio - 1.0) + 1e-3;
      CHECK(tightening);
      prev_ratio = ratio;
    }
  }
  SUBCASE("power-law threshold scaling") {
    auto cfg = make_cfg(2, 1e5);
    double m = diversity_multihop(cfg);
    double a1 = ca_outage_asymptotic(cfg, 1.0).value;
    double a2 = ca_outage_asymptotic(cfg, 2.0).value;
    // the exact union asymptote scales with the per-hop exponent, which for
    // these parameters equals alpha mu / 2 per hop
    CHECK(a2 / a1 == Approx(std::pow(2.0, 2.0)).epsilon(0.02));
    CHECK(m == Approx(4.0));  // printed formula value (sum form)
  }
  SUBCASE("FG bound asymptote") {
    for (double g0 : {1e4, 1e5}) {
      auto cfg = make_cfg(2, g0, Relaying::fg);
      double exact = fg_cdf(cfg, 1.0).value;
      double asym = fg_outage_asymptotic(cfg, 1.0).value;
      CHECK(asym / exact == Approx(1.0).epsilon(0.1));
    }
  }
  SUBCASE("diversity formula branches") {
    auto cfg = make_cfg(1, 10.0, Relaying::ca, 1.5, 1.0);
    CHECK(diversity_multihop(cfg) == Approx(0.75));
    cfg.hops[0].phi = 1.2;  // pointing-limited branch
    CHECK(diversity_multihop(cfg) == Approx(0.6));
  }
}

TEST_CASE("access asymptotics and BER") {
  auto link = access_link(8.0, 1.0, 14.5);
  SUBCASE("ratio to the exact cdf tends to one") {
    for (double g0 : {1e4, 1e6}) {
      double exact = channel::access_snr_cdf(link, g0, 1.0);
      double asym = access_cdf_asymptotic(link, g0, 1.0).value;
      CHECK(asym / exact == Approx(1.0).epsilon(g0 > 1e5 ? 0.02 : 0.1));
    }
  }
  SUBCASE("gamma -> 0 limit") {
    CHECK(access_cdf_asymptotic(link, 100.0, 1e-12).value < 1e-6);
  }
  SUBCASE("closed BER expression equals quadrature") {
    auto mod = Modulation::dbpsk();
    for (double g0 : {30.0, 300.0}) {
      double quad = avg_ber_from_cdf(
          [&](double g) { return channel::access_snr_cdf(link, g0, g); }, mod,
          1e-7);
      CHECK(access_avg_ber(link, g0, mod) == Approx(quad).epsilon(1e-3));
    }
  }
}

TEST_CASE("uplink") {
  MixedConfig mix;
  mix.backhaul = make_cfg(1, 500.0);
  mix.access = access_link(2.0, 1.0, 14.5);
  mix.gamma0_access = 500.0;
  mix.direction = Direction::uplink;
  mix.finalize();
  SUBCASE("combiner identity and edges") {
    double th = 1.0;
    double fb = ca_cdf(mix.backhaul, th).value;
    double fa = channel::access_snr_cdf(mix.access, mix.gamma0_access, th);
    double up = uplink_outage(mix, th).value;
    CHECK(up == Approx(1.0 - (1.0 - fb) * (1.0 - fa)).epsilon(1e-12));
    CHECK(uplink_outage(mix, 1e-14).value < 1e-8);
    CHECK(uplink_outage(mix, 1e14).value == Approx(1.0));
  }
  SUBCASE("against MC") {
    auto est =
        mc::estimate_outage(mix, mc::Combiner::uplink, 1.0, 400'000, 12);
    double an = uplink_outage(mix, 1.0).value;
    CHECK(std::abs(an - est.mean) <
          std::max(3.5 * est.std_error, 0.02 * est.mean));
  }
  SUBCASE("diversity values from the printed formula") {
    MixedConfig d1;
    d1.backhaul = make_cfg(1, 10.0, Relaying::ca, 2.0, 2.0);
    d1.access = access_link(8.0, 1.0, 14.5);
    d1.direction = Direction::uplink;
    CHECK(uplink_diversity(d1) == Approx(0.62).epsilon(0.02));
    d1.access = access_link(2.0, 5.0, 2.3);
    CHECK(uplink_diversity(d1) == Approx(1.15).epsilon(0.001));
    d1.backhaul = make_cfg(1, 10.0, Relaying::ca, 1.5, 1.0);
    d1.access = access_link(2.0, 5.0, 14.5);
    CHECK(uplink_diversity(d1) == Approx(0.75).epsilon(0.001));
  }
  SUBCASE("uplink BER combines the two link BERs") {
    auto mod = Modulation::dbpsk();
    double v = uplink_avg_ber(mix, mod).value;
    double pb = avg_ber_from_cdf(
        [&](double g) { return ca_cdf(mix.backhaul, g).value; }, mod, 1e-7);
    double pa = access_avg_ber(mix.access, mix.gamma0_access, mod);
    CHECK(v == Approx(pb + pa - pb * pa).epsilon(1e-10));
  }
}

TEST_CASE("fixed gain psi") {
  auto cfg1 = make_cfg(1, 180.0, Relaying::fg);
  double psi = psi_fixed_gain(cfg1);
  CHECK(psi > 1.0);
  // against an MC estimate of (E[(1+gamma)^{-1}])^{-1}
  mc::RngStream rng(31, 0);
  double s = 0.0;
  const long n = 400'000;
  for (long i = 0; i < n; ++i)
    s += 1.0 / (1.0 + mc::simulate_snr(cfg1, mc::Combiner::fg_exact, rng));
  CHECK(psi == Approx(n / s).epsilon(0.01));
  // monotone in the average SNR
  CHECK(psi_fixed_gain(make_cfg(1, 500.0, Relaying::fg)) > psi);
}

TEST_CASE("downlink statistics") {
  MixedConfig mix;
  mix.backhaul = make_cfg(1, 600.0, Relaying::fg);
  mix.access = access_link(2.0, 1.0, 14.5);
  mix.gamma0_access = 600.0;
  mix.direction = Direction::downlink;
  mix.finalize();
  CHECK(mix.psi > 1.0);

  SUBCASE("cdf against direct mixture quadrature and MC") {
    auto oracle = [&](double z) {
      auto f = [&](double u) {
        double x = std::exp(u);
        double arg = z * (x + mix.psi) / x;
        return x *
               channel::access_snr_pdf(mix.access, mix.gamma0_access, x) *
               channel::hop_snr_cdf(mix.backhaul.hops[0],
                                    mix.backhaul.gamma0s[0], arg);
      };
      double lg = std::log(mix.gamma0_access);
      return integrate(f, lg - 34.0, lg + 12.0,
                       {.rel_tol = 1e-9, .initial_splits = 32});
    };
    for (double z : {0.2, 1.0, 4.0}) {
      CHECK(dl_cdf(mix, z).value == Approx(oracle(z)).epsilon(5e-4));
    }
    auto est =
        mc::estimate_outage(mix, mc::Combiner::downlink, 1.0, 400'000, 9);
    CHECK(std::abs(dl_cdf(mix, 1.0).value - est.mean) <
          std::max(3.5 * est.std_error, 0.01 * est.mean));
  }
  SUBCASE("pdf consistent with the cdf derivative") {
    for (double z : {0.5, 2.0}) {
      double dz = 1e-3 * z;
      double fd =
          (dl_cdf(mix, z + dz).value - dl_cdf(mix, z - dz).value) / (2.0 * dz);
      CHECK(dl_pdf(mix, z) == Approx(fd).epsilon(1e-3));
    }
  }
  SUBCASE("BER expression equals direct quadrature") {
    auto mod = Modulation::dbpsk();
    double quad = avg_ber_from_cdf(
        [&](double g) { return dl_cdf(mix, g).value; }, mod, 1e-6);
    CHECK(dl_avg_ber(mix, mod).value == Approx(quad).epsilon(2e-3));
  }
  SUBCASE("monotone cdf reaching one") {
    double prev = 0.0;
    for (double z : {0.1, 1.0, 10.0, 100.0}) {
      double v = dl_cdf(mix, z).value;
      CHECK(v >= prev);
      prev = v;
    }
    CHECK(dl_cdf(mix, 2e4).value == Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("downlink asymptotics") {
  for (double g0 : {1e4, 1e5}) {
    MixedConfig mix;
    mix.backhaul = make_cfg(1, g0, Relaying::fg);
    mix.access = access_link(2.0, 1.0, 14.5);
    mix.gamma0_access = g0;
    mix.direction = Direction::downlink;
    mix.finalize();
    double exact = dl_cdf(mix, 1.0).value;
    double asym = dl_outage_asymptotic(mix, 1.0).value;
    CHECK(asym / exact == Approx(1.0).epsilon(g0 > 5e4 ? 0.06 : 0.15));
  }
  MixedConfig d;
  d.backhaul = make_cfg(1, 10.0, Relaying::fg, 2.0, 2.0);
  d.access = access_link(8.0, 1.0, 14.5);
  d.direction = Direction::downlink;
  CHECK(dl_diversity(d) == Approx(0.62).epsilon(0.02));
}

TEST_CASE("paper literal forms carry diagnostics") {
  auto lit = fg_moment_special_literal(table2_hop(2.0, 1.0), 50.0, 1.0, 2, 2);
  CHECK(lit.diag.degenerate_term);
  CHECK(lit.method == Method::paper_literal);
  auto cfg = make_cfg(2, 1e4);
  auto as = ca_outage_asymptotic_literal(cfg, 1.0);
  CHECK(as.method == Method::paper_literal);
}
