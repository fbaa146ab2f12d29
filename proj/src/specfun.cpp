#include "thz/specfun.hpp"

#include "thz/quad.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <limits>

namespace thz::specfun {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_nonpositive_integer(double x, double tol = 1e-12) {
  return x < 0.5 && std::abs(x - std::round(x)) < tol;
}

// Lanczos coefficients, g = 9, n = 11 (Godfrey); ~1e-15 relative for
// Re z >= 0.5 in double precision.
constexpr double kLanczos[11] = {
    1.000000000000000174663,      5716.400188274341379136,
    -14815.30426768413909044,     14291.49277657478554025,
    -6348.160217641458813289,     1301.608286058321874105,
    -108.1767053514369634679,     2.605696505611755827729,
    -0.7423452510201416151527e-2, 0.5384136432509564062961e-7,
    -0.4023533141268236372067e-8};

cplx log_gamma_core(cplx z) {
  // requires Re z >= 0.5
  z -= 1.0;
  cplx sum = kLanczos[0];
  for (int k = 1; k < 11; ++k)
    sum += kLanczos[k] / (z + static_cast<double>(k));
  cplx base = z + 9.5;  // z + g + 0.5
  return 0.91893853320467274178 /* ln sqrt(2 pi) */ +
         (z + 0.5) * std::log(base) - base + std::log(sum);
}

cplx log_sin_pi(cplx z) {
  if (z.imag() < 0.0) return std::conj(log_sin_pi(std::conj(z)));
  cplx iw = cplx(0.0, M_PI) * z;
  // sin(pi z) = e^{-i pi z} (1 - e^{2 i pi z}) * i/2, stable for Im z >= 0
  return -iw + std::log(1.0 - std::exp(2.0 * iw)) +
         cplx(-0.69314718055994531, M_PI_2);
}

}  // namespace

cplx log_gamma(cplx z) {
  if (z.imag() == 0.0 && is_nonpositive_integer(z.real()))
    throw DomainError("log_gamma: pole at non-positive integer");
  if (z.real() >= 0.5) return log_gamma_core(z);
  // reflection formula
  return 1.1447298858494001741 /* ln pi */ - log_sin_pi(z) -
         log_gamma_core(1.0 - z);
}

double gamma_fn(double z) {
  if (is_nonpositive_integer(z))
    throw DomainError("gamma_fn: pole at non-positive integer");
  return std::tgamma(z);
}

namespace {

// gamma(a,x) by series, a > 0.
double lower_series(double a, double x) {
  double term = 1.0 / a, sum = term, ak = a;
  for (int k = 0; k < 600; ++k) {
    ak += 1.0;
    term *= x / ak;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum * std::exp(a * std::log(x) - x);
}

// Gamma(a,x) by modified Lentz continued fraction, x > 0.
double upper_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 2000; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(a * std::log(x) - x) * h;
}

// E1(x) = Gamma(0,x) series, x <= 1.5.
double e1_series(double x) {
  double sum = -0.57721566490153286 - std::log(x);
  double term = 1.0;
  for (int k = 1; k < 80; ++k) {
    term *= -x / k;
    sum -= term / k;
    if (std::abs(term / k) < 1e-18 * std::abs(sum) + 1e-300) break;
  }
  return sum;
}

}  // namespace

namespace {

// log Gamma(a,x) for a < 0 via the x -> 0 expansion
//   Gamma(a,x) = Gamma(a) - x^a sum_k (-x)^k / (k! (a+k));
// the x^a part dominates the Gamma(a) correction for the (a, x) routed here.
// The sum is truncated before k reaches -a (where a+k would hit zero); the
// routing guarantees the terms are negligible well before that.
double log_upper_gamma_neg_series(double a, double x) {
  double series = 1.0 / (-a), term = 1.0;
  int kcap = std::min(400, static_cast<int>(std::floor(-a)));
  for (int k = 1; k < kcap; ++k) {
    term *= -x / k;
    series -= term / (a + k);
    if (std::abs(term) < 1e-18 * std::abs(series)) break;
  }
  double lead = a * std::log(x) + std::log(series);
  double n = std::round(a);
  if (a > -150.0 && std::abs(a - n) > 1e-8) {
    double log_abs_ga = std::lgamma(a);
    if (log_abs_ga - lead > -37.0) {
      int k = static_cast<int>(std::floor(-a));
      double sign = (k % 2 == 0) ? -1.0 : 1.0;  // Gamma sign on (-k-1, -k)
      return lead + std::log1p(sign * std::exp(log_abs_ga - lead));
    }
  }
  return lead;
}

}  // namespace

double upper_gamma(double a, double x) {
  if (x < 0.0) throw DomainError("upper_gamma: x < 0");
  if (x == 0.0) {
    if (a > 0.0) return gamma_fn(a);
    throw DomainError("upper_gamma: diverges at x = 0 for a <= 0");
  }
  if (a > 0.0)
    return (x < a + 1.0) ? gamma_fn(a) - lower_series(a, x) : upper_cf(a, x);
  if (x > std::abs(a) + 2.0) return upper_cf(a, x);
  if (a < -30.0 && x < 0.5 * std::abs(a))
    return std::exp(log_upper_gamma_neg_series(a, x));
  // downward recurrence from a+n in (0,1] (base E1 when a is an integer)
  int n = static_cast<int>(std::ceil(-a - 1e-12));
  double atil = a + n;
  double cur;
  if (atil > 1e-9) {
    cur = (x < atil + 1.0) ? gamma_fn(atil) - lower_series(atil, x)
                           : upper_cf(atil, x);
  } else {
    atil = 0.0;
    n = static_cast<int>(std::round(-a));
    cur = (x <= 1.5) ? e1_series(x) : upper_cf(0.0, x);
  }
  double ac = atil;
  for (int k = 0; k < n; ++k) {
    ac -= 1.0;
    cur = (cur - std::exp(ac * std::log(x) - x)) / ac;
  }
  return cur;
}

double log_upper_gamma(double a, double x) {
  if (a < 0.0 && (x < 0.05 || (a < -30.0 && x < 0.5 * std::abs(a))))
    return log_upper_gamma_neg_series(a, x);
  double v = upper_gamma(a, x);
  if (v <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(v);
}

double lower_gamma(double a, double x) {
  if (a <= 0.0) throw DomainError("lower_gamma: requires a > 0");
  if (x < 0.0) throw DomainError("lower_gamma: x < 0");
  if (x == 0.0) return 0.0;
  return (x < a + 1.0) ? lower_series(a, x) : gamma_fn(a) - upper_cf(a, x);
}

double reg_lower_gamma(double a, double x) {
  if (a <= 0.0) throw DomainError("reg_lower_gamma: requires a > 0");
  if (x < 0.0) throw DomainError("reg_lower_gamma: x < 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) {
    double term = 1.0 / a, sum = term, ak = a;
    for (int k = 0; k < 600; ++k) {
      ak += 1.0;
      term *= x / ak;
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return sum * std::exp(a * std::log(x) - x - std::lgamma(a));
  }
  return 1.0 - upper_cf(a, x) / std::exp(std::lgamma(a));
}

double bessel_k(double nu, double x) {
  if (x <= 0.0) throw DomainError("bessel_k: requires x > 0");
  return std::cyl_bessel_k(std::abs(nu), x);
}

// --------------------------------------------------------------------------
// Fox H machinery
// --------------------------------------------------------------------------

bool FoxHSpec::unit_scales() const {
  for (const auto& g : upper)
    if (std::abs(g.scale - 1.0) > 1e-12) return false;
  for (const auto& g : lower)
    if (std::abs(g.scale - 1.0) > 1e-12) return false;
  return true;
}

void FoxHSpec::validate() const {
  if (m < 0 || n < 0 || m > q || n > p)
    throw DomainError("FoxHSpec: require 0 <= m <= q, 0 <= n <= p");
  if (static_cast<int>(upper.size()) != p ||
      static_cast<int>(lower.size()) != q)
    throw DomainError("FoxHSpec: parameter list lengths disagree with p,q");
  for (const auto& g : upper)
    if (!(g.scale > 0.0)) throw DomainError("FoxHSpec: scales must be > 0");
  for (const auto& g : lower)
    if (!(g.scale > 0.0)) throw DomainError("FoxHSpec: scales must be > 0");
}

void MultiFoxHSpec::validate() const {
  if (nvars < 1) throw DomainError("MultiFoxHSpec: nvars >= 1");
  if (static_cast<int>(blocks.size()) != nvars)
    throw DomainError("MultiFoxHSpec: one block per variable required");
  if (outer_n < 0 || outer_n > static_cast<int>(outer_upper.size()))
    throw DomainError("MultiFoxHSpec: outer_n out of range");
  for (const auto& o : outer_upper)
    if (static_cast<int>(o.scales.size()) != nvars)
      throw DomainError("MultiFoxHSpec: outer scale vector length != nvars");
  for (const auto& o : outer_lower)
    if (static_cast<int>(o.scales.size()) != nvars)
      throw DomainError("MultiFoxHSpec: outer scale vector length != nvars");
  for (const auto& b : blocks) b.validate();
}

MellinIntegrand to_integrand(const MultiFoxHSpec& spec) {
  spec.validate();
  MellinIntegrand ig;
  ig.nvars = spec.nvars;
  auto unit = [&](int i, double c) {
    std::vector<double> v(spec.nvars, 0.0);
    v[i] = c;
    return v;
  };
  for (int i = 0; i < spec.nvars; ++i) {
    const FoxHSpec& b = spec.blocks[i];
    for (int j = 0; j < b.q; ++j) {
      if (j < b.m)
        ig.factors.push_back({b.lower[j].shift, unit(i, b.lower[j].scale), true});
      else
        ig.factors.push_back(
            {1.0 - b.lower[j].shift, unit(i, -b.lower[j].scale), false});
    }
    for (int j = 0; j < b.p; ++j) {
      if (j < b.n)
        ig.factors.push_back(
            {1.0 - b.upper[j].shift, unit(i, -b.upper[j].scale), true});
      else
        ig.factors.push_back({b.upper[j].shift, unit(i, b.upper[j].scale), false});
    }
  }
  for (std::size_t j = 0; j < spec.outer_upper.size(); ++j) {
    const auto& o = spec.outer_upper[j];
    std::vector<double> neg(o.scales);
    for (auto& c : neg) c = -c;
    if (static_cast<int>(j) < spec.outer_n)
      ig.factors.push_back({1.0 - o.shift, neg, true});
    else
      ig.factors.push_back({o.shift, o.scales, false});
  }
  for (const auto& o : spec.outer_lower) {
    std::vector<double> neg(o.scales);
    for (auto& c : neg) c = -c;
    ig.factors.push_back({1.0 - o.shift, neg, false});
  }
  return ig;
}

namespace {

int nonzero_count(const std::vector<double>& c) {
  int k = 0;
  for (double v : c)
    if (v != 0.0) ++k;
  return k;
}

struct VarBounds {
  double left = -kInf;   // max over left pole family heads
  double right = kInf;   // min over right pole family heads
};

// Per-variable pole families from single-variable numerator factors.
std::vector<VarBounds> pole_bounds(const MellinIntegrand& ig) {
  std::vector<VarBounds> vb(ig.nvars);
  for (const auto& f : ig.factors) {
    if (!f.numerator || nonzero_count(f.coeffs) != 1) continue;
    for (int i = 0; i < ig.nvars; ++i) {
      double c = f.coeffs[i];
      if (c == 0.0) continue;
      double head = -f.shift / c;
      if (c > 0.0)
        vb[i].left = std::max(vb[i].left, head);
      else
        vb[i].right = std::min(vb[i].right, head);
    }
  }
  return vb;
}

double reduced_shift(const GammaFactor& f, const std::vector<double>& sigma) {
  double r = f.shift;
  for (std::size_t i = 0; i < sigma.size(); ++i) r += f.coeffs[i] * sigma[i];
  return r;
}

// Magnitude of the log-integrand slightly off the real axis; used to steer
// the contour toward the saddle so huge oscillatory cancellation is avoided.
double line_magnitude(const MellinIntegrand& ig, const std::vector<double>& lz,
                      const std::vector<double>& sigma) {
  double m = 0.0;
  for (const auto& f : ig.factors) {
    cplx arg(f.shift, 0.0);
    for (int i = 0; i < ig.nvars; ++i)
      arg += f.coeffs[i] * cplx(sigma[i], 0.5);
    m += (f.numerator ? 1.0 : -1.0) * log_gamma(arg).real();
  }
  for (int i = 0; i < ig.nvars; ++i) m -= sigma[i] * lz[i];
  return m;
}

std::vector<double> place_contours(const MellinIntegrand& ig,
                                   const ContourConfig& cfg,
                                   const std::vector<double>& logz) {
  const auto vb = pole_bounds(ig);
  std::vector<double> sigma(ig.nvars, 0.0);
  const bool overridden = !cfg.shift.empty();
  if (overridden) {
    if (static_cast<int>(cfg.shift.size()) != ig.nvars)
      throw ContourError("contour shift override has wrong arity");
    sigma = cfg.shift;
  } else {
    for (int i = 0; i < ig.nvars; ++i) {
      bool hl = std::isfinite(vb[i].left), hr = std::isfinite(vb[i].right);
      if (hl && hr)
        sigma[i] = 0.5 * (vb[i].left + vb[i].right);
      else if (hl)
        sigma[i] = vb[i].left + cfg.empty_side_margin;
      else if (hr)
        sigma[i] = vb[i].right - cfg.empty_side_margin;
      else
        sigma[i] = 0.0;
    }
  }
  if (overridden && cfg.trust_shift) {
    // caller-chosen analytic-continuation contour: only require that no pole
    // sits on the line itself
    for (const auto& f : ig.factors) {
      if (!f.numerator || nonzero_count(f.coeffs) != 1) continue;
      for (int i = 0; i < ig.nvars; ++i) {
        double c = f.coeffs[i];
        if (c == 0.0) continue;
        double red = f.shift + c * sigma[i];
        if (red < 0.5 && std::abs(red - std::round(red)) < 1e-9)
          throw ContourError("trusted contour passes through a gamma pole");
      }
    }
    return sigma;
  }
  // Pole separation is an error, never a silent result.
  for (int i = 0; i < ig.nvars; ++i) {
    if (!(vb[i].left < sigma[i] && sigma[i] < vb[i].right))
      throw ContourError(
          "contour placement: no vertical line separates the pole families "
          "(variable " + std::to_string(i) + ")");
  }
  // Coupled numerator factors must keep a positive real argument on the
  // contour; nudge shifts inside their single-variable bounds if needed.
  // The target keeps the integrand's near-pole ridge wide enough for the
  // panel rule to resolve.
  const double target = 0.6;
  for (int pass = 0; pass < 120; ++pass) {
    const GammaFactor* worst = nullptr;
    double worst_red = target;
    for (const auto& f : ig.factors) {
      if (!f.numerator || nonzero_count(f.coeffs) < 2) continue;
      double red = reduced_shift(f, sigma);
      if (red < worst_red) {
        worst_red = red;
        worst = &f;
      }
    }
    if (!worst) break;
    double need = target - worst_red;
    int best = -1;
    double best_room = 0.0;
    for (int i = 0; i < ig.nvars; ++i) {
      double c = worst->coeffs[i];
      if (c == 0.0) continue;
      double room;
      if (c > 0.0)
        room = std::isfinite(vb[i].right)
                   ? 0.5 * (vb[i].right - sigma[i])
                   : 4.0;
      else
        room = std::isfinite(vb[i].left) ? 0.5 * (sigma[i] - vb[i].left) : 4.0;
      if (room * std::abs(c) > best_room) {
        best_room = room * std::abs(c);
        best = i;
      }
    }
    if (best < 0 || best_room < 1e-9) break;  // pushed as far as bounds allow
    double c = worst->coeffs[best];
    double step = std::min(need / std::abs(c), best_room / std::abs(c) * 0.9);
    sigma[best] += (c > 0.0 ? step : -step);
  }
  auto coupled_floor = [&](const std::vector<double>& s, double floor) {
    for (const auto& f : ig.factors) {
      if (!f.numerator || nonzero_count(f.coeffs) < 2) continue;
      if (reduced_shift(f, s) <= floor) return false;
    }
    return true;
  };
  auto coupled_ok = [&](const std::vector<double>& s) {
    return coupled_floor(s, std::min(0.3, 0.5 * target));
  };
  if (!coupled_floor(sigma, 0.04))
    throw ContourError("contour placement: coupled gamma factor infeasible");

  // Slide each shift toward the on-line magnitude minimum (saddle); any line
  // inside the admissible strip carries the same value, but the conditioning
  // differs by orders of magnitude.
  if (!overridden) {
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (int i = 0; i < ig.nvars; ++i) {
        std::vector<double> cand;
        bool hl = std::isfinite(vb[i].left), hr = std::isfinite(vb[i].right);
        if (hl && hr) {
          double gap = vb[i].right - vb[i].left;
          for (int k = 1; k < 32; ++k)
            cand.push_back(vb[i].left + gap * k / 32.0);
        } else if (hl) {
          for (double m = 0.5 * cfg.empty_side_margin; m < 4096.0; m *= 1.7)
            cand.push_back(vb[i].left + m);
        } else if (hr) {
          for (double m = 0.5 * cfg.empty_side_margin; m < 4096.0; m *= 1.7)
            cand.push_back(vb[i].right - m);
        } else {
          for (double m = -64.0; m <= 64.0; m += 2.0) cand.push_back(m);
        }
        double best_mag = line_magnitude(ig, logz, sigma);
        for (double c : cand) {
          std::vector<double> trial = sigma;
          trial[i] = c;
          if (!coupled_ok(trial)) continue;
          double mag = line_magnitude(ig, logz, trial);
          if (mag < best_mag) {
            best_mag = mag;
            sigma[i] = c;
          }
        }
        // local refinement: the ladder is geometric and can sit well above
        // the saddle, which costs digits of cancellation
        double lo = sigma[i], hi = sigma[i];
        if (hl && hr) {
          double gap = vb[i].right - vb[i].left;
          lo = std::max(vb[i].left + gap / 64.0, sigma[i] - gap / 16.0);
          hi = std::min(vb[i].right - gap / 64.0, sigma[i] + gap / 16.0);
        } else if (hl) {
          double m = sigma[i] - vb[i].left;
          lo = vb[i].left + m / 1.8;
          hi = vb[i].left + m * 1.8;
          if (std::isfinite(vb[i].right))
            hi = std::min(hi, 0.5 * (sigma[i] + vb[i].right));
        } else if (hr) {
          double m = vb[i].right - sigma[i];
          lo = vb[i].right - m * 1.8;
          hi = vb[i].right - m / 1.8;
          if (std::isfinite(vb[i].left))
            lo = std::max(lo, 0.5 * (sigma[i] + vb[i].left));
        } else {
          lo = sigma[i] - 2.0;
          hi = sigma[i] + 2.0;
        }
        auto mag_at = [&](double c) {
          std::vector<double> trial = sigma;
          trial[i] = c;
          if (!coupled_ok(trial)) return kInf;
          return line_magnitude(ig, logz, trial);
        };
        for (int it = 0; it < 48 && hi - lo > 1e-9 * (1.0 + std::abs(hi));
             ++it) {
          double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
          if (mag_at(m1) < mag_at(m2))
            hi = m2;
          else
            lo = m1;
        }
        double mid = 0.5 * (lo + hi);
        if (mag_at(mid) < best_mag) sigma[i] = mid;
      }
    }
  }
  return sigma;
}

// Exponential decay rate (units of pi/2) along direction d in Im-space.
double decay_rate(const MellinIntegrand& ig, const std::vector<double>& d) {
  double r = 0.0;
  for (const auto& f : ig.factors) {
    double cd = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) cd += f.coeffs[i] * d[i];
    r += (f.numerator ? 1.0 : -1.0) * std::abs(cd);
  }
  return r;
}

// Distance from the contour line of variable i to the nearest real-axis pole
// of any of its single-variable numerator factors; the integrand peak width
// near the axis scales with this distance.
double nearest_pole_dist(const MellinIntegrand& ig, int i,
                         const std::vector<double>& sigma) {
  double dist = 10.0;
  for (const auto& f : ig.factors) {
    if (!f.numerator || nonzero_count(f.coeffs) != 1) continue;
    double c = f.coeffs[i];
    if (c == 0.0) continue;
    double arg = f.shift + c * sigma[i];
    double k_near = std::max(0.0, std::round(-arg));
    dist = std::min(dist, std::abs(arg + k_near) / std::abs(c));
  }
  return dist;
}

double min_decay_rate(const MellinIntegrand& ig) {
  double mn = kInf;
  const int n = ig.nvars;
  std::vector<double> d(n, 0.0);
  for (int i = 0; i < n; ++i) {
    std::fill(d.begin(), d.end(), 0.0);
    d[i] = 1.0;
    mn = std::min(mn, decay_rate(ig, d));
  }
  for (int mask = 0; mask < (1 << (n - 1)); ++mask) {
    d[0] = 1.0;
    for (int i = 1; i < n; ++i) d[i] = (mask >> (i - 1)) & 1 ? -1.0 : 1.0;
    mn = std::min(mn, decay_rate(ig, d));
  }
  return mn;
}

struct VarNodes {
  double sigma = 0.0;
  std::vector<double> y, w;   // mirrored nodes, GL weight * halfwidth
  std::vector<char> shell;    // node lies in the outermost panel
};

VarNodes build_nodes(double sigma, double height, int panels, int nodes,
                     const GaussLegendre& gl) {
  VarNodes vn;
  vn.sigma = sigma;
  double w = height / panels;
  vn.y.reserve(2 * panels * nodes);
  for (int p = 0; p < panels; ++p) {
    double y0 = p * w, half = 0.5 * w, mid = y0 + half;
    for (int k = 0; k < nodes; ++k) {
      double yy = mid + half * gl.x[k];
      double ww = gl.w[k] * half;
      vn.y.push_back(yy);
      vn.w.push_back(ww);
      vn.shell.push_back(p == panels - 1);
      vn.y.push_back(-yy);
      vn.w.push_back(ww);
      vn.shell.push_back(p == panels - 1);
    }
  }
  return vn;
}

// Result in log-scaled form: total = scaled * exp(scale_log), keeping values
// meaningful far beyond the double over/underflow range.
struct EvalResultRaw {
  cplx scaled{0.0, 0.0};
  double scale_log = -kInf;
  double shell_ratio = 0.0;
  double max_term_log = -kInf;
  long nodes = 0;
  double log_abs() const {
    double a = std::abs(scaled);
    return a > 0.0 ? scale_log + std::log(a) : -kInf;
  }
};

// Streaming log-scaled accumulator.
struct Accum {
  double scale = -kInf;
  cplx acc{0.0, 0.0};
  void add(cplx logval, double weight) {
    double m = logval.real() + std::log(weight);
    if (!std::isfinite(m)) return;  // underflowed term
    if (m > scale + 1.0) {
      if (std::isfinite(scale)) acc *= std::exp(scale - m);
      scale = m;
    }
    acc += std::exp(logval - scale) * weight;
  }
  cplx value() const {
    return std::isfinite(scale) ? acc * std::exp(cplx(scale, 0.0)) : cplx{};
  }
};

EvalResultRaw evaluate_tensor(const MellinIntegrand& ig,
                              const std::vector<double>& logz,
                              const std::vector<VarNodes>& vars) {
  const int n = ig.nvars;
  // Split factors: single-variable ones are folded into per-node base logs.
  std::vector<const GammaFactor*> coupled;
  double const_log_sign = 1.0;
  cplx const_log{0.0, 0.0};
  for (const auto& f : ig.factors) {
    int nz = nonzero_count(f.coeffs);
    if (nz >= 2) {
      coupled.push_back(&f);
    } else if (nz == 0) {
      const_log += (f.numerator ? 1.0 : -1.0) * log_gamma(cplx(f.shift, 0.0));
    }
  }
  (void)const_log_sign;

  std::vector<std::vector<cplx>> base(n);
  for (int i = 0; i < n; ++i) {
    const auto& vn = vars[i];
    base[i].resize(vn.y.size());
    for (std::size_t k = 0; k < vn.y.size(); ++k) {
      cplx s(vn.sigma, vn.y[k]);
      cplx b = -s * logz[i];
      for (const auto& f : ig.factors) {
        if (nonzero_count(f.coeffs) != 1 || f.coeffs[i] == 0.0) continue;
        cplx lg = log_gamma(f.shift + f.coeffs[i] * s);
        b += f.numerator ? lg : -lg;
      }
      base[i][k] = b;
    }
  }

  EvalResultRaw out;
  Accum accum, shell_accum;
  std::vector<std::size_t> idx(n, 0);
  std::vector<cplx> s(n);
  long nodes = 1;
  for (int i = 0; i < n; ++i) nodes *= static_cast<long>(vars[i].y.size());
  out.nodes = nodes;

  // odometer loop over the tensor grid
  std::vector<std::size_t> sizes(n);
  for (int i = 0; i < n; ++i) sizes[i] = vars[i].y.size();
  bool done = false;
  while (!done) {
    cplx lv = const_log;
    double wgt = 1.0;
    bool in_shell = false;
    for (int i = 0; i < n; ++i) {
      std::size_t k = idx[i];
      lv += base[i][k];
      wgt *= vars[i].w[k];
      in_shell = in_shell || vars[i].shell[k];
      s[i] = cplx(vars[i].sigma, vars[i].y[k]);
    }
    for (const auto* f : coupled) {
      cplx arg(f->shift, 0.0);
      for (int i = 0; i < n; ++i) arg += f->coeffs[i] * s[i];
      cplx lg = log_gamma(arg);
      lv += f->numerator ? lg : -lg;
    }
    out.max_term_log = std::max(out.max_term_log, lv.real() + std::log(wgt));
    accum.add(lv, wgt);
    if (in_shell) shell_accum.add(lv, wgt);
    for (int i = 0;; ++i) {
      if (i == n) {
        done = true;
        break;
      }
      if (++idx[i] < sizes[i]) break;
      idx[i] = 0;
    }
  }
  double norm_log = n * std::log(2.0 * M_PI);
  out.scaled = accum.acc;
  out.scale_log = accum.scale - norm_log;
  double tot_abs = std::abs(accum.acc);
  if (tot_abs > 0.0 && std::isfinite(shell_accum.scale)) {
    out.shell_ratio = std::abs(shell_accum.acc) / tot_abs *
                      std::exp(shell_accum.scale - accum.scale);
  }
  out.max_term_log -= norm_log;
  return out;
}

}  // namespace

double mellin_barnes(const MellinIntegrand& ig, const std::vector<double>& z,
                     const ContourConfig& cfg, ContourDiagnostics* diag) {
  if (static_cast<int>(z.size()) != ig.nvars)
    throw DomainError("mellin_barnes: argument arity mismatch");
  for (double v : z)
    if (!(v > 0.0)) throw DomainError("mellin_barnes: arguments must be > 0");
  for (const auto& f : ig.factors)
    if (static_cast<int>(f.coeffs.size()) != ig.nvars)
      throw DomainError("mellin_barnes: factor coefficient arity mismatch");

  std::vector<double> logz(ig.nvars);
  for (int i = 0; i < ig.nvars; ++i) logz[i] = std::log(z[i]);

  const auto sigma = place_contours(ig, cfg, logz);
  const double rate_units = min_decay_rate(ig);
  if (rate_units <= 0.02)
    throw ConvergenceError("mellin_barnes: integrand does not decay on the contour");

  // When even the saddle magnitude sits far below the double underflow line,
  // zero is the honest value; skip the quadrature entirely.
  double peak_est = line_magnitude(ig, logz, sigma) +
                    static_cast<double>(ig.factors.size()) + 8.0;
  if (peak_est < -745.0) {
    if (diag) {
      *diag = {};
      diag->shift = sigma;
      diag->converged = true;
      diag->at_noise_floor = true;
    }
    return 0.0;
  }

  // per-variable decay for truncation heights. The exponential rate only
  // applies beyond |y| ~ Re(arg); for saddle contours at large shifts the
  // near-axis behavior is Gaussian with curvature sum c^2/(2 Re).
  std::vector<double> rate(ig.nvars), smax(ig.nvars, 0.0), hgauss(ig.nvars);
  const double target_log = std::log(1.0 / cfg.tolerance) + 13.0;
  for (int i = 0; i < ig.nvars; ++i) {
    std::vector<double> d(ig.nvars, 0.0);
    d[i] = 1.0;
    rate[i] = decay_rate(ig, d) * M_PI_2;
    double kappa = 0.0;
    for (const auto& f : ig.factors) {
      smax[i] += std::abs(f.coeffs[i]);
      double c = f.coeffs[i];
      if (c == 0.0) continue;
      double red = reduced_shift(f, sigma);
      if (red > 0.5)
        kappa += (f.numerator ? 1.0 : -1.0) * c * c / (2.0 * red);
    }
    double base = target_log / rate[i];
    // kappa <= 0 just means the Gaussian regime estimate does not apply; the
    // tail-extension loop is the backstop then
    hgauss[i] = kappa > 1e-9
                    ? std::min(std::sqrt(target_log / kappa), 60.0 * base)
                    : base;
  }

  const double tol = cfg.tolerance;
  double stretch = 1.0;
  GaussLegendre gl(cfg.nodes), gl2(2 * cfg.nodes);
  double last_delta = 0.0;
  for (int extension = 0, refine = 0;;) {
    std::vector<VarNodes> vars(ig.nvars), vars2(ig.nvars);
    long tuples2 = 1;
    for (int i = 0; i < ig.nvars; ++i) {
      double H = cfg.half_height > 0.0
                     ? cfg.half_height
                     : stretch * std::max(target_log / rate[i], hgauss[i]);
      double omega = std::abs(logz[i]);
      for (const auto& f : ig.factors) {
        double c = std::abs(f.coeffs[i]);
        if (c > 0.0) omega += c * std::log(2.0 + c * H);
      }
      // refinement halves the panel width; a nearby pole narrows the
      // integrand peak and caps the width as well
      double w = 2.0 * M_PI * (cfg.nodes / 8.0) /
                 (std::max(omega, 0.5) * (1 << refine));
      w = std::min(w, std::max(2.5 * nearest_pole_dist(ig, i, sigma), 1e-3));
      int panels = std::max(2, static_cast<int>(std::ceil(H / w)));
      if (panels > cfg.max_panels)
        throw ConvergenceError("mellin_barnes: panel budget exceeded");
      vars[i] = build_nodes(sigma[i], H, panels, cfg.nodes, gl);
      vars2[i] = build_nodes(sigma[i], H, panels, 2 * cfg.nodes, gl2);
      tuples2 *= static_cast<long>(vars2[i].y.size());
    }
    if (tuples2 > 16'000'000L)
      throw ConvergenceError(
          "mellin_barnes: node budget exceeded (each added variable "
          "multiplies cost; see ContourConfig::nvars_cap)");

    EvalResultRaw r1 = evaluate_tensor(ig, logz, vars);
    if (cfg.half_height <= 0.0 && r1.shell_ratio > 0.1 * tol &&
        extension < 12) {
      stretch *= 1.7;
      ++extension;
      continue;
    }
    EvalResultRaw best = r1;
    double doubling_delta = 0.0;
    bool noise_floor = false;
    if (cfg.check_doubling) {
      EvalResultRaw r2 = evaluate_tensor(ig, logz, vars2);
      // compare in a common log scale so the contract survives values far
      // outside the double range
      double m = std::max(r1.scale_log, r2.scale_log);
      cplx t1 = std::isfinite(r1.scale_log)
                    ? r1.scaled * std::exp(r1.scale_log - m)
                    : cplx{};
      cplx t2 = std::isfinite(r2.scale_log)
                    ? r2.scaled * std::exp(r2.scale_log - m)
                    : cplx{};
      double denom = std::max(std::abs(t2), 1e-300);
      doubling_delta = std::abs(t2 - t1) / denom;
      best = r2;
      // below the cancellation noise floor the relative contract is void;
      // the value is then certifiably negligible on the integrand scale
      double delta_log = std::log(std::max(std::abs(t2 - t1), 1e-300)) + m;
      noise_floor = delta_log <= best.max_term_log - 29.9 &&
                    best.log_abs() <= best.max_term_log - 23.0;
      if (doubling_delta > std::max(tol, 1e-12) && !noise_floor) {
        if (refine < 3) {
          ++refine;
          last_delta = doubling_delta;
          continue;
        }
        throw ConvergenceError(
            "mellin_barnes: node doubling changed the result by " +
            std::to_string(doubling_delta) + " (after refinement from " +
            std::to_string(last_delta) + ")");
      }
    }

    double abs_scaled = std::abs(best.scaled);
    double imag_res =
        abs_scaled > 0.0 ? std::abs(best.scaled.imag()) / abs_scaled : 0.0;
    double cancel = (best.max_term_log - best.log_abs()) / M_LN10;
    if (!std::isfinite(cancel)) cancel = 0.0;
    double allowed = std::max(1e-9, std::pow(10.0, cancel - 11.0));
    if (imag_res > allowed && !noise_floor)
      throw ConvergenceError(
          "mellin_barnes: conjugate-symmetry residual " +
          std::to_string(imag_res) + " exceeds tolerance");

    if (diag) {
      diag->shift = sigma;
      diag->half_height = vars[0].y.empty() ? 0.0 : std::abs(vars[0].y[vars[0].y.size() - 1]);
      diag->nodes = best.nodes;
      diag->imag_residual = imag_res;
      diag->doubling_delta = doubling_delta;
      diag->log10_cancellation = std::max(0.0, cancel);
      diag->converged = true;
      diag->at_noise_floor = noise_floor;
    }
    if (std::getenv("THZLINK_CONTOUR_DEBUG")) {
      std::fprintf(stderr, "[contour] nvars=%d shift=(", ig.nvars);
      for (int i = 0; i < ig.nvars; ++i)
        std::fprintf(stderr, "%s%.4f", i ? "," : "", sigma[i]);
      std::fprintf(stderr,
                   ") nodes=%ld imag_res=%.2e doubling=%.2e cancel=10^%.1f\n",
                   best.nodes, imag_res, doubling_delta, std::max(0.0, cancel));
    }
    // exact underflow to zero is the honest value outside the double range
    double lg_total = best.log_abs();
    if (lg_total < -700.0) return 0.0;
    if (lg_total > 700.0)
      throw ConvergenceError("mellin_barnes: result overflows double range");
    return best.scaled.real() * std::exp(best.scale_log);
  }
}

double fox_h(const FoxHSpec& spec, double x, const ContourConfig& cfg,
             ContourDiagnostics* diag) {
  spec.validate();
  if (!(x > 0.0)) throw DomainError("fox_h: requires x > 0");
  MultiFoxHSpec ms;
  ms.nvars = 1;
  ms.blocks = {spec};
  return mellin_barnes(to_integrand(ms), {x}, cfg, diag);
}

double meijer_g(const FoxHSpec& spec, double x, const ContourConfig& cfg,
                ContourDiagnostics* diag) {
  if (!spec.unit_scales())
    throw DomainError("meijer_g: spec has non-unit scales (use fox_h)");
  return fox_h(spec, x, cfg, diag);
}

double fox_h_multivariate(const MultiFoxHSpec& spec,
                          const std::vector<double>& xs,
                          const ContourConfig& cfg,
                          ContourDiagnostics* diag) {
  spec.validate();
  if (spec.nvars > cfg.nvars_cap)
    throw DomainError(
        "fox_h_multivariate: nvars exceeds the configured cap; cost grows "
        "exponentially with dimension (raise ContourConfig::nvars_cap only "
        "for small node budgets)");
  if (static_cast<int>(xs.size()) != spec.nvars)
    throw DomainError("fox_h_multivariate: argument count != nvars");
  return mellin_barnes(to_integrand(spec), xs, cfg, diag);
}

double fox_h_bivariate(const MultiFoxHSpec& spec, double x1, double x2,
                       const ContourConfig& cfg, ContourDiagnostics* diag) {
  if (spec.nvars != 2)
    throw DomainError("fox_h_bivariate: spec.nvars must be 2");
  return fox_h_multivariate(spec, {x1, x2}, cfg, diag);
}

}  // namespace thz::specfun
