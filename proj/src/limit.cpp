#include "qcost/limit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qcost/quad.hpp"

namespace qcost {

namespace {

double overlap(const FundamentalInterval& iv, double x, double y) {
  return std::max(0.0, std::min(iv.b, y) - std::max(iv.a, x));
}

// weight of depth j in the prefix-sum form of integral beta^p:
// beta^p = sum_j [(j+1)^p - j^p] 1(both keys share a depth-j prefix).
double depth_weight(double p, double j) {
  if (p == 1.0) return 1.0;
  return std::pow(j + 1.0, p) - std::pow(j, p);
}

// Bound on sum_{j > k} [(j+1)^p - j^p] * (depth-j overlap mass), where the
// depth-k interval of t has width pk and the window (x,y) has measure span.
// The chain width decays with the source; the window cap is depth-free, so it
// must stay outside the geometric factor.
double prefix_tail_bound(const PiDecay& decay, double p, std::uint32_t k, double pk, double span) {
  if (decay.geometric) {
    double rate = decay.rate;
    double acc = 0.0, term;
    double chain = pk;
    for (std::uint32_t d = 1; d <= 20000; ++d) {
      chain *= rate;
      term = depth_weight(p, double(k) + d) * std::min(chain, span);
      acc += term;
      double q = rate * std::pow((double(k) + d + 2.0) / (double(k) + d + 1.0), p);
      if (chain <= span && q < 1.0 && term * q / (1.0 - q) < 1e-6 * acc + 1e-300) {
        acc += term * q / (1.0 - q);
        return acc;
      }
    }
    return std::numeric_limits<double>::infinity();
  }
  double gamma = decay.gamma, A = decay.amplitude;
  if (gamma <= p)
    throw std::invalid_argument(
        "cost power is not integrable under this source's polynomial tail decay");
  double acc = 0.0;
  std::uint32_t J = k + 64;
  for (std::uint32_t j = k + 1; j <= J; ++j)
    acc += depth_weight(p, j) *
           std::min(std::min(pk, span), A * std::pow(double(j) + 1.0, -gamma));
  // remainder: sum_{j>J} p (j+1)^(p-1) A (j+1)^-gamma <= pA (J+1)^(p-gamma)/(gamma-p)
  acc += std::max(p, 1.0) * A * std::pow(double(J) + 1.0, p - gamma) / (gamma - p);
  return acc;
}

// Prefix-chain evaluation of integral over (x,y) of beta^p(u,t) du for
// symbol-counting costs: sum over depths of weight times the overlap of t's
// depth-j interval with (x,y).
double integral_symbol_prefix(const SourceModel& src, double p, double t, double x, double y,
                              double tol) {
  KeyStream ts(src, t, 0);
  PiDecay decay = src.pi_decay();
  long double acc = 0.0;
  for (std::uint32_t k = 0;; ++k) {
    FundamentalInterval iv = (k == 0) ? FundamentalInterval{0.0, 1.0} : [&] {
      auto sym = ts.deterministic_symbol(k - 1);
      if (!sym)
        throw truncation_error("seed resolution exhausted before the requested tolerance");
      return ts.interval_at_depth(k);
    }();
    acc += depth_weight(p, k) * overlap(iv, x, y);
    double tail = prefix_tail_bound(decay, p, k, iv.width(), y - x);
    if (tail <= tol) return double(acc);
  }
}

// Indicator cost: beta = 1 iff the keys share a prefix of length i0-1, so the
// integral is the overlap of that single interval.
double integral_indicator(const SourceModel& src, std::uint32_t i0, double t, double x, double y) {
  if (i0 == 1) return y - x;
  KeyStream ts(src, t, 0);
  auto sym = ts.deterministic_symbol(i0 - 2);
  if (!sym) throw truncation_error("seed resolution exhausted at the indicator position");
  return overlap(ts.interval_at_depth(i0 - 1), x, y);
}

// Positional tables are constant on each sibling of t's prefix chain: a word
// that splits from t after k shared symbols pays the k same-symbol entries
// plus one entry for the first differing pair. The integral over (x,y) is an
// exact series over depths. Every entry is capped by M, so the truncated part
// sits under M^p times the symbol-cost tail at the same depth.
double integral_positional_prefix(const SourceModel& src, const PositionalTable& table, double p,
                                  double t, double x, double y, double tol) {
  KeyStream ts(src, t, 0);
  PiDecay decay = src.pi_decay();
  double M = std::max(table.max_entry(), table.tail_default);
  double Mp = std::pow(M, p);
  std::uint32_t r = src.alphabet_size();
  std::vector<double> cond(r);
  SourceModel::State state = src.initial_state();
  long double acc = 0.0;
  long double shared = 0.0;  // sum of same-symbol entries along t's prefix
  for (std::uint32_t k = 0;; ++k) {
    FundamentalInterval iv = (k == 0) ? FundamentalInterval{0.0, 1.0} : [&] {
      auto sym = ts.deterministic_symbol(k - 1);
      if (!sym)
        throw truncation_error("seed resolution exhausted before the requested tolerance");
      return ts.interval_at_depth(k);
    }();
    double rem = overlap(iv, x, y);
    double tail = Mp * (std::pow(double(k) + 1.0, p) * rem +
                        prefix_tail_bound(decay, p, k, iv.width(), y - x));
    if (rem == 0.0 || tail <= tol) return double(acc);
    auto sym = ts.deterministic_symbol(k);
    if (!sym)
      throw truncation_error("seed resolution exhausted before the requested tolerance");
    src.conditional(state, cond);
    double lo = iv.a;
    double width = iv.width();
    for (Symbol c = 0; c < r; ++c) {
      double hi = (c + 1 == r) ? iv.b : lo + cond[c] * width;
      if (c != *sym && hi > lo) {
        double w = overlap({lo, hi}, x, y);
        if (w > 0.0) {
          double beta = double(shared) + table.value(k + 1, *sym, c);
          acc += (p == 1.0 ? beta : std::pow(beta, p)) * w;
        }
      }
      lo = std::max(lo, hi);
    }
    shared += table.value(k + 1, *sym, *sym);
    state = src.advance(state, *sym);
  }
}

}  // namespace

namespace detail {

double integral_beta_one_sided(const SourceModel& src, const CostModel& cost, double p,
                               double fixed, double lo, double hi, double tol,
                               const TameParams& tame) {
  double width = hi - lo;
  if (!(width > 0.0)) return 0.0;
  bool fixed_low = fixed == lo;
  if (!fixed_low && fixed != hi)
    throw std::invalid_argument("one-sided integral: fixed point must be an endpoint");
  double peps = p * tame.epsilon;
  if (peps >= 1.0)
    throw std::invalid_argument("cost power is not integrable at this tameness exponent");
  double cp = std::pow(tame.c, p);

  // Sliver of height h next to the singular endpoint is bounded by
  // c^p h^(1-p eps) / (1-p eps); choose h so the bound is below tol/2.
  double target = 0.5 * tol * (1.0 - peps) / cp;
  double hstar = std::max(std::pow(target, 1.0 / (1.0 - peps)), kMinPairSeparation);
  int shells = 1;
  while (shells < 60 && width * std::pow(0.5, double(shells)) > hstar) ++shells;

  KeyStream ts(src, clamp_seed_interior(fixed), 0);
  auto f = [&](double v) {
    KeyStream us(src, clamp_seed_interior(v), 0);
    double b = fixed_low ? cost.beta(ts, us) : cost.beta(us, ts);
    return p == 1.0 ? b : std::pow(b, p);
  };

  double total = 0.0;
  double shell_tol = 0.25 * tol;
  for (int i = 0; i < shells; ++i) {
    // distances from the singular endpoint in [width/2^(i+1), width/2^i]
    double dhi = width * std::pow(0.5, double(i));
    double dlo = 0.5 * dhi;
    double a = fixed_low ? fixed + dlo : fixed - dhi;
    double b = fixed_low ? fixed + dhi : fixed - dlo;
    total += adaptive_simpson(f, a, b, shell_tol, 42);
    shell_tol *= 0.5;
  }
  return total;
}

double integral_beta_line(const SourceModel& src, const CostModel& cost, double p, double fixed,
                          double lo, double hi, double tol, const TameParams& tame) {
  if (!(hi > lo)) return 0.0;
  double t = clamp_seed_interior(fixed);
  switch (cost.variant()) {
    case CostModel::Variant::key:
      return hi - lo;
    case CostModel::Variant::symbol:
      return integral_symbol_prefix(src, p, t, lo, hi, tol);
    case CostModel::Variant::position_indicator:
      return integral_indicator(src, cost.indicator_position(), t, lo, hi);
    case CostModel::Variant::positional:
      return integral_positional_prefix(src, cost.table(), p, t, lo, hi, tol);
  }
  return integral_beta_one_sided(src, cost, p, fixed, lo, hi, tol, tame);
}

}  // namespace detail

double integral_I(const SourceModel& src, const CostModel& cost, double p, double t, double x,
                  double y, double tol, IntegralRoute route) {
  if (!(x < t) || !(t < y))
    throw std::invalid_argument("integral_I: t must lie strictly inside (x,y)");
  if (!(p >= 1.0)) throw std::invalid_argument("integral_I: power must be >= 1");
  if (route != IntegralRoute::quadrature) {
    switch (cost.variant()) {
      case CostModel::Variant::key:
        return y - x;  // beta == 1
      case CostModel::Variant::symbol:
        return integral_symbol_prefix(src, p, t, x, y, tol);
      case CostModel::Variant::position_indicator:
        return integral_indicator(src, cost.indicator_position(), t, x, y);
      case CostModel::Variant::positional:
        return integral_positional_prefix(src, cost.table(), p, t, x, y, tol);
    }
  }
  TameParams tame = cost.tame_params(src);
  return detail::integral_beta_one_sided(src, cost, p, t, x, t, 0.5 * tol, tame) +
         detail::integral_beta_one_sided(src, cost, p, t, t, y, 0.5 * tol, tame);
}

TruncationPolicy make_truncation_policy(const SourceModel& src, const CostModel& cost,
                                        double delta, int max_depth) {
  TameParams tame = cost.tame_params(src);
  if (tame.warn_divergent)
    throw std::invalid_argument(
        "limit cost is not certifiably summable: tameness exponent >= 1 "
        "(polynomial tail exponent <= 1)");
  TruncationPolicy p;
  p.epsilon = tame.epsilon;
  p.c = tame.c;
  p.delta = delta;
  p.max_depth = max_depth;
  return p;
}

PivotChain sample_pivot_chain(RngStream& rng, double alpha, int max_depth, double min_width) {
  if (!(alpha >= 0.0) || !(alpha <= 1.0))
    throw std::invalid_argument("alpha must lie in [0,1]");
  PivotChain chain;
  chain.alpha = alpha;
  double lo = 0.0, hi = 1.0;
  for (int k = 0; k < max_depth && hi - lo > min_width; ++k) {
    double v = rng.uniform(lo, hi);
    if (v < alpha)
      lo = v;
    else
      hi = v;
    chain.steps.push_back({lo, hi, v});
  }
  chain.final_width = hi - lo;
  return chain;
}

PivotChain chain_from_pivots(std::span<const double> pivots, double alpha) {
  PivotChain chain;
  chain.alpha = alpha;
  double lo = 0.0, hi = 1.0;
  for (double v : pivots) {
    if (!(v > lo) || !(v < hi))
      throw std::invalid_argument("pivot outside the current interval");
    if (v < alpha)
      lo = v;
    else
      hi = v;
    chain.steps.push_back({lo, hi, v});
  }
  chain.final_width = hi - lo;
  return chain;
}

LimitSample accumulate_limit_cost(const std::function<double(double, double)>& next_pivot,
                                  const SourceModel& src, const CostModel& cost, double alpha,
                                  const TruncationPolicy& policy) {
  if (!(alpha >= 0.0) || !(alpha <= 1.0))
    throw std::invalid_argument("alpha must lie in [0,1]");
  if (policy.epsilon >= 1.0)
    throw std::invalid_argument("truncation policy requires tameness exponent < 1");
  const double C = std::pow(2.0, policy.epsilon) * policy.c / (1.0 - policy.epsilon);
  const double inner_tol = std::max(policy.delta * 1e-3, 1e-13);

  double lo = 0.0, hi = 1.0;
  long double acc = 0.0;
  double inner_err = 0.0;
  constexpr int kWindow = 8;
  double widths[kWindow];
  double tail = std::numeric_limits<double>::infinity();
  int k = 0;
  for (; k < policy.max_depth;) {
    double v = next_pivot(lo, hi);
    acc += integral_I(src, cost, 1.0, v, lo, hi, inner_tol);
    inner_err += inner_tol;
    if (v < alpha)
      lo = v;
    else
      hi = v;
    double w = hi - lo;
    widths[k % kWindow] = w;
    ++k;
    // Geometric-majorant tail: next terms are at most C w^(1-eps) r^(j(1-eps))
    // with r the observed per-step width ratio, floored for conservatism.
    double rhat = 0.9;
    if (k >= 2) {
      int span = std::min(k - 1, kWindow - 1);
      double w_old = widths[(k - 1 - span) % kWindow];
      if (w_old > 0.0) rhat = std::pow(w / w_old, 1.0 / double(span));
    }
    rhat = std::clamp(rhat, 0.85, 0.995);
    double g = std::pow(rhat, 1.0 - policy.epsilon);
    tail = C * std::pow(w, 1.0 - policy.epsilon) / (1.0 - g);
    if (tail + inner_err <= policy.delta)
      return LimitSample{double(acc), tail + inner_err, k, false};
  }
  return LimitSample{double(acc), tail + inner_err, k, true};
}

LimitSample sample_S(RngStream& rng, const SourceModel& src, const CostModel& cost, double alpha,
                     const TruncationPolicy& policy) {
  return accumulate_limit_cost(
      [&rng](double lo, double hi) { return rng.uniform(lo, hi); }, src, cost, alpha, policy);
}

double sample_dickman(RngStream& rng, double delta) {
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("dickman truncation threshold must lie in (0,1)");
  double value = 1.0, prod = 1.0;
  while (true) {
    prod *= rng.uniform01();
    if (prod < delta) return value + prod;  // remaining terms total < prod/(1-U) on average
    value += prod;
  }
}

namespace {

void validate_rect(double alpha, const Rect& r) {
  if (!(0.0 <= r.x1 && r.x1 < r.x2 && r.x2 <= alpha && alpha <= r.y1 && r.y1 < r.y2 &&
        r.y2 <= 1.0))
    throw std::invalid_argument(
        "rectangle must satisfy 0 <= x1 < x2 <= alpha <= y1 < y2 <= 1");
}

}  // namespace

double nu_closed(double alpha, const Rect& r) {
  validate_rect(alpha, r);
  double v = 0.0;
  if (r.x1 == 0.0 && r.y2 == 1.0) v += 1.0;                       // atom at (0,1)
  if (r.y2 == 1.0) v += std::log((1.0 - r.x1) / (1.0 - r.x2));    // edge y = 1
  if (r.x1 == 0.0) v += std::log(r.y2 / r.y1);                    // edge x = 0
  double num = (r.y2 - r.x2) * (r.y1 - r.x1);
  double den = (r.y1 - r.x2) * (r.y2 - r.x1);
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return v + 2.0 * std::log(num / den);
}

McEstimate nu_mc(RngStream& rng, double alpha, const Rect& r, std::size_t reps, int max_depth) {
  validate_rect(alpha, r);
  double gap = r.y1 - r.x2;
  long double sum = 0.0, sumsq = 0.0;
  for (std::size_t i = 0; i < reps; ++i) {
    double lo = 0.0, hi = 1.0;
    std::uint64_t count = 0;
    for (int k = 0; k < max_depth; ++k) {
      if (r.x1 <= lo && lo <= r.x2 && r.y1 <= hi && hi <= r.y2) ++count;
      if (lo > r.x2 || hi < r.y1 || hi - lo < gap) break;
      double v = rng.uniform(lo, hi);
      if (v < alpha)
        lo = v;
      else
        hi = v;
    }
    sum += count;
    sumsq += double(count) * double(count);
  }
  McEstimate e;
  e.reps = reps;
  e.mean = double(sum / reps);
  double var = double(sumsq / reps) - e.mean * e.mean;
  e.stderr_ = std::sqrt(std::max(0.0, var) / double(reps));
  return e;
}

namespace {

double log_power_density(int k, double s) {
  // s^(k-1)/(k-1)!
  if (k == 1) return 1.0;
  double v = 1.0;
  for (int j = 1; j < k; ++j) v *= s / j;
  return v;
}

// integral from a to infinity of s^(k-1) e^-s / (k-1)! ds
double gamma_survival(int k, double a) {
  double term = std::exp(-a), acc = term;
  for (int j = 1; j < k; ++j) {
    term *= a / j;
    acc += term;
  }
  return acc;
}

void validate_marginal(int k, double alpha) {
  if (k < 1) throw std::invalid_argument("marginal order must be >= 1");
  if (!(alpha >= 0.0) || !(alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0,1]");
}

}  // namespace

double chain_marginal_f(int k, double x, double alpha) {
  validate_marginal(k, alpha);
  if (!(x >= 0.0) || !(x < alpha))
    throw std::invalid_argument("f marginal is supported on [0, alpha)");
  return log_power_density(k, -std::log1p(-x));
}

double chain_marginal_g(int k, double y, double alpha) {
  validate_marginal(k, alpha);
  if (!(y > alpha) || !(y > 0.0) || !(y <= 1.0))
    throw std::invalid_argument("g marginal is supported on (alpha, 1]");
  return log_power_density(k, -std::log(y));
}

double chain_marginal_f_integral(int k, double x1, double x2, double alpha) {
  validate_marginal(k, alpha);
  if (!(0.0 <= x1 && x1 < x2 && x2 <= alpha))
    throw std::invalid_argument("f marginal window must satisfy 0 <= x1 < x2 <= alpha");
  return gamma_survival(k, -std::log1p(-x1)) - gamma_survival(k, -std::log1p(-x2));
}

double chain_marginal_g_integral(int k, double y1, double y2, double alpha) {
  validate_marginal(k, alpha);
  if (!(alpha <= y1 && y1 < y2 && y2 <= 1.0))
    throw std::invalid_argument("g marginal window must satisfy alpha <= y1 < y2 <= 1");
  return gamma_survival(k, -std::log(y2)) - gamma_survival(k, -std::log(y1));
}

namespace {

McEstimate marginal_mc(RngStream& rng, int k, double alpha, std::size_t reps,
                       const std::function<bool(double, double)>& event) {
  long double sum = 0.0;
  for (std::size_t i = 0; i < reps; ++i) {
    double lo = 0.0, hi = 1.0;
    for (int j = 0; j < k; ++j) {
      double v = rng.uniform(lo, hi);
      if (v < alpha)
        lo = v;
      else
        hi = v;
    }
    if (event(lo, hi)) sum += 1.0;
  }
  McEstimate e;
  e.reps = reps;
  e.mean = double(sum / reps);
  e.stderr_ = std::sqrt(std::max(0.0, e.mean * (1.0 - e.mean)) / double(reps));
  return e;
}

}  // namespace

McEstimate chain_marginal_f_mc(RngStream& rng, int k, double x1, double x2, double alpha,
                               std::size_t reps) {
  validate_marginal(k, alpha);
  return marginal_mc(rng, k, alpha, reps, [&](double lo, double hi) {
    return hi == 1.0 && x1 <= lo && lo <= x2;
  });
}

McEstimate chain_marginal_g_mc(RngStream& rng, int k, double y1, double y2, double alpha,
                               std::size_t reps) {
  validate_marginal(k, alpha);
  return marginal_mc(rng, k, alpha, reps, [&](double lo, double hi) {
    return lo == 0.0 && y1 <= hi && hi <= y2;
  });
}

}  // namespace qcost
