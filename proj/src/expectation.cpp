#include "qcost/expectation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "qcost/limit.hpp"
#include "qcost/quad.hpp"

namespace qcost {

namespace {

double xlnx(double x) { return x <= 0.0 ? 0.0 : x * std::log(x); }

const double kL0 = 2.0 * (1.0 + std::log(2.0));
constexpr double kInf = std::numeric_limits<double>::infinity();
// Inner band integrals cannot certify tails finer than the seed resolution
// supports; shells request no less than this and book the floor as error.
constexpr double kBandTolFloor = 1e-11;

}  // namespace

double H_fn(double y) {
  if (!(y >= 0.0)) throw std::invalid_argument("H is defined for y >= 0");
  if (y <= 0.5) return -(xlnx(0.5 + y) + xlnx(0.5 - y));
  double Y = y - 0.5;
  if (Y > 1e6) {
    // H = -Y log1p(1/Y) expanded to avoid cancellation in L = 2[1+H]
    double z = 1.0 / Y;
    return -1.0 + z * (0.5 - z * (1.0 / 3.0 - 0.25 * z));
  }
  return -Y * std::log1p(1.0 / Y);
}

double L_fn(double y) { return 2.0 * (1.0 + H_fn(y)); }

double expected_key_closed(double alpha) {
  if (!(alpha >= 0.0) || !(alpha <= 1.0))
    throw std::invalid_argument("alpha must lie in [0,1]");
  return 2.0 * (1.0 - xlnx(alpha) - xlnx(1.0 - alpha));
}

double J_of_prefix(const FundamentalInterval& iv, double alpha) {
  double p = iv.width();
  if (!(p > 0.0)) throw std::invalid_argument("prefix interval must have positive width");
  return p * L_fn(std::fabs((alpha - iv.midpoint()) / p));
}

// ---------------------------------------------------------------------------
// Prefix-tree sum of J with certified subtree bounds.
//
// For a subtree at interval (a,b), width p, depth k, descendant widths at
// relative level j are at most M_j (source decay). If the subtree excludes
// alpha at distance d, every descendant has L <= min(L0, M_j/d) and each
// level carries mass p. If it contains alpha, a level contributes at most
// M_j [6 L0 + 2 + 2 ln L0 + 2 ln(p/M_j)]: two cells touching alpha plus two
// stacked runs compared against the integral of min(L0, M_j/s).
// ---------------------------------------------------------------------------

namespace {

// Per unit width, sum over levels j >= 1 of rho^j (8 + 2 j ln(1/rho)): the
// occupation mass of a cell pinned to alpha under geometric width decay.
double sub_diag_factor(double rho) {
  double lninv = -std::log(rho);
  return 8.0 * rho / (1.0 - rho) + 2.0 * lninv * rho / ((1.0 - rho) * (1.0 - rho));
}

double subtree_bound(const PiDecay& decay, double alpha, double a, double b, std::uint32_t k) {
  double p = b - a;
  if (!(p > 0.0)) return 0.0;
  bool contains = a <= alpha && alpha <= b;
  if (!contains) {
    double d = a > alpha ? a - alpha : alpha - b;
    if (decay.geometric) {
      double rho = decay.rate;
      double jstar = 0.0;
      if (p > kL0 * d) jstar = std::ceil(std::log(kL0 * d / p) / std::log(rho));
      return p * (kL0 * jstar + p * std::pow(rho, jstar) / (d * (1.0 - rho)));
    }
    double gamma = decay.gamma, A = decay.amplitude;
    if (gamma <= 1.0) return kInf;
    double xstar = std::pow(A / (kL0 * d), 1.0 / gamma);
    double X0 = std::max(xstar, double(k) + 1.0);
    return p * (kL0 * std::max(0.0, xstar - k) +
                A * std::pow(X0, 1.0 - gamma) / (d * (gamma - 1.0)));
  }
  const double C2 = 6.0 * kL0 + 2.0 + 2.0 * std::log(kL0);
  if (decay.geometric) {
    double rho = decay.rate;
    double lninv = -std::log(rho);
    double q = rho / (1.0 - rho);
    return p * (kL0 + C2 * q + 2.0 * lninv * q / (1.0 - rho));
  }
  double gamma = decay.gamma, A = decay.amplitude;
  if (gamma <= 1.0) return kInf;
  double xc = std::pow(A / p, 1.0 / gamma);
  double Xc = std::max(xc, double(k) + 1.0);
  double bracket = C2 + 2.0 * std::log(p / A) + 2.0 * gamma * std::log(Xc) +
                   2.0 * gamma / (gamma - 1.0);
  return p * kL0 + p * C2 * std::max(0.0, xc - k) +
         A * std::pow(Xc, 1.0 - gamma) / (gamma - 1.0) * bracket;
}

constexpr std::size_t kMaxSeriesDepth = 200000;

ExpectationResult j_sum(const SourceModel& src, double alpha, double tol, std::size_t max_terms,
                        const char* method) {
  if (!(alpha >= 0.0) || !(alpha <= 1.0))
    throw std::invalid_argument("alpha must lie in [0,1]");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  PiDecay decay = src.pi_decay();
  if (!decay.geometric && decay.gamma <= 1.0)
    throw std::invalid_argument(
        "series expectation diverges: polynomial tail exponent <= 1");
  std::uint32_t r = src.alphabet_size();

  struct Frame {
    SourceModel::State state;
    double a, b;
    std::uint32_t depth;
    double budget;
  };
  std::vector<Frame> stack;
  stack.push_back({src.initial_state(), 0.0, 1.0, 0, tol});

  std::vector<double> q(r);
  std::vector<double> child_bound(r);
  long double total = 0.0, err = 0.0;
  std::size_t terms = 0;
  bool capped = false;
  while (!stack.empty()) {
    if (terms >= max_terms) {
      capped = true;
      break;
    }
    Frame f = stack.back();
    stack.pop_back();
    double p = f.b - f.a;
    total += J_of_prefix({f.a, f.b}, alpha);
    ++terms;

    src.conditional(f.state, q);
    double btot = 0.0, lo = f.a;
    for (std::uint32_t s = 0; s < r; ++s) {
      double w = p * q[s];
      double hi = (s + 1 == r) ? f.b : lo + w;
      if (!(hi > lo)) {
        // Child width lost to rounding; the subtree holds one cell of width w
        // per level with everything else decaying geometrically away from it.
        err += decay.geometric ? w * (4.0 + 2.0 * sub_diag_factor(decay.rate))
                               : kL0 * decay.tail(f.depth + 1);
        child_bound[s] = 0.0;
      } else {
        child_bound[s] = subtree_bound(decay, alpha, lo, hi, f.depth + 1);
      }
      btot += child_bound[s];
      lo = std::max(lo, hi);
    }
    if (btot <= f.budget) {
      err += btot;
      continue;
    }
    // Starved budgets must not chase ulp-wide boundary chains forever; settle
    // the certified bound instead of splitting further.
    if (f.depth + 1 >= kMaxSeriesDepth || p <= kMinPairSeparation) {
      err += btot;
      continue;
    }
    lo = f.a;
    for (std::uint32_t s = 0; s < r; ++s) {
      double w = p * q[s];
      double hi = (s + 1 == r) ? f.b : lo + w;
      if (hi > lo) {
        double share = btot > 0.0 && std::isfinite(btot)
                           ? f.budget * (child_bound[s] / btot)
                           : f.budget / double(r);
        stack.push_back({src.advance(f.state, Symbol(s)), lo, hi, f.depth + 1, share});
      }
      lo = std::max(lo, hi);
    }
  }
  if (capped)
    for (const auto& f : stack) err += subtree_bound(decay, alpha, f.a, f.b, f.depth);

  ExpectationResult res;
  res.value = double(total);
  res.method = method;
  res.error_estimate = double(err);
  res.terms = terms;
  res.flagged = capped || res.error_estimate > tol;
  return res;
}

// ---------------------------------------------------------------------------
// Graded 2D quadrature of rho = integral over {lo < u < t < hi} of
// beta(u,t) [(alpha v t) - (alpha ^ u)]^-1, split at u = alpha and t = alpha,
// dyadic shells toward the singular corner (alpha, alpha).
// ---------------------------------------------------------------------------

struct TriQuad {
  double value = 0.0;
  double err = 0.0;
  std::size_t evals = 0;
};

// Largest h with bound(h) <= target; bound increasing in h.
double solve_height(const std::function<double(double)>& bound, double target, double span) {
  if (bound(span) <= target) return span;
  double lo = 0.0, hi = span;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid <= 0.0) break;
    (bound(mid) <= target ? lo : hi) = mid;
  }
  return lo;
}

int shell_count(double span, double h) {
  h = std::max(h, kMinPairSeparation);
  if (h >= span) return 1;
  return std::clamp(int(std::ceil(std::log2(span / h))), 1, 60);
}

class TriangleRho {
 public:
  TriangleRho(const SourceModel& src, const CostModel& cost, double alpha, double lo, double hi,
              double tol, const TameParams& tame)
      : src_(src), cost_(cost), alpha_(alpha), lo_(lo), hi_(hi), tol_(tol), tame_(tame) {}

  TriQuad run() {
    double third = tol_ / 3.0;
    lower_wedge(third);
    middle_box(third);
    upper_wedge(third);
    out_.evals = evals_;
    return out_;
  }

 private:
  double beta(double u, double t) {
    ++evals_;
    return cost_.beta(src_, u, t);
  }

  // integral of beta(u, .) over (a, b) through the exact prefix-chain routes
  double band(double fixed, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    ++evals_;
    return detail::integral_beta_line(src_, cost_, 1.0, fixed, a, b, tol, tame_);
  }

  // {u < t <= alpha}: weight 1/(alpha - u), singular at u -> alpha when the
  // wedge reaches it.
  void lower_wedge(double tol) {
    double top = std::min(alpha_, hi_);
    if (!(top > lo_)) return;
    auto F = [&](double u) { return band(u, u, top, band_tol_) / (alpha_ - u); };
    if (alpha_ > hi_) {
      double lam = std::log((alpha_ - lo_) / (alpha_ - hi_));
      band_tol_ = 0.5 * tol / std::max(lam, 1.0);
      double acc_err = 0.0;
      out_.value += adaptive_simpson(F, lo_, top, 0.5 * tol, 48, &acc_err);
      out_.err += acc_err + band_tol_ * lam;
      return;
    }
    // sliver next to u = alpha: integrand <= c (alpha-u)^-eps / (1-eps)
    double eps = tame_.epsilon, c = tame_.c;
    double span = top - lo_;
    auto sliver = [&](double h) {
      return c * std::pow(h, 1.0 - eps) / ((1.0 - eps) * (1.0 - eps));
    };
    double h = solve_height(sliver, 0.5 * tol, span);
    int ns = shell_count(span, h);
    double shell_tol = 0.25 * tol;
    for (int i = 0; i < ns; ++i) {
      double shi = span * std::pow(0.5, double(i));
      double slo = (i + 1 == ns) ? std::min(shi * 0.5, h) : shi * 0.5;
      // keep the band series within seed resolution; the floor enters the
      // budget through the log-weight of the shell
      band_tol_ = std::max(0.5 * shell_tol, kBandTolFloor);
      double acc_err = 0.0;
      out_.value += adaptive_simpson(F, alpha_ - shi, alpha_ - slo, 0.5 * shell_tol, 48, &acc_err);
      out_.err += acc_err + shell_tol + band_tol_;
      shell_tol *= 0.5;
      if (i + 1 == ns) out_.err += sliver(slo);
    }
  }

  // {alpha <= u < t}: weight 1/(t - alpha), mirror of the lower wedge.
  void upper_wedge(double tol) {
    double base = std::max(alpha_, lo_);
    if (!(hi_ > base)) return;
    auto F = [&](double t) { return band(t, base, t, band_tol_) / (t - alpha_); };
    if (alpha_ < lo_) {
      double lam = std::log((hi_ - alpha_) / (lo_ - alpha_));
      band_tol_ = 0.5 * tol / std::max(lam, 1.0);
      double acc_err = 0.0;
      out_.value += adaptive_simpson(F, base, hi_, 0.5 * tol, 48, &acc_err);
      out_.err += acc_err + band_tol_ * lam;
      return;
    }
    double eps = tame_.epsilon, c = tame_.c;
    double span = hi_ - base;
    auto sliver = [&](double h) {
      return c * std::pow(h, 1.0 - eps) / ((1.0 - eps) * (1.0 - eps));
    };
    double h = solve_height(sliver, 0.5 * tol, span);
    int ns = shell_count(span, h);
    double shell_tol = 0.25 * tol;
    for (int i = 0; i < ns; ++i) {
      double shi = span * std::pow(0.5, double(i));
      double slo = (i + 1 == ns) ? std::min(shi * 0.5, h) : shi * 0.5;
      band_tol_ = std::max(0.5 * shell_tol, kBandTolFloor);
      double acc_err = 0.0;
      out_.value += adaptive_simpson(F, alpha_ + slo, alpha_ + shi, 0.5 * shell_tol, 48, &acc_err);
      out_.err += acc_err + shell_tol + band_tol_;
      shell_tol *= 0.5;
      if (i + 1 == ns) out_.err += sliver(slo);
    }
  }

  // {u <= alpha <= t}: weight 1/(t - u) = 1/s on diagonal strips t = u + s,
  // which turns the corner singularity into a one-dimensional one in s. The
  // strip average (1/s) * integral of beta(u, u+s) du stays below c s^-eps
  // because the strip length never exceeds s.
  void middle_box(double tol) {
    if (!(alpha_ > lo_) || !(alpha_ < hi_)) return;
    double span = hi_ - lo_;
    double eps = tame_.epsilon, c = tame_.c;
    auto sliver = [&](double h) { return c * std::pow(h, 1.0 - eps) / (1.0 - eps); };
    double h = solve_height(sliver, 0.5 * tol, span);
    h = std::max(h, kMinPairSeparation);  // s is the pair separation here
    int ns = shell_count(span, h);
    double shell_tol = 0.25 * tol;
    for (int i = 0; i < ns; ++i) {
      double shi = span * std::pow(0.5, double(i));
      double slo = (i + 1 == ns) ? std::min(shi * 0.5, h) : shi * 0.5;
      double width = shi - slo;
      auto F = [&](double s) {
        double a = std::max(lo_, alpha_ - s);
        double b = std::min(alpha_, hi_ - s);
        if (!(b > a)) return 0.0;
        double inner_tol = 0.5 * shell_tol * s / width;
        return adaptive_simpson([&](double u) { return beta(u, u + s); }, a, b, inner_tol, 40) /
               s;
      };
      double acc_err = 0.0;
      out_.value += adaptive_simpson(F, slo, shi, 0.5 * shell_tol, 48, &acc_err);
      out_.err += acc_err + shell_tol;
      shell_tol *= 0.5;
      if (i + 1 == ns) out_.err += sliver(slo);
    }
  }

  const SourceModel& src_;
  const CostModel& cost_;
  double alpha_, lo_, hi_, tol_;
  TameParams tame_;
  double band_tol_ = 1e-10;
  TriQuad out_;
  std::size_t evals_ = 0;
};

const SourceModel& fair_binary() {
  static const SourceModel src = SourceModel::memoryless({0.5, 0.5});
  return src;
}

// ---------------------------------------------------------------------------
// Exact triangle decomposition. The occupation density
// rho(u,t) = [(alpha v t) - (alpha ^ u)]^-1 integrates in closed form over any
// rectangle, and beta is constant on the product of two distinct fundamental
// intervals with a common parent. Descending the source tree therefore turns
// the double integral into a sum of exact rectangle terms plus diagonal
// remainders with certified bounds; cells split worst-first until the
// remainder fits the tolerance. Robust where sampling quadrature is not: beta
// jumps at every fundamental boundary and never gets sampled here at all.

double phi_log(double z) { return z > 0.0 ? z * (std::log(z) - 1.0) : 0.0; }

// rho integral over the rectangle (a1,b1) x (a2,b2), b1 <= a2. Split at
// alpha; in every piece the ordering u-cell < t-cell keeps the logs finite.
double rho_rect(double a1, double b1, double a2, double b2, double alpha) {
  double w = 0.0;
  double m2 = std::min(b2, alpha);
  if (m2 > a2) w += (m2 - a2) * std::log((alpha - a1) / (alpha - b1));
  double t0 = std::max(a2, alpha);
  if (b2 > t0) {
    double m1 = std::min(b1, alpha);
    if (m1 > a1) w += phi_log(b2 - a1) - phi_log(t0 - a1) - phi_log(b2 - m1) + phi_log(t0 - m1);
    double u0 = std::max(a1, alpha);
    if (b1 > u0) w += (b1 - u0) * std::log((b2 - alpha) / (t0 - alpha));
  }
  return w;
}

// Closed-form rho integral over the whole triangle {u < t} inside (a,b).
double rho_triangle_closed(double a, double b, double alpha) {
  if (!(b > a)) return 0.0;
  if (b <= alpha) {
    double d = alpha - b;
    return (b - a) - (d > 0.0 ? d * std::log((alpha - a) / d) : 0.0);
  }
  if (a >= alpha) {
    double d = a - alpha;
    return (b - a) - (d > 0.0 ? d * std::log((b - alpha) / d) : 0.0);
  }
  return (b - a) + xlnx(b - a) - xlnx(alpha - a) - xlnx(b - alpha);
}

// Bound on the triangle integral of beta rho over {u < t} in (a,b), from the
// tame envelope beta <= c (t-u)^-eps. Cells containing alpha get the corner
// form; separated cells keep a log factor that shrinks with the cell.
double diag_bound(double a, double b, double alpha, const TameParams& tame) {
  double w = b - a;
  if (!(w > 0.0)) return 0.0;
  double om = 1.0 - tame.epsilon;
  double wp = tame.c * std::pow(w, om);
  if (alpha >= a && alpha <= b) return wp * (2.0 / (om * om) + 1.0 / om);
  double lam = (b < alpha) ? std::log((alpha - a) / (alpha - b))
                           : std::log((b - alpha) / (a - alpha));
  return wp * lam / om;
}

double pair_beta(const CostModel& cost, std::uint32_t depth, double shared, Symbol c1, Symbol c2) {
  switch (cost.variant()) {
    case CostModel::Variant::key:
      return 1.0;
    case CostModel::Variant::symbol:
      return double(depth) + 1.0;
    case CostModel::Variant::position_indicator:
      return (cost.indicator_position() <= depth + 1) ? 1.0 : 0.0;
    case CostModel::Variant::positional:
      return shared + cost.table().value(depth + 1, c1, c2);
  }
  return 1.0;
}

// Geometric-decay constants behind the excess bounds. With per-level relative
// widths <= q, pairs sharing j extra levels sit in tiles X of width at most
// W q^j, each worth min(2|X|, |X|^2 / 2 dist) under rho <= (t-u)^-1: tiles
// within w_j of alpha carry mass at most 4 w_j, the rest integrate against
// 2/(alpha-u), so level j costs at most w_j (8 + 2 ln(W/w_j)).
struct ExcessParams {
  bool sharp = false;
  double q = 0.5;
  double Q = 1.0;   // q/(1-q), sum of relative widths over extra levels
  double Cq = 1.0;  // per-width constant for the all-levels mass
  double pos_min = 0.0, pos_spread = 0.0, pos_scale = 0.0;
  TameParams tame;
};

ExcessParams make_excess_params(const SourceModel& src, const CostModel& cost,
                                const TameParams& tame) {
  ExcessParams ep;
  ep.tame = tame;
  PiDecay decay = src.pi_decay();
  if (decay.geometric && decay.rate < 1.0) {
    ep.sharp = true;
    ep.q = decay.rate;
    ep.Q = ep.q / (1.0 - ep.q);
    ep.Cq = ep.Q * (8.0 + 2.0 * std::log(1.0 / ep.q) / (1.0 - ep.q));
  }
  if (cost.variant() == CostModel::Variant::positional) {
    const PositionalTable& tab = cost.table();
    double lo = tab.tail_default, hi = tab.tail_default;
    for (const auto& [k, v] : tab.entries) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    ep.pos_min = lo;
    ep.pos_spread = hi - lo;
    ep.pos_scale = std::max(std::fabs(lo), std::fabs(hi));
  }
  return ep;
}

double same_cell_mass(const ExcessParams& ep, double w, double dist) {
  double all = w * ep.Cq;
  if (dist > 0.0) all = std::min(all, w * w / (2.0 * dist) * ep.Q);
  return all;
}

double same_cell_level(const ExcessParams& ep, double w, double dist, double j0) {
  double wj = w * std::pow(ep.q, j0);
  if (!(wj > 0.0)) return 0.0;
  double lvl = wj * (8.0 + 2.0 * std::log(w / wj));
  if (dist > 0.0) lvl = std::min(lvl, w * wj / (2.0 * dist));
  return lvl;
}

// Exact part of beta on the subtree below a cell, and a certified bound on
// what the rest can add.
struct FloorExcess {
  double floor = 0.0;
  double excess = 0.0;
};

FloorExcess cell_floor_excess(const CostModel& cost, const ExcessParams& ep, std::uint32_t depth,
                              double shared, double a, double b, double alpha, double T) {
  double w = b - a;
  double dist = (b <= alpha) ? alpha - b : (a >= alpha ? a - alpha : 0.0);
  switch (cost.variant()) {
    case CostModel::Variant::key:
      return {1.0, 0.0};
    case CostModel::Variant::position_indicator: {
      std::uint32_t i0 = cost.indicator_position();
      if (i0 <= depth + 1) return {1.0, 0.0};
      double ex = T;
      if (ep.sharp) ex = std::min(ex, same_cell_level(ep, w, dist, double(i0 - 1 - depth)));
      return {0.0, ex};
    }
    case CostModel::Variant::symbol:
      if (!ep.sharp) return {0.0, diag_bound(a, b, alpha, ep.tame)};
      return {double(depth) + 1.0, same_cell_mass(ep, w, dist)};
    case CostModel::Variant::positional:
      if (!ep.sharp) return {0.0, diag_bound(a, b, alpha, ep.tame)};
      return {shared + ep.pos_min,
              ep.pos_spread * T + ep.pos_scale * same_cell_mass(ep, w, dist)};
  }
  return {0.0, diag_bound(a, b, alpha, ep.tame)};
}

struct DiagCell {
  double a, b;
  double bound;
  double shared;
  std::uint32_t depth;
  SourceModel::State state;
};

struct DiagCellOrder {
  bool operator()(const DiagCell& x, const DiagCell& y) const { return x.bound < y.bound; }
};

ExpectationResult rho_triangle_cells(const SourceModel& src, const CostModel& cost, double alpha,
                                     double tol, const TameParams& tame) {
  constexpr std::size_t kMaxSplits = 3000000;
  std::uint32_t r = src.alphabet_size();
  std::vector<double> cond(r);
  std::vector<double> edge(r + 1);
  ExcessParams ep = make_excess_params(src, cost, tame);
  std::priority_queue<DiagCell, std::vector<DiagCell>, DiagCellOrder> heap;
  long double value = 0.0;
  long double pending = 0.0;  // certified excess bounds still on the heap
  long double settled = 0.0;  // excess booked for unsplittable cells
  auto spawn = [&](double a, double b, std::uint32_t depth, double shared,
                   const SourceModel::State& st) {
    double T = std::max(rho_triangle_closed(a, b, alpha), 0.0);
    FloorExcess fe = cell_floor_excess(cost, ep, depth, shared, a, b, alpha, T);
    value += fe.floor * T;
    if (fe.excess > 0.0) {
      pending += fe.excess;
      heap.push({a, b, fe.excess, shared, depth, st});
    }
  };
  spawn(0.0, 1.0, 0, 0.0, src.initial_state());
  std::size_t splits = 0;
  bool flagged = false;
  while (!heap.empty() && pending + settled > tol) {
    if (splits >= kMaxSplits) {
      flagged = true;
      break;
    }
    DiagCell cell = heap.top();
    heap.pop();
    pending -= cell.bound;
    if (cell.depth + 1 >= kMaxSeriesDepth || cell.b - cell.a <= kMinPairSeparation) {
      settled += cell.bound;
      continue;
    }
    ++splits;
    // retract this cell's floor mass; the exact rectangles and the children's
    // floors replace it
    double T = std::max(rho_triangle_closed(cell.a, cell.b, alpha), 0.0);
    value -= cell_floor_excess(cost, ep, cell.depth, cell.shared, cell.a, cell.b, alpha, T).floor *
             T;
    src.conditional(cell.state, cond);
    double w = cell.b - cell.a;
    edge[0] = cell.a;
    edge[r] = cell.b;
    double run = cell.a;
    for (std::uint32_t c = 0; c + 1 < r; ++c) {
      run = std::min(std::max(run + cond[c] * w, edge[c]), cell.b);
      edge[c + 1] = run;
    }
    for (std::uint32_t c1 = 0; c1 < r; ++c1) {
      if (!(edge[c1 + 1] > edge[c1])) continue;
      for (std::uint32_t c2 = c1 + 1; c2 < r; ++c2) {
        if (!(edge[c2 + 1] > edge[c2])) continue;
        double beta = pair_beta(cost, cell.depth, cell.shared, c1, c2);
        if (beta != 0.0)
          value +=
              beta * std::max(rho_rect(edge[c1], edge[c1 + 1], edge[c2], edge[c2 + 1], alpha), 0.0);
      }
    }
    for (std::uint32_t c = 0; c < r; ++c) {
      if (!(edge[c + 1] > edge[c])) continue;
      double sh = cell.shared;
      if (cost.variant() == CostModel::Variant::positional)
        sh += cost.table().value(cell.depth + 1, c, c);
      spawn(edge[c], edge[c + 1], cell.depth + 1, sh, src.advance(cell.state, c));
    }
  }
  ExpectationResult res;
  res.value = double(value);
  res.method = "integral";
  res.error_estimate = double(pending + settled) + 1e-13 * std::fabs(res.value);
  res.terms = splits;
  res.flagged = flagged || res.error_estimate > tol;
  return res;
}

}  // namespace

double J_of_prefix_quadrature(const FundamentalInterval& iv, double alpha, double tol) {
  if (!(iv.width() > 0.0)) throw std::invalid_argument("prefix interval must have positive width");
  CostModel unit = CostModel::key();
  TameParams tame{0.0, 1.0, false, false};
  TriangleRho tri(fair_binary(), unit, alpha, iv.a, iv.b, 0.5 * tol, tame);
  return 2.0 * tri.run().value;
}

ExpectationResult expected_S_series(const SourceModel& src, double alpha, double tol,
                                    std::size_t max_terms) {
  return j_sum(src, alpha, tol, max_terms, "series");
}

ExpectationResult expected_S_integral(const SourceModel& src, const CostModel& cost, double alpha,
                                      double tol) {
  if (!(alpha >= 0.0) || !(alpha <= 1.0))
    throw std::invalid_argument("alpha must lie in [0,1]");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  TameParams tame = cost.tame_params(src);
  if (tame.warn_divergent)
    throw std::invalid_argument("expectation integral diverges: tameness exponent >= 1");
  ExpectationResult res = rho_triangle_cells(src, cost, alpha, 0.5 * tol, tame);
  res.value *= 2.0;
  res.error_estimate *= 2.0;
  return res;
}

ExpectationResult expected_quickrand(const SourceModel& src, const CostModel& cost, int panels,
                                     double inner_tol) {
  if (panels < 1) throw std::invalid_argument("panel count must be >= 1");
  std::vector<double> rho(panels);
  long double err = 0.0;
  std::size_t terms = 0;
  bool flagged = false;
  bool closed = cost.variant() == CostModel::Variant::key;
  bool series = cost.variant() == CostModel::Variant::symbol;
  for (int i = 0; i < panels; ++i) {
    double alpha = (i + 0.5) / panels;
    if (closed) {
      rho[i] = expected_key_closed(alpha);
      ++terms;
      continue;
    }
    ExpectationResult inner = series ? j_sum(src, alpha, inner_tol, 100000000, "series")
                                     : expected_S_integral(src, cost, alpha, inner_tol);
    rho[i] = inner.value;
    err += inner.error_estimate;
    terms += inner.terms;
    flagged = flagged || inner.flagged;
  }
  long double total = 0.0;
  for (int i = 0; i < panels; ++i) total += rho[i];
  // Midpoint-rule discretization estimate from second differences; the
  // per-panel error is h^3 rho''/24 and rho'' ~ second difference / h^2.
  long double disc = 0.0;
  if (panels >= 3) {
    double h = 1.0 / panels;
    for (int i = 0; i < panels; ++i) {
      int j = std::min(std::max(i, 1), panels - 2);
      disc += std::fabs(rho[j - 1] - 2.0 * rho[j] + rho[j + 1]) * h / 24.0;
    }
  }
  ExpectationResult res;
  res.value = double(total / panels);
  res.method = "quickrand";
  res.error_estimate = double(err / panels + disc);
  res.terms = terms;
  res.flagged = flagged;
  return res;
}

}  // namespace qcost
