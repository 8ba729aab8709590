#include "qcost/source.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qcost {

namespace {

void check_distribution(const std::vector<double>& p, const char* what) {
  if (p.size() < 2) throw std::invalid_argument(std::string(what) + ": need at least 2 symbols");
  double sum = 0.0;
  for (double v : p) {
    if (!(v > 0.0) || !(v < 1.0))
      throw std::invalid_argument(std::string(what) + ": probabilities must lie strictly in (0,1)");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance)
    throw std::invalid_argument(std::string(what) + ": probabilities must sum to 1");
}

}  // namespace

double PiDecay::bound(std::uint32_t k) const {
  if (geometric) return std::pow(rate, double(k));
  return amplitude * std::pow(double(k) + 1.0, -gamma);
}

double PiDecay::tail(std::uint32_t k) const {
  if (geometric) return std::pow(rate, double(k) + 1.0) / (1.0 - rate);
  if (gamma <= 1.0) return std::numeric_limits<double>::infinity();
  // sum_{j>k} A (j+1)^-g <= A [(k+2)^-g + (k+2)^(1-g)/(g-1)]
  double base = double(k) + 2.0;
  return amplitude * (std::pow(base, -gamma) + std::pow(base, 1.0 - gamma) / (gamma - 1.0));
}

SourceModel SourceModel::memoryless(std::vector<double> probs) {
  check_distribution(probs, "memoryless source");
  SourceModel m;
  m.kind_ = Kind::memoryless;
  m.r_ = std::uint32_t(probs.size());
  m.p_max_ = *std::max_element(probs.begin(), probs.end());
  m.probs_ = std::move(probs);
  return m;
}

SourceModel SourceModel::markov(std::vector<double> initial,
                                std::vector<std::vector<double>> transition) {
  check_distribution(initial, "markov initial distribution");
  if (transition.size() != initial.size())
    throw std::invalid_argument("markov source: transition matrix must have one row per symbol");
  double pmax = *std::max_element(initial.begin(), initial.end());
  for (const auto& row : transition) {
    check_distribution(row, "markov transition row");
    if (row.size() != initial.size())
      throw std::invalid_argument("markov source: transition matrix must be square");
    pmax = std::max(pmax, *std::max_element(row.begin(), row.end()));
  }
  SourceModel m;
  m.kind_ = Kind::markov;
  m.r_ = std::uint32_t(initial.size());
  m.p_max_ = pmax;
  m.initial_ = std::move(initial);
  m.trans_ = std::move(transition);
  return m;
}

SourceModel SourceModel::intermittent(std::uint32_t r, double gamma, Symbol sigma) {
  if (r < 2) throw std::invalid_argument("intermittent source: alphabet size must be >= 2");
  if (!(gamma > 0.0)) throw std::invalid_argument("intermittent source: gamma must be positive");
  if (sigma >= r) throw std::invalid_argument("intermittent source: sigma out of range");
  SourceModel m;
  m.kind_ = Kind::intermittent;
  m.r_ = r;
  m.gamma_ = gamma;
  m.sigma_ = sigma;
  m.p_max_ = 1.0;  // conditional sigma-probabilities approach 1 on long runs
  // Pi-tame amplitude: max_k pi_k (k+1)^gamma. The exact DP supplies small k;
  // for large k the max-probability prefix is the pure sigma run, whose
  // normalized value decreases toward 1/r.
  double amp = 1.0;  // k = 0
  std::uint32_t kmax = std::max<std::uint32_t>(512, std::uint32_t(8.0 * gamma / std::log(2.0)) + 8);
  for (std::uint32_t k = 1; k <= kmax; ++k)
    amp = std::max(amp, m.pi_k(k) * std::pow(double(k) + 1.0, gamma));
  amp = std::max(amp, (1.0 / r) * std::pow(1.0 + 1.0 / double(kmax), gamma));
  m.pi_amplitude_ = amp;
  return m;
}

SourceModel::State SourceModel::advance(const State& s, Symbol sym) const {
  if (sym >= r_) throw std::invalid_argument("symbol out of range");
  State n;
  n.at_root = false;
  n.last = sym;
  if (kind_ == Kind::intermittent)
    n.run = (sym == sigma_) ? s.run + 1 : 0;
  return n;
}

SourceModel::State SourceModel::state_for_prefix(const Prefix& w) const {
  validate_prefix(w);
  State s = initial_state();
  for (Symbol sym : w) s = advance(s, sym);
  return s;
}

void SourceModel::conditional(const State& s, std::span<double> out) const {
  switch (kind_) {
    case Kind::memoryless:
      std::copy(probs_.begin(), probs_.end(), out.begin());
      return;
    case Kind::markov: {
      const auto& row = s.at_root ? initial_ : trans_[s.last];
      std::copy(row.begin(), row.end(), out.begin());
      return;
    }
    case Kind::intermittent: {
      std::uint32_t run = s.at_root ? 0 : s.run;
      if (run == 0) {
        std::fill(out.begin(), out.end(), 1.0 / r_);
      } else {
        double ps = std::pow(double(run) / (double(run) + 1.0), gamma_);
        double rest = (1.0 - ps) / double(r_ - 1);
        std::fill(out.begin(), out.end(), rest);
        out[sigma_] = ps;
      }
      return;
    }
  }
}

std::vector<double> SourceModel::conditional_distribution(const Prefix& w) const {
  std::vector<double> out(r_);
  conditional(state_for_prefix(w), out);
  return out;
}

void SourceModel::validate_prefix(const Prefix& w) const {
  for (Symbol sym : w)
    if (sym >= r_) throw std::invalid_argument("symbol out of range in prefix");
}

FundamentalInterval SourceModel::refine_interval(const Prefix& w) const {
  validate_prefix(w);
  double a = 0.0, width = 1.0;
  State s = initial_state();
  std::vector<double> q(r_);
  for (Symbol sym : w) {
    conditional(s, q);
    double before = 0.0;
    for (Symbol j = 0; j < sym; ++j) before += q[j];
    a += width * before;
    width *= q[sym];
    s = advance(s, sym);
  }
  return FundamentalInterval{a, a + width};
}

Prefix SourceModel::symbols_from_seed(double u, std::size_t k) const {
  if (!(u > 0.0) || !(u < 1.0)) throw std::invalid_argument("seed must lie strictly in (0,1)");
  KeyStream stream(*this, u, 0);
  Prefix w;
  w.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto sym = stream.deterministic_symbol(i);
    if (!sym)
      throw truncation_error("seed resolution exhausted before requested symbol depth");
    w.push_back(*sym);
  }
  return w;
}

double SourceModel::pi_k(std::uint32_t k) const {
  if (k == 0) return 1.0;
  switch (kind_) {
    case Kind::memoryless:
      return std::pow(p_max_, double(k));
    case Kind::markov: {
      // Max-probability path over last-symbol states.
      std::vector<double> best = initial_;
      for (std::uint32_t step = 1; step < k; ++step) {
        std::vector<double> next(r_, 0.0);
        for (std::uint32_t s = 0; s < r_; ++s)
          for (std::uint32_t t = 0; t < r_; ++t)
            next[t] = std::max(next[t], best[s] * trans_[s][t]);
        best = std::move(next);
      }
      return *std::max_element(best.begin(), best.end());
    }
    case Kind::intermittent: {
      // Max-probability path over trailing-run-length states.
      // best[run] = best probability of a prefix of current length ending in
      // a sigma-run of that length.
      std::vector<double> best(k + 1, 0.0);
      best[1] = 1.0 / r_;  // first symbol sigma
      double best0 = 1.0 / r_;  // first symbol non-sigma
      for (std::uint32_t step = 1; step < k; ++step) {
        std::vector<double> next(k + 1, 0.0);
        double next0 = best0 / r_;  // non-sigma after run 0: uniform
        next[1] = best0 / r_;
        for (std::uint32_t run = 1; run <= step; ++run) {
          if (best[run] == 0.0) continue;
          double ps = std::pow(double(run) / (double(run) + 1.0), gamma_);
          next[run + 1] = std::max(next[run + 1], best[run] * ps);
          if (r_ > 1) {
            double off = best[run] * (1.0 - ps) / double(r_ - 1);
            next0 = std::max(next0, off);
          }
        }
        best0 = next0;
        best = std::move(next);
      }
      double m = best0;
      for (double v : best) m = std::max(m, v);
      return m;
    }
  }
  return 1.0;
}

PiDecay SourceModel::pi_decay() const {
  PiDecay d;
  if (kind_ == Kind::intermittent) {
    d.geometric = false;
    d.gamma = gamma_;
    d.amplitude = pi_amplitude_;
  } else {
    d.geometric = true;
    d.rate = p_max_;
  }
  return d;
}

TameParams SourceModel::symb_tame_params(std::optional<double> epsilon_request) const {
  TameParams t;
  if (kind_ == Kind::intermittent) {
    // pi_k <= A (k+1)^-gamma translates to epsilon = 1/gamma, c = A^(1/gamma).
    t.epsilon = 1.0 / gamma_;
    t.c = std::pow(pi_amplitude_, 1.0 / gamma_);
  } else {
    double eps = epsilon_request.value_or(kDefaultTameEpsilon);
    if (!(eps > 0.0) || !(eps < 1.0))
      throw std::invalid_argument("requested tameness exponent must lie in (0,1)");
    // pi_k <= p_max^k gives beta(u,t) <= 1 + log_b(1/(t-u)) with b = 1/p_max;
    // c is the maximum of (1 + log_b(1/d)) d^eps over d in (0,1].
    double lnb = -std::log(p_max_);
    t.epsilon = eps;
    t.c = (1.0 / eps >= lnb) ? std::pow(1.0 / p_max_, eps) / (std::exp(1.0) * eps * lnb) : 1.0;
    t.c = std::max(t.c, 1.0);
  }
  t.warn_slow_as_convergence = t.epsilon >= 0.25;
  t.warn_divergent = t.epsilon >= 1.0;
  return t;
}

std::string SourceModel::describe() const {
  std::ostringstream os;
  os.precision(12);
  switch (kind_) {
    case Kind::memoryless: {
      os << "memoryless[";
      for (std::size_t i = 0; i < probs_.size(); ++i) os << (i ? "," : "") << probs_[i];
      os << "]";
      break;
    }
    case Kind::markov: {
      os << "markov[init=";
      for (std::size_t i = 0; i < initial_.size(); ++i) os << (i ? "," : "") << initial_[i];
      os << ";rows=";
      for (std::size_t i = 0; i < trans_.size(); ++i) {
        os << (i ? "|" : "");
        for (std::size_t j = 0; j < trans_[i].size(); ++j) os << (j ? "," : "") << trans_[i][j];
      }
      os << "]";
      break;
    }
    case Kind::intermittent:
      os << "intermittent[r=" << r_ << ",gamma=" << gamma_ << ",sigma=" << sigma_ << "]";
      break;
  }
  return os.str();
}

KeyStream::KeyStream(const SourceModel& src, double seed, std::uint64_t extension_seed)
    : src_(&src), seed_(seed), state_(src.initial_state()), extension_seed_(extension_seed) {
  if (!(seed > 0.0) || !(seed < 1.0))
    throw std::invalid_argument("seed must lie strictly in (0,1)");
  lows_.push_back(0.0);
  widths_.push_back(1.0);
}

bool KeyStream::derive_one() {
  if (det_exhausted_) return false;
  if (syms_.size() >= kMaxDeterministicLevels || widths_.back() < kMinIntervalWidth) {
    det_exhausted_ = true;
    return false;
  }
  double a = lows_.back(), w = widths_.back();
  std::vector<double> q(src_->alphabet_size());
  src_->conditional(state_, q);
  // Child boundaries a + w*cum_s; a seed exactly on a boundary resolves to
  // the lower child. The last boundary is pinned to a+w so the children
  // partition the parent exactly.
  Symbol sym = src_->alphabet_size() - 1;
  double lo = a, cum = 0.0;
  for (Symbol s = 0; s + 1 < src_->alphabet_size(); ++s) {
    cum += q[s];
    double hi = a + w * cum;
    if (seed_ <= hi) {
      sym = s;
      break;
    }
    lo = hi;
  }
  double hi = (sym + 1 == src_->alphabet_size()) ? a + w : a + w * cum;
  syms_.push_back(sym);
  lows_.push_back(lo);
  widths_.push_back(hi - lo);
  state_ = src_->advance(state_, sym);
  det_count_ = syms_.size();
  return true;
}

void KeyStream::extend_one() {
  if (!ext_rng_) ext_rng_.emplace(extension_seed_);
  extended_ = true;
  std::vector<double> q(src_->alphabet_size());
  src_->conditional(state_, q);
  double x = ext_rng_->uniform01();
  Symbol sym = src_->alphabet_size() - 1;
  double cum = 0.0;
  for (Symbol s = 0; s + 1 < src_->alphabet_size(); ++s) {
    cum += q[s];
    if (x <= cum) {
      sym = s;
      break;
    }
  }
  double a = lows_.back(), w = widths_.back();
  double before = 0.0;
  for (Symbol j = 0; j < sym; ++j) before += q[j];
  syms_.push_back(sym);
  lows_.push_back(a + w * before);
  widths_.push_back(w * q[sym]);
  state_ = src_->advance(state_, sym);
}

std::optional<Symbol> KeyStream::deterministic_symbol(std::size_t i) {
  while (syms_.size() <= i && derive_one()) {
  }
  if (i < det_count_) return syms_[i];
  return std::nullopt;
}

Symbol KeyStream::symbol_at(std::size_t i) {
  while (syms_.size() <= i) {
    if (!derive_one()) extend_one();
  }
  return syms_[i];
}

FundamentalInterval KeyStream::interval_at_depth(std::size_t k) {
  if (k > 0) symbol_at(k - 1);
  return FundamentalInterval{lows_[k], lows_[k] + widths_[k]};
}

LcpProbe lcp_probe(KeyStream& x, KeyStream& y) {
  if (x.seed() == y.seed())
    throw std::invalid_argument("cost of comparing a key with itself is undefined");
  for (std::size_t i = 0;; ++i) {
    auto sx = x.deterministic_symbol(i);
    auto sy = y.deterministic_symbol(i);
    if (!sx || !sy) return {i, false};
    if (*sx != *sy) return {i, true};
  }
}

std::size_t lcp_depth(KeyStream& x, KeyStream& y) {
  LcpProbe p = lcp_probe(x, y);
  if (!p.exact)
    throw truncation_error(
        "seed resolution exhausted before the two words diverged; "
        "the symbol comparison cost cannot be determined");
  return p.depth;
}

std::size_t lcp_depth(const SourceModel& src, double u, double t) {
  KeyStream a(src, u, 0), b(src, t, 0);
  return lcp_depth(a, b);
}

}  // namespace qcost
