#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcost/rng.hpp"

namespace qcost {

using Symbol = std::uint32_t;
using Prefix = std::vector<Symbol>;

// Raised when a computation would need finer seed resolution than a 64-bit
// double provides (symbol depth past the deterministic cap).
class truncation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Seed interval of a prefix: the set of seeds whose emitted word starts with
// it. Width equals the prefix probability.
struct FundamentalInterval {
  double a = 0.0;
  double b = 1.0;
  double width() const { return b - a; }
  double midpoint() const { return 0.5 * (a + b); }
};

// Pointwise cost bound beta(u,t) <= c * (t-u)^-epsilon.
struct TameParams {
  double epsilon = 0.0;
  double c = 1.0;
  bool warn_slow_as_convergence = false;  // epsilon >= 1/4
  bool warn_divergent = false;            // epsilon >= 1
};

// Upper-bound model for pi_k = max prefix probability at depth k.
struct PiDecay {
  bool geometric = true;
  double rate = 0.5;       // geometric: pi_k <= rate^k
  double gamma = 0.0;      // polynomial: pi_k <= amplitude*(k+1)^-gamma
  double amplitude = 1.0;

  double bound(std::uint32_t k) const;
  // Bound on sum_{j>k} pi_j; +inf when the polynomial exponent is <= 1.
  double tail(std::uint32_t k) const;
};

// Deterministic symbol derivation from a double seed stops at whichever cap
// hits first; deeper symbols exist only as sampled extensions (KeyStream).
inline constexpr std::size_t kMaxDeterministicLevels = 4096;
inline constexpr double kMinIntervalWidth = 1e-15;
// Quadrature never evaluates beta on seed pairs closer than this; below it
// geometric sources could exhaust deterministic derivation before diverging.
inline constexpr double kMinPairSeparation = 4e-13;
inline constexpr double kProbabilityTolerance = 1e-12;
inline constexpr double kDefaultTameEpsilon = 0.1;

// Pointwise evaluators clamp quadrature nodes into the open unit interval;
// the endpoints are measure-zero and carry the constant extreme words.
inline double clamp_seed_interior(double u) {
  constexpr double lo = 0x1p-60;
  constexpr double hi = 0x1.fffffffffffffp-1;
  return u < lo ? lo : (u > hi ? hi : u);
}

class SourceModel {
 public:
  enum class Kind { memoryless, markov, intermittent };

  static SourceModel memoryless(std::vector<double> probs);
  static SourceModel markov(std::vector<double> initial,
                            std::vector<std::vector<double>> transition);
  static SourceModel intermittent(std::uint32_t r, double gamma, Symbol sigma);

  Kind kind() const { return kind_; }
  std::uint32_t alphabet_size() const { return r_; }
  double intermittent_gamma() const { return gamma_; }
  Symbol intermittent_sigma() const { return sigma_; }
  const std::vector<double>& memoryless_probs() const { return probs_; }
  const std::vector<double>& markov_initial() const { return initial_; }
  const std::vector<std::vector<double>>& markov_transition() const { return trans_; }

  // Next-symbol distribution depends only on a small state: the last symbol
  // (Markov) or the trailing run length of sigma (intermittent).
  struct State {
    Symbol last = 0;
    std::uint32_t run = 0;
    bool at_root = true;
  };

  State initial_state() const { return State{}; }
  State advance(const State& s, Symbol sym) const;
  State state_for_prefix(const Prefix& w) const;

  void conditional(const State& s, std::span<double> out) const;
  std::vector<double> conditional_distribution(const Prefix& w) const;

  FundamentalInterval refine_interval(const Prefix& w) const;

  // First k emitted symbols of the key with the given seed. Throws
  // truncation_error when k exceeds what the seed can resolve.
  Prefix symbols_from_seed(double u, std::size_t k) const;

  double pi_k(std::uint32_t k) const;
  PiDecay pi_decay() const;
  TameParams symb_tame_params(std::optional<double> epsilon_request = {}) const;

  double p_max() const { return p_max_; }
  std::string describe() const;
  void validate_prefix(const Prefix& w) const;

 private:
  SourceModel() = default;

  Kind kind_ = Kind::memoryless;
  std::uint32_t r_ = 2;
  std::vector<double> probs_;               // memoryless
  std::vector<double> initial_;             // markov
  std::vector<std::vector<double>> trans_;  // markov
  double gamma_ = 0.0;                      // intermittent
  Symbol sigma_ = 0;                        // intermittent
  double p_max_ = 0.5;
  double pi_amplitude_ = 1.0;               // intermittent: max pi_k*(k+1)^gamma
};

// Lazily generated symbol stream of one key. Symbols up to the deterministic
// cap come from interval refinement of the seed; deeper ones are sampled from
// the conditional distribution (memoized, flagged). Cost evaluation never
// consumes sampled symbols: comparisons that would need them abort instead.
class KeyStream {
 public:
  KeyStream(const SourceModel& src, double seed, std::uint64_t extension_seed);

  double seed() const { return seed_; }
  bool used_extension() const { return extended_; }

  // Symbol at 0-based depth i, deterministic derivations only; nullopt once
  // the seed's resolution is exhausted.
  std::optional<Symbol> deterministic_symbol(std::size_t i);

  // Symbol at 0-based depth i, extending with sampled symbols past the cap.
  Symbol symbol_at(std::size_t i);

  // Interval of the first k symbols (generates them if needed).
  FundamentalInterval interval_at_depth(std::size_t k);

 private:
  bool derive_one();   // one more deterministic symbol; false when exhausted
  void extend_one();   // one more sampled symbol

  const SourceModel* src_;
  double seed_;
  std::vector<Symbol> syms_;
  std::vector<double> lows_;  // lows_[k], widths_[k]: interval after k symbols
  std::vector<double> widths_;
  SourceModel::State state_;
  std::size_t det_count_ = 0;
  bool det_exhausted_ = false;
  bool extended_ = false;
  std::uint64_t extension_seed_;
  std::optional<RngStream> ext_rng_;
};

// Common-prefix probe: `depth` deterministically shared symbols; `exact` is
// false when a stream exhausted before the words diverged, so the true lcp is
// only known to be >= depth.
struct LcpProbe {
  std::size_t depth = 0;
  bool exact = false;
};
LcpProbe lcp_probe(KeyStream& x, KeyStream& y);

// Depth of the longest common prefix of the words emitted for two distinct
// seeds. Throws std::invalid_argument on equal seeds and truncation_error if
// the seeds cannot be separated within deterministic resolution.
std::size_t lcp_depth(KeyStream& x, KeyStream& y);
std::size_t lcp_depth(const SourceModel& src, double u, double t);

}  // namespace qcost
