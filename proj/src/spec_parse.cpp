#include "qcost/spec_parse.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace qcost {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad numeric value for " + what + ": '" + t + "'");
  }
  if (used != t.size()) {
    throw std::invalid_argument("trailing junk in " + what + ": '" + t + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  const double v = parse_double(text, what);
  if (v < 0 || v != static_cast<double>(static_cast<std::uint64_t>(v))) {
    throw std::invalid_argument(what + " must be a nonnegative integer, got '" + trim(text) + "'");
  }
  return static_cast<std::uint64_t>(v);
}

std::vector<std::string> split_top_level(const std::string& body) {
  // Splits on commas that are not nested inside brackets.
  std::vector<std::string> parts;
  std::string cur;
  int depth = 0;
  for (char ch : body) {
    if (ch == '[') ++depth;
    if (ch == ']') --depth;
    if (ch == ',' && depth == 0) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  const std::string last = trim(cur);
  if (!last.empty()) parts.push_back(last);
  return parts;
}

std::string strip_brackets(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
    throw std::invalid_argument(what + " must be a bracketed list, got '" + t + "'");
  }
  return t.substr(1, t.size() - 2);
}

std::vector<double> parse_vector(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const std::string& part : split_top_level(strip_brackets(text, what))) {
    out.push_back(parse_double(part, what));
  }
  return out;
}

std::vector<std::vector<double>> parse_matrix(const std::string& text, const std::string& what) {
  std::vector<std::vector<double>> out;
  for (const std::string& part : split_top_level(strip_brackets(text, what))) {
    out.push_back(parse_vector(part, what + " row"));
  }
  return out;
}

// key = value pairs, one per line; '#' starts a comment; later keys win.
std::map<std::string, std::string> read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ": expected 'key = value', got '" + t + "'");
    }
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key,
                           const std::string& path) {
  auto it = kv.find(key);
  if (it == kv.end()) throw std::invalid_argument(path + ": missing required key '" + key + "'");
  return it->second;
}

SourceModel source_from_file(const std::string& path) {
  const auto kv = read_kv_file(path);
  const std::string kind = require(kv, "kind", path);
  if (kind == "memoryless") {
    return SourceModel::memoryless(parse_vector(require(kv, "probs", path), "probs"));
  }
  if (kind == "markov") {
    return SourceModel::markov(parse_vector(require(kv, "initial", path), "initial"),
                               parse_matrix(require(kv, "transition", path), "transition"));
  }
  if (kind == "intermittent") {
    const std::uint64_t r = parse_u64(require(kv, "r", path), "r");
    const double gamma = parse_double(require(kv, "gamma", path), "gamma");
    const std::uint64_t sigma = parse_u64(require(kv, "sigma", path), "sigma");
    if (r < 2) throw std::invalid_argument(path + ": r must be >= 2");
    if (sigma >= r) throw std::invalid_argument(path + ": sigma must be < r");
    return SourceModel::intermittent(static_cast<std::uint32_t>(r), gamma,
                                     static_cast<Symbol>(sigma));
  }
  throw std::invalid_argument(path + ": unknown kind '" + kind + "'");
}

PositionalTable table_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open cost table: " + path);
  PositionalTable table;
  bool any_line = false;
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    for (char& ch : t) {
      if (ch == ',' || ch == '=') ch = ' ';
    }
    std::istringstream row(t);
    std::string first;
    row >> first;
    if (first == "tail_default") {
      std::string v;
      row >> v;
      table.tail_default = parse_double(v, "tail_default");
      any_line = true;
      continue;
    }
    std::string s, sp, val;
    row >> s >> sp >> val;
    std::string rest;
    if (val.empty() || (row >> rest)) {
      throw std::invalid_argument(path + ": expected 'i, sigma, sigma\\', value', got '" + t + "'");
    }
    const std::uint64_t i = parse_u64(first, "table position");
    if (i < 1) throw std::invalid_argument(path + ": positions are 1-based");
    table.set(static_cast<std::uint32_t>(i), static_cast<Symbol>(parse_u64(s, "sigma")),
              static_cast<Symbol>(parse_u64(sp, "sigma'")), parse_double(val, "table value"));
    any_line = true;
  }
  if (!any_line) throw std::invalid_argument(path + ": empty cost table");
  return table;
}

}  // namespace

SourceModel parse_source_spec(const std::string& spec) {
  const std::string t = trim(spec);
  if (t.empty()) throw std::invalid_argument("empty source spec");
  if (t == "uniform-binary") return SourceModel::memoryless({0.5, 0.5});
  for (const std::string& prefix : {std::string("bernoulli:"), std::string("bernoulli-")}) {
    if (t.rfind(prefix, 0) == 0) {
      const double p = parse_double(t.substr(prefix.size()), "bernoulli parameter");
      if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("bernoulli parameter must lie in (0,1)");
      }
      return SourceModel::memoryless({1.0 - p, p});
    }
  }
  return source_from_file(t);
}

CostModel parse_cost_spec(const std::string& spec) {
  const std::string t = trim(spec);
  if (t == "key") return CostModel::key();
  if (t == "symbol") return CostModel::symbol();
  if (t.rfind("pos:", 0) == 0) {
    const std::uint64_t i0 = parse_u64(t.substr(4), "indicator position");
    if (i0 < 1) throw std::invalid_argument("indicator position must be >= 1");
    return CostModel::position_indicator(static_cast<std::uint32_t>(i0));
  }
  if (t.rfind("table:", 0) == 0) {
    return CostModel::positional(table_from_file(t.substr(6)));
  }
  throw std::invalid_argument("unknown cost spec '" + t +
                              "' (expected key|symbol|pos:<i0>|table:<file>)");
}

ExperimentConfig parse_experiment_config(const std::string& path) {
  const auto kv = read_kv_file(path);
  ExperimentConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "source") {
      cfg.source_spec = value;
    } else if (key == "cost") {
      cfg.cost_spec = value;
    } else if (key == "alpha") {
      cfg.alpha = parse_double(value, "alpha");
    } else if (key == "n_grid") {
      cfg.n_grid.clear();
      for (double v : parse_vector(value, "n_grid")) {
        if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) {
          throw std::invalid_argument(path + ": n_grid entries must be positive integers");
        }
        cfg.n_grid.push_back(static_cast<std::size_t>(v));
      }
    } else if (key == "reps") {
      cfg.reps = static_cast<std::size_t>(parse_u64(value, "reps"));
    } else if (key == "p_values") {
      cfg.p_values = parse_vector(value, "p_values");
    } else if (key == "delta") {
      cfg.delta = parse_double(value, "delta");
    } else if (key == "seed") {
      cfg.master_seed = parse_u64(value, "seed");
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(parse_u64(value, "threads"));
    } else if (key == "paths") {
      cfg.paths = static_cast<std::size_t>(parse_u64(value, "paths"));
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else {
      throw std::invalid_argument(path + ": unknown config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

Rect parse_rect(const std::string& text) {
  const auto parts = split_top_level(trim(text));
  if (parts.size() != 4) {
    throw std::invalid_argument("rect must be 'x1,x2,y1,y2', got '" + text + "'");
  }
  Rect r{parse_double(parts[0], "x1"), parse_double(parts[1], "x2"), parse_double(parts[2], "y1"),
         parse_double(parts[3], "y2")};
  if (!(r.x1 < r.x2) || !(r.y1 < r.y2)) {
    throw std::invalid_argument("rect requires x1 < x2 and y1 < y2");
  }
  return r;
}

}  // namespace qcost
