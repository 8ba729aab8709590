#pragma once

#include <string>

#include "qcost/cost.hpp"
#include "qcost/harness.hpp"
#include "qcost/limit.hpp"
#include "qcost/source.hpp"

namespace qcost {

// Source specs accepted everywhere a --source flag appears:
//   "uniform-binary"            fair binary memoryless source
//   "bernoulli:<p>"             binary memoryless with P(symbol 1) = p
//   anything else               path to a key=value source definition file
//
// Source files hold one `key = value` pair per line ('#' starts a comment):
//   kind = memoryless | markov | intermittent
//   probs = [0.3, 0.7]                       (memoryless)
//   initial = [0.5, 0.5]                     (markov)
//   transition = [[0.9, 0.1], [0.2, 0.8]]    (markov)
//   r = 2; gamma = 2.5; sigma = 0            (intermittent)
SourceModel parse_source_spec(const std::string& spec);

// Cost specs: "key", "symbol", "pos:<i0>", "table:<file>". Table files list
// `i, sigma, sigma', value` rows plus an optional `tail_default = <v>` line.
CostModel parse_cost_spec(const std::string& spec);

// Experiment config file for the convergence harness, same key=value syntax:
//   source = uniform-binary
//   cost = key
//   alpha = 0.5
//   n_grid = [64, 256, 1024]
//   reps = 200
//   p_values = [1, 2]
//   delta = 1e-3
//   seed = 1
//   threads = 1
//   paths = 10
//   out_dir = results
ExperimentConfig parse_experiment_config(const std::string& path);

// "x1,x2,y1,y2" with x1 < x2 and y1 < y2.
Rect parse_rect(const std::string& text);

}  // namespace qcost
