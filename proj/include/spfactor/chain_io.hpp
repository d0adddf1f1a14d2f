#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "spfactor/diagnostics.hpp"
#include "spfactor/sampler.hpp"

namespace spfactor {

// Chain record file: CSV with header "iteration,<param names...>" and one row
// per saved draw. Values print with %.17g so rereading reproduces every
// double exactly and identical runs produce identical bytes.
void write_chain_csv(std::ostream& out, const RunResult& run);

struct ChainFile {
  std::vector<std::string> param_names;
  std::vector<std::int64_t> iterations;
  std::vector<std::vector<double>> draws;
  int n = 0;  // inferred from the nu[...] columns
  int p = 0;  // inferred from the beta.* columns
};

ChainFile read_chain_csv(std::istream& in);

// Summary CSV: name,mean,q025,q975,ess,rhat (endpoints are the equal-tailed
// interval at the requested level; unavailable diagnostics print as nan).
void write_summary_csv(std::ostream& out, const PosteriorSummary& summary);

// Per-unit CSV keyed by unit_id for map joins.
void write_per_unit_csv(std::ostream& out, const std::vector<PerUnitRow>& rows);

std::string format_double(double v);  // %.17g

}  // namespace spfactor
