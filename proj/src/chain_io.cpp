#include "spfactor/chain_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>

#include "spfactor/csv.hpp"
#include "spfactor/errors.hpp"

namespace spfactor {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_chain_csv(std::ostream& out, const RunResult& run) {
  out << "iteration";
  for (const auto& name : run.param_names) out << ',' << name;
  out << '\n';
  for (std::size_t t = 0; t < run.draws.size(); ++t) {
    out << run.saved_iterations[t];
    for (double v : run.draws[t]) out << ',' << format_double(v);
    out << '\n';
  }
}

ChainFile read_chain_csv(std::istream& in) {
  ChainFile cf;
  std::string line;
  std::size_t lineno = 0;
  bool saw_header = false;
  while (csv::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (!saw_header) {
      if (f.empty() || f[0] != "iteration") {
        throw ValidationError("chain line 1: expected 'iteration,...' header");
      }
      cf.param_names.assign(f.begin() + 1, f.end());
      for (const auto& name : cf.param_names) {
        if (name.rfind("nu[", 0) == 0) ++cf.n;
        if (name.rfind("beta.", 0) == 0) ++cf.p;
      }
      saw_header = true;
      continue;
    }
    if (f.size() != cf.param_names.size() + 1) {
      throw ValidationError("chain line " + std::to_string(lineno) +
                            ": wrong field count");
    }
    cf.iterations.push_back(csv::parse_int(f[0], "chain", lineno,
                                           "iteration"));
    std::vector<double> row(cf.param_names.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = csv::parse_double(f[j + 1], "chain", lineno,
                                 cf.param_names[j]);
    }
    cf.draws.push_back(std::move(row));
  }
  if (!saw_header) throw ValidationError("chain file is empty");
  if (cf.draws.empty()) throw ValidationError("chain file has no draws");
  return cf;
}

void write_summary_csv(std::ostream& out, const PosteriorSummary& summary) {
  out << "name,mean,q025,q975,ess,rhat\n";
  for (const auto& r : summary.rows) {
    out << r.name << ',' << format_double(r.mean) << ','
        << format_double(r.q_lo) << ',' << format_double(r.q_hi) << ','
        << format_double(r.ess) << ',' << format_double(r.rhat) << '\n';
  }
}

void write_per_unit_csv(std::ostream& out,
                        const std::vector<PerUnitRow>& rows) {
  out << "unit_id,log_smr_mean,log_smr_q025,log_smr_q975,"
         "log_trr_mean,log_trr_q025,log_trr_q975,"
         "loading_mean,loading_q025,loading_q975,"
         "nu_mean,nu_q025,nu_q975\n";
  for (const auto& r : rows) {
    out << r.unit << ',' << format_double(r.log_smr_mean) << ','
        << format_double(r.log_smr_lo) << ',' << format_double(r.log_smr_hi)
        << ',' << format_double(r.log_trr_mean) << ','
        << format_double(r.log_trr_lo) << ',' << format_double(r.log_trr_hi)
        << ',' << format_double(r.loading_mean) << ','
        << format_double(r.loading_lo) << ',' << format_double(r.loading_hi)
        << ',' << format_double(r.nu_mean) << ',' << format_double(r.nu_lo)
        << ',' << format_double(r.nu_hi) << '\n';
  }
}

}  // namespace spfactor
