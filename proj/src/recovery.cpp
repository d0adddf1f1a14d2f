#include "spfactor/recovery.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include "spfactor/diagnostics.hpp"
#include "spfactor/errors.hpp"

namespace spfactor {
namespace {

struct Tracked {
  std::string name;
  double truth;
  bool is_beta;
};

std::vector<Tracked> tracked_params(const SimulationSpec& spec,
                                    const std::vector<std::string>& names) {
  std::vector<Tracked> out;
  for (std::size_t c = 0; c < spec.beta.size(); ++c) {
    out.push_back({"beta." + names[c], spec.beta[c], true});
  }
  out.push_back({"tau2", spec.tau2, false});
  out.push_back({"tau2_death", spec.tau2_death, false});
  out.push_back({"sigma2_death", spec.sigma2_death, false});
  out.push_back({"sigma2_treatment", spec.sigma2_treatment, false});
  return out;
}

}  // namespace

std::string RecoveryResult::to_text() const {
  std::ostringstream os;
  os << "param,truth,covered,total,coverage,mean_bias,sign_correct\n";
  for (const auto& a : aggregate) {
    os << a.param << ',' << a.truth << ',' << a.covered << ',' << a.total
       << ',' << (a.total > 0 ? static_cast<double>(a.covered) / a.total : 0.0)
       << ',' << a.mean_bias << ',' << a.sign_correct << '\n';
  }
  return os.str();
}

RecoveryResult recovery_study(const SimulationSpec& spec,
                              const RecoveryConfig& cfg) {
  if (cfg.replicates < 1) throw ValidationError("recovery: replicates < 1");
  const AdjacencyGraph graph = resolve_graph(spec);
  const int reps = cfg.replicates;

  std::vector<std::vector<RecoveryRow>> per_rep(reps);
  std::vector<std::string> failure(reps);
  std::atomic<int> next{0};

  const auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= reps) return;
      try {
        Rng sim_rng = Rng::for_stream(cfg.seed, 2 * r);
        const SimulationResult sim = simulate_dataset(spec, graph, sim_rng);

        // Refit through the standard ingestion path.
        Dataset fit_data = assemble_dataset(
            graph.n, sim.data.deaths, sim.data.treatments_lower,
            sim.data.censored, sim.data.populations, sim.data.covariates,
            sim.data.covariate_names);

        SamplerConfig fit_cfg = cfg.fit;
        fit_cfg.seed = Rng::stream_seed(cfg.seed, 2 * r + 1);
        const RunResult run = run_chain(fit_cfg, graph, fit_data, 0);
        const PosteriorSummary summary =
            summarize(run.param_names, {&run.draws}, cfg.level);

        std::map<std::string, const SummaryRow*> by_name;
        for (const auto& row : summary.rows) by_name[row.name] = &row;
        for (const auto& t : tracked_params(spec, fit_data.covariate_names)) {
          const auto it = by_name.find(t.name);
          if (it == by_name.end()) {
            throw ComputeError("recovery: parameter missing from summary: " +
                               t.name);
          }
          const SummaryRow& s = *it->second;
          RecoveryRow row;
          row.replicate = r;
          row.param = t.name;
          row.truth = t.truth;
          row.mean = s.mean;
          row.lo = s.q_lo;
          row.hi = s.q_hi;
          row.covered = s.q_lo <= t.truth && t.truth <= s.q_hi;
          per_rep[r].push_back(std::move(row));
        }
      } catch (const std::exception& e) {
        failure[r] = e.what();
      }
    }
  };

  const int nthreads = std::max(1, std::min(cfg.threads, reps));
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (int r = 0; r < reps; ++r) {
    if (!failure[r].empty()) {
      throw ComputeError("recovery replicate " + std::to_string(r) +
                         " failed: " + failure[r]);
    }
  }

  RecoveryResult out;
  std::map<std::string, RecoveryAggregate> agg;
  std::vector<std::string> order;
  for (int r = 0; r < reps; ++r) {
    for (const auto& row : per_rep[r]) {
      auto [it, inserted] = agg.try_emplace(row.param);
      RecoveryAggregate& a = it->second;
      if (inserted) {
        a.param = row.param;
        a.truth = row.truth;
        order.push_back(row.param);
      }
      ++a.total;
      if (row.covered) ++a.covered;
      a.mean_bias += (row.mean - row.truth);
      if ((row.mean > 0.0) == (row.truth > 0.0)) ++a.sign_correct;
      out.rows.push_back(row);
    }
  }
  for (const auto& name : order) {
    RecoveryAggregate a = agg[name];
    if (a.total > 0) a.mean_bias /= a.total;
    out.aggregate.push_back(std::move(a));
  }
  return out;
}

}  // namespace spfactor
