// Command-line front end: fit / simulate / check / summarize.
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure,
// 3 check failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "spfactor/chain_io.hpp"
#include "spfactor/csv.hpp"
#include "spfactor/diagnostics.hpp"
#include "spfactor/errors.hpp"
#include "spfactor/geweke.hpp"
#include "spfactor/kernels.hpp"
#include "spfactor/recovery.hpp"
#include "spfactor/sampler.hpp"
#include "spfactor/sha256.hpp"
#include "spfactor/simulator.hpp"
#include "spfactor/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spfactor;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitCheckFailed = 3;

void apply_kernel_lane(const std::string& lane) {
  if (lane == "auto") return;
  if (lane == "scalar") {
    kernels::set_lane(kernels::Lane::scalar);
  } else if (lane == "avx2") {
    kernels::set_lane(kernels::Lane::avx2);
  } else {
    throw ValidationError("unknown kernel lane: " + lane);
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input file: " + path);
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ComputeError("cannot open output file: " + path.string());
  return out;
}

void ensure_out_dir(const std::string& dir) {
  if (dir.empty()) throw ValidationError("output directory not set");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory: " + dir);
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const json& options,
                    const std::vector<std::string>& input_paths,
                    const std::vector<std::string>& outputs) {
  json m;
  m["version"] = kVersion;
  m["command"] = command;
  m["options"] = options;
  json inputs = json::object();
  for (const auto& p : input_paths) inputs[p] = sha256_file_hex(p);
  m["input_sha256"] = inputs;
  m["outputs"] = outputs;
  m["kernel_lane"] = kernels::lane_name(kernels::active_lane());
  auto out = open_output(dir / "manifest.json");
  out << m.dump(2) << '\n';
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  if (s.empty()) return out;
  for (const auto& tok : csv::split(s)) {
    out.push_back(csv::parse_double(tok, "option", 0, "list"));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  if (s.empty()) return out;
  for (const auto& tok : csv::split(s)) {
    out.push_back(static_cast<int>(csv::parse_int(tok, "option", 0, "list")));
  }
  return out;
}

// ---- fit --------------------------------------------------------------

struct FitOptions {
  std::string adjacency, data, covariates, out;
  SamplerConfig sampler;
  int chains = 1;
  int threads = 0;  // 0: one thread per chain up to hardware
  double level = 0.95;
  std::string kernels_lane = "auto";
};

int cmd_fit(const FitOptions& opt) {
  apply_kernel_lane(opt.kernels_lane);
  opt.sampler.validate();
  if (opt.chains < 1) throw ValidationError("chains must be >= 1");
  ensure_out_dir(opt.out);
  const fs::path out_dir(opt.out);

  auto adj_in = open_input(opt.adjacency);
  auto data_in = open_input(opt.data);
  auto cov_in = open_input(opt.covariates);

  const DataRows rows = load_data_csv(data_in);
  const int n = static_cast<int>(rows.populations.size());
  const AdjacencyGraph graph = load_adjacency(adj_in, n);
  const CovariateColumns cov = load_covariates_csv(cov_in);
  for (const auto& col : cov.cols) {
    if (static_cast<int>(col.size()) != n) {
      throw ValidationError("covariates row count does not match data rows");
    }
  }
  const Dataset dataset =
      assemble_dataset(n, rows.deaths, rows.treatments_lower, rows.censored,
                       rows.populations, cov.cols, cov.names);

  bool any_censored = false;
  for (auto c : dataset.censored) any_censored |= c != 0;
  if (any_censored) {
    std::cerr << "note: statewide treatment rate computed from observed "
                 "lower bounds of censored units\n";
  }

  // One substream per chain, so results do not depend on scheduling.
  std::vector<RunResult> results(opt.chains);
  std::vector<std::string> errors(opt.chains);
  {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    const int nthreads =
        opt.threads > 0
            ? opt.threads
            : std::min<int>(opt.chains,
                            std::max(1u, std::thread::hardware_concurrency()));
    for (int t = 0; t < nthreads; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          const int k = next.fetch_add(1);
          if (k >= opt.chains) return;
          try {
            results[k] = run_chain(opt.sampler, graph, dataset,
                                   static_cast<std::uint64_t>(k));
          } catch (const std::exception& e) {
            errors[k] = e.what();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (int k = 0; k < opt.chains; ++k) {
    if (!errors[k].empty()) {
      throw ComputeError("chain " + std::to_string(k) +
                         " failed: " + errors[k]);
    }
  }

  std::vector<std::string> outputs;
  for (int k = 0; k < opt.chains; ++k) {
    const std::string name = "chain_" + std::to_string(k) + ".csv";
    auto out = open_output(out_dir / name);
    write_chain_csv(out, results[k]);
    outputs.push_back(name);
  }

  {
    auto out = open_output(out_dir / "acceptance_report.txt");
    for (int k = 0; k < opt.chains; ++k) {
      out << "chain " << k << "\n" << results[k].report.to_text();
    }
    outputs.push_back("acceptance_report.txt");
  }

  std::vector<const std::vector<std::vector<double>>*> chain_ptrs;
  for (const auto& r : results) chain_ptrs.push_back(&r.draws);
  const PosteriorSummary summary =
      summarize(results[0].param_names, chain_ptrs, opt.level);
  {
    auto out = open_output(out_dir / "summary.csv");
    write_summary_csv(out, summary);
    outputs.push_back("summary.csv");
  }

  std::vector<std::vector<double>> pooled;
  for (const auto& r : results) {
    pooled.insert(pooled.end(), r.draws.begin(), r.draws.end());
  }
  const PerUnitSeries series = per_unit_rates(pooled, n, dataset.p);
  {
    auto out = open_output(out_dir / "per_unit.csv");
    write_per_unit_csv(out, summarize_per_unit(series, opt.level));
    outputs.push_back("per_unit.csv");
  }

  json options;
  options["adjacency"] = opt.adjacency;
  options["data"] = opt.data;
  options["covariates"] = opt.covariates;
  options["iterations"] = opt.sampler.iterations;
  options["burn_in"] = opt.sampler.burn_in;
  options["thin"] = opt.sampler.thin;
  options["seed"] = opt.sampler.seed;
  options["chains"] = opt.chains;
  options["adapt_target"] = opt.sampler.adapt_target;
  options["adapt_batch"] = opt.sampler.adapt_batch;
  options["level"] = opt.level;
  options["treatment_rate_uses_lower_bounds"] = any_censored;
  write_manifest(out_dir, "fit", options,
                 {opt.adjacency, opt.data, opt.covariates}, outputs);
  return kExitOk;
}

// ---- simulate ----------------------------------------------------------

int cmd_simulate(const SimulationSpec& spec, const std::string& out_dir_s) {
  ensure_out_dir(out_dir_s);
  const fs::path out_dir(out_dir_s);
  const AdjacencyGraph graph = resolve_graph(spec);
  Rng rng = Rng::for_stream(spec.seed, 0);
  const SimulationResult sim = simulate_dataset(spec, graph, rng);

  {
    auto out = open_output(out_dir / "adjacency.csv");
    out << "from,to\n";
    for (std::size_t e = 0; e < graph.num_edges(); ++e) {
      out << graph.edge_a[e] << ',' << graph.edge_b[e] << '\n';
    }
  }
  {
    auto out = open_output(out_dir / "data.csv");
    out << "unit_id,population,deaths,treatment_lower,censored\n";
    for (int i = 0; i < graph.n; ++i) {
      out << i << ',' << sim.data.populations[i] << ',' << sim.data.deaths[i]
          << ',' << sim.data.treatments_lower[i] << ','
          << int(sim.data.censored[i]) << '\n';
    }
  }
  {
    auto out = open_output(out_dir / "covariates.csv");
    out << "unit_id";
    for (const auto& name : sim.data.covariate_names) out << ',' << name;
    out << '\n';
    for (int i = 0; i < graph.n; ++i) {
      out << i;
      for (const auto& col : sim.data.covariates) {
        out << ',' << format_double(col[i]);
      }
      out << '\n';
    }
  }
  {
    auto out = open_output(out_dir / "truth.csv");
    out << "name,value\n";
    const auto names =
        ChainState::flat_names(graph.n, sim.data.covariate_names);
    std::vector<double> flat;
    sim.truth.flatten(flat);
    for (std::size_t j = 0; j < names.size(); ++j) {
      out << names[j] << ',' << format_double(flat[j]) << '\n';
    }
    for (int i = 0; i < graph.n; ++i) {
      out << "treatment_true[" << i << "]," << sim.treatments_true[i] << '\n';
    }
  }

  json options;
  options["seed"] = spec.seed;
  options["lattice_rows"] = spec.lattice_rows;
  options["lattice_cols"] = spec.lattice_cols;
  options["edge_list"] = spec.edge_list_path;
  options["beta"] = spec.beta;
  options["tau2"] = spec.tau2;
  options["tau2_death"] = spec.tau2_death;
  options["sigma2_death"] = spec.sigma2_death;
  options["sigma2_treatment"] = spec.sigma2_treatment;
  std::vector<std::string> inputs;
  if (!spec.edge_list_path.empty()) inputs.push_back(spec.edge_list_path);
  write_manifest(out_dir, "simulate", options, inputs,
                 {"adjacency.csv", "data.csv", "covariates.csv", "truth.csv"});
  return kExitOk;
}

// ---- check -------------------------------------------------------------

int cmd_check_geweke(const SimulationSpec& spec, const GewekeConfig& cfg,
                     double z_threshold, const std::string& out_dir) {
  const GewekeResult result = geweke_test(spec, cfg);
  std::cout << result.to_text();
  if (!out_dir.empty()) {
    ensure_out_dir(out_dir);
    auto out = open_output(fs::path(out_dir) / "geweke_report.csv");
    out << result.to_text();
  }
  if (!result.enough_samples) {
    std::cerr << "error: effective sample size below target ("
              << result.min_ess_seen << " < " << cfg.min_ess
              << "); lengthen the chain\n";
    return kExitCheckFailed;
  }
  if (result.max_abs_z >= z_threshold) {
    std::cerr << "error: geweke battery failed (max |z| = "
              << result.max_abs_z << " >= " << z_threshold << ")\n";
    return kExitCheckFailed;
  }
  std::cout << "geweke: pass (max |z| = " << result.max_abs_z << ")\n";
  return kExitOk;
}

int cmd_check_recovery(const SimulationSpec& spec, const RecoveryConfig& cfg,
                       int min_cover, int min_sign,
                       const std::string& out_dir) {
  const RecoveryResult result = recovery_study(spec, cfg);
  std::cout << result.to_text();
  if (!out_dir.empty()) {
    ensure_out_dir(out_dir);
    auto out = open_output(fs::path(out_dir) / "recovery_report.csv");
    out << "replicate,param,truth,mean,q_lo,q_hi,covered\n";
    for (const auto& r : result.rows) {
      out << r.replicate << ',' << r.param << ',' << format_double(r.truth)
          << ',' << format_double(r.mean) << ',' << format_double(r.lo) << ','
          << format_double(r.hi) << ',' << int(r.covered) << '\n';
    }
  }
  bool ok = true;
  for (const auto& a : result.aggregate) {
    if (a.param.rfind("beta.", 0) != 0) continue;
    if (a.covered < min_cover) {
      std::cerr << "error: coverage for " << a.param << " is " << a.covered
                << "/" << a.total << " (< " << min_cover << ")\n";
      ok = false;
    }
    if (a.sign_correct < min_sign) {
      std::cerr << "error: sign recovery for " << a.param << " is "
                << a.sign_correct << "/" << a.total << " (< " << min_sign
                << ")\n";
      ok = false;
    }
  }
  if (!ok) return kExitCheckFailed;
  std::cout << "recovery: pass\n";
  return kExitOk;
}

// ---- summarize -----------------------------------------------------------

int cmd_summarize(const std::vector<std::string>& chain_paths, double level,
                  const std::string& out_dir_s) {
  if (chain_paths.empty()) throw ValidationError("no chain files given");
  ensure_out_dir(out_dir_s);
  const fs::path out_dir(out_dir_s);

  std::vector<ChainFile> files;
  for (const auto& path : chain_paths) {
    auto in = open_input(path);
    files.push_back(read_chain_csv(in));
    if (files.back().param_names != files[0].param_names) {
      throw ValidationError("chain files disagree on parameter names: " +
                            path);
    }
  }
  std::vector<const std::vector<std::vector<double>>*> chains;
  for (const auto& f : files) chains.push_back(&f.draws);
  const PosteriorSummary summary =
      summarize(files[0].param_names, chains, level);
  {
    auto out = open_output(out_dir / "summary.csv");
    write_summary_csv(out, summary);
  }
  std::vector<std::vector<double>> pooled;
  for (const auto& f : files) {
    pooled.insert(pooled.end(), f.draws.begin(), f.draws.end());
  }
  const PerUnitSeries series = per_unit_rates(pooled, files[0].n, files[0].p);
  {
    auto out = open_output(out_dir / "per_unit.csv");
    write_per_unit_csv(out, summarize_per_unit(series, level));
  }
  json options;
  options["chains"] = chain_paths;
  options["level"] = level;
  write_manifest(out_dir, "summarize", options, chain_paths,
                 {"summary.csv", "per_unit.csv"});
  return kExitOk;
}

void add_spec_options(CLI::App* cmd, SimulationSpec& spec) {
  cmd->add_option("--lattice-rows", spec.lattice_rows, "Lattice rows");
  cmd->add_option("--lattice-cols", spec.lattice_cols, "Lattice columns");
  cmd->add_option("--edge-list", spec.edge_list_path,
                  "Adjacency CSV (alternative to lattice dims)");
  cmd->add_option("--n-units", spec.n_units, "Unit count for --edge-list");
  cmd->add_option("--beta0-death", spec.beta0_death, "True death intercept");
  cmd->add_option("--beta0-treatment", spec.beta0_treatment,
                  "True treatment intercept");
  cmd->add_option_function<std::string>(
      "--beta",
      [&spec](const std::string& s) { spec.beta = parse_double_list(s); },
      "True factor coefficients, comma separated");
  cmd->add_option("--tau2", spec.tau2, "True factor variance");
  cmd->add_option("--tau2-death", spec.tau2_death, "True loading variance");
  cmd->add_option("--sigma2-death", spec.sigma2_death,
                  "True death error variance");
  cmd->add_option("--sigma2-treatment", spec.sigma2_treatment,
                  "True treatment error variance");
  cmd->add_option("--pop-min", spec.pop_min, "Minimum population");
  cmd->add_option("--pop-max", spec.pop_max, "Maximum population");
  cmd->add_option("--base-rate-death", spec.base_rate_death,
                  "Baseline death rate per person");
  cmd->add_option("--base-rate-treatment", spec.base_rate_treatment,
                  "Baseline treatment rate per person");
  cmd->add_option_function<std::string>(
      "--censored-units",
      [&spec](const std::string& s) {
        spec.censored_units = parse_int_list(s);
      },
      "Unit indices censored in the observation record, comma separated");
  cmd->add_option("--censor-threshold", spec.censor_threshold,
                  "Censor units with simulated treatment count below this");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial factor model engine for bivariate areal counts"};
  app.require_subcommand(1);
  // Config keys live in a section named after the subcommand, e.g. [fit].
  // Command-line flags override config values; unknown keys are an error.
  app.set_config("--config", "", "Key-value config file (flags override)");
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);

  // fit
  FitOptions fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit the model to CSV inputs");
  fit_cmd->add_option("--adjacency", fit.adjacency, "Edge list CSV")
      ->required();
  fit_cmd->add_option("--data", fit.data, "Counts CSV")->required();
  fit_cmd->add_option("--covariates", fit.covariates, "Covariate CSV")
      ->required();
  fit_cmd->add_option("--out", fit.out, "Output directory")->required();
  fit_cmd->add_option("--iterations", fit.sampler.iterations, "MCMC sweeps");
  fit_cmd->add_option("--burn-in", fit.sampler.burn_in, "Burn-in sweeps");
  fit_cmd->add_option("--thin", fit.sampler.thin, "Thinning interval");
  fit_cmd->add_option("--seed", fit.sampler.seed, "Master RNG seed");
  fit_cmd->add_option("--chains", fit.chains, "Chains to run");
  fit_cmd->add_option("--threads", fit.threads, "Worker threads (0 = auto)");
  fit_cmd->add_option("--adapt-target", fit.sampler.adapt_target,
                      "Target acceptance rate");
  fit_cmd->add_option("--adapt-batch", fit.sampler.adapt_batch,
                      "Proposals per adaptation batch");
  fit_cmd->add_option("--level", fit.level, "Credible interval level");
  fit_cmd->add_option("--kernels", fit.kernels_lane,
                      "Kernel lane: auto|scalar|avx2");

  // simulate
  SimulationSpec sim_spec;
  std::string sim_out;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Generate a synthetic dataset");
  add_spec_options(sim_cmd, sim_spec);
  sim_cmd->add_option("--seed", sim_spec.seed, "Master RNG seed");
  sim_cmd->add_option("--out", sim_out, "Output directory")->required();

  // check
  CLI::App* check_cmd =
      app.add_subcommand("check", "Run a correctness harness");
  std::string check_kind;
  check_cmd->add_option("kind", check_kind, "geweke or recovery")->required();
  SimulationSpec check_spec;
  check_spec.lattice_rows = 2;
  check_spec.lattice_cols = 3;
  check_spec.beta = {0.3};
  check_spec.censored_units = {1};
  check_spec.pop_min = 1000;  // light counts mix fast in the check fixture
  check_spec.pop_max = 4000;
  add_spec_options(check_cmd, check_spec);
  GewekeConfig geweke_cfg;
  double z_threshold = 4.0;
  check_cmd->add_option("--seed", geweke_cfg.seed, "Master RNG seed");
  check_cmd->add_option("--forward-samples", geweke_cfg.forward_samples,
                        "Marginal-simulator draws");
  check_cmd->add_option("--chain-samples", geweke_cfg.chain_samples,
                        "Kernel-simulator draws");
  check_cmd->add_option("--kernel-steps", geweke_cfg.kernel_steps,
                        "Kernel applications per draw (0 = self-check)");
  check_cmd->add_option("--tune-iterations", geweke_cfg.tune_iterations,
                        "Pre-run tuning sweeps");
  check_cmd->add_option("--min-ess", geweke_cfg.min_ess,
                        "Required effective samples per statistic");
  check_cmd->add_option("--z-threshold", z_threshold, "Battery |z| bound");
  check_cmd->add_flag("--mutate-variance-shape",
                      geweke_cfg.mutate_variance_shape,
                      "Sabotage the variance update (battery must fail)");
  check_cmd->add_option("--prior-a0", geweke_cfg.priors.variance_a0,
                        "Proper variance prior shape");
  check_cmd->add_option("--prior-b0", geweke_cfg.priors.variance_b0,
                        "Proper variance prior scale");
  check_cmd->add_option("--prior-intercept-variance",
                        geweke_cfg.priors.intercept_variance,
                        "Proper intercept prior variance");
  RecoveryConfig recovery_cfg;
  recovery_cfg.fit.iterations = 9000;
  recovery_cfg.fit.burn_in = 4000;
  recovery_cfg.fit.thin = 5;
  int min_cover = 15, min_sign = 18;
  check_cmd->add_option("--replicates", recovery_cfg.replicates,
                        "Recovery replicates");
  check_cmd->add_option("--threads", recovery_cfg.threads,
                        "Parallel replicates");
  check_cmd->add_option("--fit-iterations", recovery_cfg.fit.iterations,
                        "Per-replicate sweeps");
  check_cmd->add_option("--fit-burn-in", recovery_cfg.fit.burn_in,
                        "Per-replicate burn-in");
  check_cmd->add_option("--fit-thin", recovery_cfg.fit.thin,
                        "Per-replicate thinning");
  check_cmd->add_option("--min-cover", min_cover,
                        "Required covered replicates per coefficient");
  check_cmd->add_option("--min-sign", min_sign,
                        "Required sign recoveries per coefficient");
  std::string check_out;
  check_cmd->add_option("--out", check_out, "Report directory (optional)");
  std::string check_kernels = "auto";
  check_cmd->add_option("--kernels", check_kernels,
                        "Kernel lane: auto|scalar|avx2");

  // summarize
  std::vector<std::string> chain_paths;
  double level = 0.95;
  std::string summarize_out = ".";
  CLI::App* sum_cmd =
      app.add_subcommand("summarize", "Summarize saved chain files");
  sum_cmd->add_option("--chain", chain_paths, "Chain CSV (repeatable)")
      ->required();
  sum_cmd->add_option("--level", level, "Credible interval level");
  sum_cmd->add_option("--out", summarize_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit);
    if (sim_cmd->parsed()) return cmd_simulate(sim_spec, sim_out);
    if (check_cmd->parsed()) {
      apply_kernel_lane(check_kernels);
      if (check_kind == "geweke") {
        return cmd_check_geweke(check_spec, geweke_cfg, z_threshold,
                                check_out);
      }
      if (check_kind == "recovery") {
        // Default design for recovery differs from the geweke fixture.
        if (!check_cmd->count("--lattice-rows")) {
          check_spec.lattice_rows = 10;
          check_spec.lattice_cols = 10;
        }
        if (!check_cmd->count("--beta")) check_spec.beta = {0.3, -0.1};
        if (!check_cmd->count("--censored-units")) {
          check_spec.censored_units.clear();
        }
        recovery_cfg.seed = geweke_cfg.seed;
        return cmd_check_recovery(check_spec, recovery_cfg, min_cover,
                                  min_sign, check_out);
      }
      throw ValidationError("unknown check kind: " + check_kind +
                            " (expected geweke or recovery)");
    }
    if (sum_cmd->parsed()) {
      return cmd_summarize(chain_paths, level, summarize_out);
    }
    throw ValidationError("no subcommand given");
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
