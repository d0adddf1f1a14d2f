#include "spfactor/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spfactor/errors.hpp"
#include "spfactor/kernels.hpp"

namespace spfactor {
namespace {

double mean_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

void recenter(std::vector<double>& v, double target) {
  const double shift = mean_of(v) - target;
  for (double& x : v) x -= shift;
}

AcceptanceReport::Block summarize_block(
    const std::string& name, std::int64_t proposals, std::int64_t accepts,
    const std::vector<AdaptiveScale>& scales) {
  AcceptanceReport::Block b;
  b.name = name;
  b.proposals = proposals;
  b.accepts = accepts;
  double mn = std::numeric_limits<double>::infinity(), mx = 0.0, sum = 0.0;
  for (const auto& s : scales) {
    const double st = s.step();
    mn = std::min(mn, st);
    mx = std::max(mx, st);
    sum += st;
  }
  b.step_min = scales.empty() ? 0.0 : mn;
  b.step_max = mx;
  b.step_mean = scales.empty() ? 0.0 : sum / scales.size();
  return b;
}

}  // namespace

void SamplerConfig::validate() const {
  if (iterations <= 0) throw ValidationError("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) {
    throw ValidationError("burn_in must satisfy 0 <= burn_in < iterations");
  }
  if (thin < 1) throw ValidationError("thin must be >= 1");
  if (!(adapt_target > 0.0 && adapt_target < 1.0)) {
    throw ValidationError("adapt_target must lie in (0,1)");
  }
  if (adapt_batch < 1) throw ValidationError("adapt_batch must be >= 1");
  if (!(initial_step_nu > 0.0 && initial_step_alpha > 0.0 &&
        initial_step_eps > 0.0 && initial_step_intercept > 0.0)) {
    throw ValidationError("initial step sizes must be positive");
  }
  if (!(prior.beta_variance > 0.0)) {
    throw ValidationError("beta prior variance must be positive");
  }
}

double AdaptiveScale::step() const { return std::exp(log_step); }

void adapt(AdaptiveScale& scale, bool accepted, double target,
           int batch_size) {
  ++scale.proposal_count;
  if (accepted) ++scale.accept_count;
  if (scale.proposal_count < batch_size) return;
  ++scale.batch_count;
  const double delta =
      std::min(0.05, 1.0 / std::sqrt(static_cast<double>(scale.batch_count)));
  const double rate = static_cast<double>(scale.accept_count) /
                      static_cast<double>(batch_size);
  scale.log_step += rate > target ? delta : -delta;
  scale.accept_count = 0;
  scale.proposal_count = 0;
}

std::string AcceptanceReport::to_text() const {
  std::ostringstream os;
  os << "block,proposals,accepts,accept_rate,step_min,step_mean,step_max\n";
  for (const auto& b : blocks) {
    const double rate =
        b.proposals > 0
            ? static_cast<double>(b.accepts) / static_cast<double>(b.proposals)
            : 0.0;
    os << b.name << ',' << b.proposals << ',' << b.accepts << ',' << rate
       << ',' << b.step_min << ',' << b.step_mean << ',' << b.step_max
       << '\n';
  }
  return os.str();
}

ChainState init_state(const AdjacencyGraph& g, const Dataset& data, Rng& rng) {
  ChainState s;
  const int n = g.n;
  s.nu.resize(n);
  s.alpha_death.resize(n);
  s.eps_death.resize(n);
  s.eps_treatment.resize(n);
  for (int i = 0; i < n; ++i) s.nu[i] = 0.1 * rng.normal();
  for (int i = 0; i < n; ++i) s.alpha_death[i] = 1.0 + 0.1 * rng.normal();
  for (int i = 0; i < n; ++i) s.eps_death[i] = 0.1 * rng.normal();
  for (int i = 0; i < n; ++i) s.eps_treatment[i] = 0.1 * rng.normal();
  recenter(s.nu, 0.0);
  recenter(s.alpha_death, 1.0);
  s.beta.assign(data.p, 0.0);
  return s;
}

SamplerCore::SamplerCore(const SamplerConfig& config,
                         const AdjacencyGraph& graph, const Dataset& data)
    : config_(config), graph_(graph), data_(data) {
  config_.validate();
  if (graph_.n != data_.n) {
    throw ValidationError("graph and dataset disagree on unit count");
  }
  lik_ = build_lik_cache(data_);
  xtqx_ = xtqx(graph_, data_.covariates);
  scale_nu_.assign(graph_.n, {std::log(config_.initial_step_nu)});
  scale_alpha_.assign(graph_.n, {std::log(config_.initial_step_alpha)});
  scale_eps_.assign(graph_.n, {std::log(config_.initial_step_eps)});
  scale_b0_death_ = {std::log(config_.initial_step_intercept)};
  scale_b0_treatment_ = {std::log(config_.initial_step_intercept)};
  const int n = graph_.n;
  cand_.resize(n);
  loglam_d_.resize(n);
  loglam_t_.resize(n);
  loglam_d_cand_.resize(n);
  loglam_t_cand_.resize(n);
  resid_.resize(n);
  xbeta_.resize(n);
  scratch_unc_.resize(lik_.unc_idx.size());
  ones_.assign(n, 1.0);
}

double SamplerCore::death_ll(std::span<const double> loglam) {
  return config_.likelihood_enabled ? death_loglik(lik_, loglam) : 0.0;
}

double SamplerCore::treat_ll(std::span<const double> loglam) {
  return config_.likelihood_enabled
             ? treatment_loglik(lik_, loglam, scratch_unc_)
             : 0.0;
}

void SamplerCore::check_finite(double value, const char* where, int unit) {
  if (std::isfinite(value)) return;
  std::ostringstream os;
  os << "non-finite log density in " << where;
  if (unit >= 0) os << " at unit " << unit;
  os << " (value " << value << ")";
  throw ComputeError(os.str());
}

void SamplerCore::update_nu_sweep(ChainState& state, Rng& rng, bool adapting) {
  const int n = graph_.n;
  const auto xb = factor_mean(data_.covariates, state.beta, n);
  std::copy(xb.begin(), xb.end(), xbeta_.begin());

  for (int j = 0; j < n; ++j) {
    loglam_d_[j] = link_death(state.beta0_death, state.alpha_death[j],
                              state.nu[j], state.eps_death[j]);
    loglam_t_[j] = link_treatment(state.beta0_treatment, state.nu[j],
                                  state.eps_treatment[j]);
  }
  double ll_d = death_ll(loglam_d_);
  double ll_t = treat_ll(loglam_t_);
  for (int j = 0; j < n; ++j) resid_[j] = state.nu[j] - xbeta_[j];
  double qf = residual_quadform(graph_, resid_);
  check_finite(ll_d + ll_t + qf, "nu sweep entry", -1);

  const double inv_n = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    const double delta = scale_nu_[i].step() * rng.normal();
    const double shift = delta * inv_n;
    // candidate factor: propose at site i, then recenter the whole vector
    for (int j = 0; j < n; ++j) cand_[j] = state.nu[j] - shift;
    cand_[i] = state.nu[i] + delta - shift;
    for (int j = 0; j < n; ++j) {
      loglam_d_cand_[j] = link_death(state.beta0_death, state.alpha_death[j],
                                     cand_[j], state.eps_death[j]);
      loglam_t_cand_[j] = link_treatment(state.beta0_treatment, cand_[j],
                                         state.eps_treatment[j]);
    }
    const double ll_d_cand = death_ll(loglam_d_cand_);
    const double ll_t_cand = treat_ll(loglam_t_cand_);
    for (int j = 0; j < n; ++j) resid_[j] = cand_[j] - xbeta_[j];
    const double qf_cand = residual_quadform(graph_, resid_);
    const double logratio = (ll_d_cand + ll_t_cand - ll_d - ll_t) -
                            0.5 * (qf_cand - qf) / state.tau2;
    ++prop_nu_;
    const bool accepted = std::log(rng.uniform()) < logratio;
    if (accepted) {
      ++acc_nu_;
      std::swap(state.nu, cand_);
      std::swap(loglam_d_, loglam_d_cand_);
      std::swap(loglam_t_, loglam_t_cand_);
      ll_d = ll_d_cand;
      ll_t = ll_t_cand;
      qf = qf_cand;
    }
    if (adapting) {
      adapt(scale_nu_[i], accepted, config_.adapt_target, config_.adapt_batch);
    }
  }
  recenter(state.nu, 0.0);
}

void SamplerCore::update_alpha_sweep(ChainState& state, Rng& rng,
                                     bool adapting) {
  const int n = graph_.n;
  for (int j = 0; j < n; ++j) {
    loglam_d_[j] = link_death(state.beta0_death, state.alpha_death[j],
                              state.nu[j], state.eps_death[j]);
  }
  double ll_d = death_ll(loglam_d_);
  for (int j = 0; j < n; ++j) resid_[j] = state.alpha_death[j] - 1.0;
  double qf = residual_quadform(graph_, resid_);
  check_finite(ll_d + qf, "alpha sweep entry", -1);

  const double inv_n = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    const double delta = scale_alpha_[i].step() * rng.normal();
    const double shift = delta * inv_n;
    for (int j = 0; j < n; ++j) cand_[j] = state.alpha_death[j] - shift;
    cand_[i] = state.alpha_death[i] + delta - shift;
    for (int j = 0; j < n; ++j) {
      loglam_d_cand_[j] = link_death(state.beta0_death, cand_[j], state.nu[j],
                                     state.eps_death[j]);
    }
    const double ll_d_cand = death_ll(loglam_d_cand_);
    for (int j = 0; j < n; ++j) resid_[j] = cand_[j] - 1.0;
    const double qf_cand = residual_quadform(graph_, resid_);
    const double logratio =
        (ll_d_cand - ll_d) - 0.5 * (qf_cand - qf) / state.tau2_death;
    ++prop_alpha_;
    const bool accepted = std::log(rng.uniform()) < logratio;
    if (accepted) {
      ++acc_alpha_;
      std::swap(state.alpha_death, cand_);
      std::swap(loglam_d_, loglam_d_cand_);
      ll_d = ll_d_cand;
      qf = qf_cand;
    }
    if (adapting) {
      adapt(scale_alpha_[i], accepted, config_.adapt_target,
            config_.adapt_batch);
    }
  }
  recenter(state.alpha_death, 1.0);
}

void SamplerCore::update_eps_sweep(ChainState& state, Rng& rng,
                                   bool adapting) {
  const int n = graph_.n;
  for (int i = 0; i < n; ++i) {
    const double step = scale_eps_[i].step();
    const double ed_cur = state.eps_death[i];
    const double et_cur = state.eps_treatment[i];
    const double ed_new = ed_cur + step * rng.normal();
    const double et_new = et_cur + step * rng.normal();

    double logratio = -0.5 * (ed_new * ed_new - ed_cur * ed_cur) /
                          state.sigma2_death -
                      0.5 * (et_new * et_new - et_cur * et_cur) /
                          state.sigma2_treatment;
    if (config_.likelihood_enabled) {
      const double lam_d_cur = link_death(state.beta0_death,
                                          state.alpha_death[i], state.nu[i],
                                          ed_cur);
      const double lam_t_cur = link_treatment(state.beta0_treatment,
                                              state.nu[i], et_cur);
      const double lam_d_new = link_death(state.beta0_death,
                                          state.alpha_death[i], state.nu[i],
                                          ed_new);
      const double lam_t_new = link_treatment(state.beta0_treatment,
                                              state.nu[i], et_new);
      logratio += unit_loglik(data_, i, lam_d_new, lam_t_new) -
                  unit_loglik(data_, i, lam_d_cur, lam_t_cur);
    }
    ++prop_eps_;
    const bool accepted = std::log(rng.uniform()) < logratio;
    if (accepted) {
      ++acc_eps_;
      state.eps_death[i] = ed_new;
      state.eps_treatment[i] = et_new;
    }
    if (adapting) {
      adapt(scale_eps_[i], accepted, config_.adapt_target,
            config_.adapt_batch);
    }
  }
}

void SamplerCore::update_intercepts(ChainState& state, Rng& rng,
                                    bool adapting) {
  const int n = graph_.n;
  // death intercept
  {
    const double delta = scale_b0_death_.step() * rng.normal();
    const double b0_new = state.beta0_death + delta;
    double logratio = config_.prior.intercept_log_kernel(b0_new) -
                      config_.prior.intercept_log_kernel(state.beta0_death);
    if (config_.likelihood_enabled) {
      for (int j = 0; j < n; ++j) {
        loglam_d_[j] = link_death(state.beta0_death, state.alpha_death[j],
                                  state.nu[j], state.eps_death[j]);
        loglam_d_cand_[j] = link_death(b0_new, state.alpha_death[j],
                                       state.nu[j], state.eps_death[j]);
      }
      logratio += death_ll(loglam_d_cand_) - death_ll(loglam_d_);
    }
    ++prop_b0d_;
    const bool accepted = std::log(rng.uniform()) < logratio;
    if (accepted) {
      ++acc_b0d_;
      state.beta0_death = b0_new;
    }
    if (adapting) {
      adapt(scale_b0_death_, accepted, config_.adapt_target,
            config_.adapt_batch);
    }
  }
  // treatment intercept
  {
    const double delta = scale_b0_treatment_.step() * rng.normal();
    const double b0_new = state.beta0_treatment + delta;
    double logratio =
        config_.prior.intercept_log_kernel(b0_new) -
        config_.prior.intercept_log_kernel(state.beta0_treatment);
    if (config_.likelihood_enabled) {
      for (int j = 0; j < n; ++j) {
        loglam_t_[j] = link_treatment(state.beta0_treatment, state.nu[j],
                                      state.eps_treatment[j]);
        loglam_t_cand_[j] = link_treatment(b0_new, state.nu[j],
                                           state.eps_treatment[j]);
      }
      logratio += treat_ll(loglam_t_cand_) - treat_ll(loglam_t_);
    }
    ++prop_b0t_;
    const bool accepted = std::log(rng.uniform()) < logratio;
    if (accepted) {
      ++acc_b0t_;
      state.beta0_treatment = b0_new;
    }
    if (adapting) {
      adapt(scale_b0_treatment_, accepted, config_.adapt_target,
            config_.adapt_batch);
    }
  }
}

void SamplerCore::update_beta(ChainState& state, Rng& rng) {
  if (data_.p == 0) return;
  const auto xtq_nu = xtq_vec(graph_, data_.covariates, state.nu);
  state.beta =
      gibbs_beta_cached(xtqx_, xtq_nu, state.tau2, config_.prior, rng);
}

void SamplerCore::update_variances(ChainState& state, Rng& rng) {
  const int n = graph_.n;
  const int icar_dim = config_.icar_rank_kernel ? n - 1 : n;
  const double a0 = config_.prior.variance_a0;
  const double b0 = config_.prior.variance_b0;

  const auto xb = factor_mean(data_.covariates, state.beta, n);
  for (int j = 0; j < n; ++j) resid_[j] = state.nu[j] - xb[j];
  const double qf_nu = residual_quadform(graph_, resid_);
  state.tau2 = gibbs_variance_ex(icar_dim, qf_nu, a0, b0, rng);

  for (int j = 0; j < n; ++j) resid_[j] = state.alpha_death[j] - 1.0;
  const double qf_alpha = residual_quadform(graph_, resid_);
  state.tau2_death = gibbs_variance_ex(icar_dim, qf_alpha, a0, b0, rng);

  const double ss_d = kernels::dot(state.eps_death.data(),
                                   state.eps_death.data(), n);
  state.sigma2_death = gibbs_variance_ex(n, ss_d, a0, b0, rng);

  const double ss_t = kernels::dot(state.eps_treatment.data(),
                                   state.eps_treatment.data(), n);
  state.sigma2_treatment = gibbs_variance_ex(n, ss_t, a0, b0, rng);
}

void SamplerCore::iterate(ChainState& state, Rng& rng, bool adapting) {
  if (config_.update_nu) update_nu_sweep(state, rng, adapting);
  if (config_.update_alpha) update_alpha_sweep(state, rng, adapting);
  if (config_.update_eps) update_eps_sweep(state, rng, adapting);
  if (config_.update_intercepts) update_intercepts(state, rng, adapting);
  if (config_.update_beta) update_beta(state, rng);
  if (config_.update_variances) update_variances(state, rng);
}

AcceptanceReport SamplerCore::report() const {
  AcceptanceReport r;
  r.blocks.push_back(summarize_block("nu", prop_nu_, acc_nu_, scale_nu_));
  r.blocks.push_back(
      summarize_block("alpha_death", prop_alpha_, acc_alpha_, scale_alpha_));
  r.blocks.push_back(summarize_block("eps", prop_eps_, acc_eps_, scale_eps_));
  r.blocks.push_back(summarize_block("beta0_death", prop_b0d_, acc_b0d_,
                                     {scale_b0_death_}));
  r.blocks.push_back(summarize_block("beta0_treatment", prop_b0t_, acc_b0t_,
                                     {scale_b0_treatment_}));
  return r;
}

std::vector<double> SamplerCore::nu_steps() const {
  std::vector<double> out(scale_nu_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale_nu_[i].step();
  return out;
}

void SamplerCore::refresh_likelihood_cache() {
  lik_ = build_lik_cache(data_);
  scratch_unc_.resize(lik_.unc_idx.size());
}

void SamplerCore::set_all_steps(double nu, double alpha, double eps,
                                double intercept) {
  for (auto& s : scale_nu_) s = {std::log(nu)};
  for (auto& s : scale_alpha_) s = {std::log(alpha)};
  for (auto& s : scale_eps_) s = {std::log(eps)};
  scale_b0_death_ = {std::log(intercept)};
  scale_b0_treatment_ = {std::log(intercept)};
}

RunResult run_chain(const SamplerConfig& config, const AdjacencyGraph& graph,
                    const Dataset& data, std::uint64_t chain_id) {
  config.validate();
  data.validate();
  SamplerCore core(config, graph, data);
  Rng rng = Rng::for_stream(config.seed, chain_id);
  ChainState state = init_state(graph, data, rng);

  RunResult out;
  out.n = graph.n;
  out.p = data.p;
  out.param_names = ChainState::flat_names(graph.n, data.covariate_names);

  std::vector<double> flat;
  for (std::int64_t t = 0; t < config.iterations; ++t) {
    const bool adapting = config.adapt_enabled && t < config.burn_in;
    try {
      core.iterate(state, rng, adapting);
    } catch (const ComputeError& e) {
      std::ostringstream os;
      os << e.what() << " at iteration " << t << "; state dump:";
      os << " beta0_death=" << state.beta0_death
         << " beta0_treatment=" << state.beta0_treatment << " tau2="
         << state.tau2 << " tau2_death=" << state.tau2_death
         << " sigma2_death=" << state.sigma2_death << " sigma2_treatment="
         << state.sigma2_treatment;
      const auto range = [&os](const char* name,
                               const std::vector<double>& v) {
        const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
        os << ' ' << name << "=[" << *mn << ',' << *mx << ']';
      };
      range("nu", state.nu);
      range("alpha_death", state.alpha_death);
      range("eps_death", state.eps_death);
      range("eps_treatment", state.eps_treatment);
      throw ComputeError(os.str());
    }
    if (t >= config.burn_in && (t - config.burn_in) % config.thin == 0) {
      state.flatten(flat);
      out.draws.push_back(flat);
      out.saved_iterations.push_back(t);
    }
  }
  out.report = core.report();
  return out;
}

}  // namespace spfactor
