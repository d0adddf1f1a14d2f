#include "spfactor/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spfactor/chain_state.hpp"
#include "spfactor/errors.hpp"
#include "spfactor/likelihood.hpp"

namespace spfactor {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double kahan_mean(std::span<const double> x) {
  double sum = 0.0, comp = 0.0;
  for (double v : x) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum / static_cast<double>(x.size());
}

double autocov(std::span<const double> x, double mean, std::size_t lag) {
  double acc = 0.0;
  for (std::size_t t = 0; t + lag < x.size(); ++t) {
    acc += (x[t] - mean) * (x[t + lag] - mean);
  }
  return acc / static_cast<double>(x.size());
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of empty series");
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("quantile level not in [0,1]");
  const std::size_t n = sorted.size();
  const double h = q * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, q);
}

double ess(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) return kNaN;
  const double mean = kahan_mean(x);
  const double g0 = autocov(x, mean, 0);
  if (!(g0 > 0.0)) return kNaN;  // constant series: degenerate
  // Geyer: sigma2 = -g0 + 2 * sum of consecutive-pair sums while positive.
  double sigma2 = -g0;
  for (std::size_t m = 0;; ++m) {
    const std::size_t k = 2 * m;
    if (k + 1 >= n) break;
    const double pair = autocov(x, mean, k) + autocov(x, mean, k + 1);
    if (pair <= 0.0) break;
    sigma2 += 2.0 * pair;
  }
  if (!(sigma2 > 0.0)) return kNaN;
  const double out = static_cast<double>(n) * g0 / sigma2;
  return std::min(out, static_cast<double>(n));
}

double split_rhat(const std::vector<std::span<const double>>& chains) {
  if (chains.size() < 2) return kNaN;
  std::vector<std::span<const double>> halves;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    if (half < 2) return kNaN;
    halves.push_back(c.subspan(0, half));
    halves.push_back(c.subspan(c.size() - half, half));
  }
  const std::size_t m = halves.size();
  const std::size_t len = halves[0].size();
  for (const auto& h : halves) {
    if (h.size() != len) return kNaN;  // unequal chains: not comparable
  }
  std::vector<double> means(m);
  double w = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = kahan_mean(halves[j]);
    double ss = 0.0;
    for (double v : halves[j]) ss += (v - means[j]) * (v - means[j]);
    w += ss / static_cast<double>(len - 1);
  }
  w /= static_cast<double>(m);
  const double grand = kahan_mean(means);
  double b = 0.0;
  for (double mj : means) b += (mj - grand) * (mj - grand);
  b *= static_cast<double>(len) / static_cast<double>(m - 1);
  if (!(w > 0.0)) return kNaN;
  const double var_plus = (static_cast<double>(len - 1) / len) * w + b / len;
  return std::sqrt(var_plus / w);
}

double rescale_loading(double alpha_death) {
  const double denom = alpha_death + 1.0;
  if (denom == 0.0) return kNaN;
  return alpha_death / denom - 0.5;
}

std::vector<double> rescale_loadings(std::span<const double> alpha_death) {
  std::vector<double> out(alpha_death.size());
  for (std::size_t i = 0; i < alpha_death.size(); ++i) {
    out[i] = rescale_loading(alpha_death[i]);
  }
  return out;
}

PosteriorSummary summarize(
    const std::vector<std::string>& names,
    const std::vector<const std::vector<std::vector<double>>*>& chains,
    double level) {
  if (chains.empty()) throw ValidationError("summarize: no chains");
  std::size_t total = 0;
  for (const auto* c : chains) {
    if (c->empty()) throw ValidationError("summarize: empty chain");
    if ((*c)[0].size() != names.size()) {
      throw ValidationError("summarize: record width does not match names");
    }
    total += c->size();
  }
  if (total < 10) throw ValidationError("summarize: need at least 10 draws");

  PosteriorSummary out;
  out.level = level;
  const double q_lo = (1.0 - level) / 2.0;
  const double q_hi = 1.0 - q_lo;

  std::vector<double> pooled(total);
  for (std::size_t j = 0; j < names.size(); ++j) {
    std::size_t at = 0;
    for (const auto* c : chains) {
      for (const auto& row : *c) pooled[at++] = row[j];
    }
    SummaryRow row;
    row.name = names[j];
    row.mean = kahan_mean(pooled);

    double ess_total = 0.0;
    bool ess_ok = true;
    std::vector<std::vector<double>> per_chain;
    per_chain.reserve(chains.size());
    for (const auto* c : chains) {
      std::vector<double> series(c->size());
      for (std::size_t t = 0; t < c->size(); ++t) series[t] = (*c)[t][j];
      const double e = ess(series);
      if (std::isnan(e)) ess_ok = false;
      ess_total += e;
      per_chain.push_back(std::move(series));
    }
    row.ess = ess_ok ? std::min(ess_total, static_cast<double>(total)) : kNaN;

    std::vector<std::span<const double>> spans;
    spans.reserve(per_chain.size());
    for (const auto& s : per_chain) spans.emplace_back(s);
    row.rhat = split_rhat(spans);

    std::sort(pooled.begin(), pooled.end());
    row.q_lo = quantile_sorted(pooled, q_lo);
    row.q_hi = quantile_sorted(pooled, q_hi);
    out.rows.push_back(std::move(row));
  }
  return out;
}

PerUnitSeries per_unit_rates(const std::vector<std::vector<double>>& draws,
                             int n, int p) {
  PerUnitSeries s;
  s.n = n;
  s.log_smr.reserve(draws.size());
  s.log_trr.reserve(draws.size());
  s.loading.reserve(draws.size());
  s.nu.reserve(draws.size());
  LinkState link;
  for (const auto& flat : draws) {
    const ChainState st = ChainState::unflatten(flat, n, p);
    link_from_state(st, link);
    s.log_smr.push_back(link.log_lambda_death);
    s.log_trr.push_back(link.log_lambda_treatment);
    s.loading.push_back(rescale_loadings(st.alpha_death));
    s.nu.push_back(st.nu);
  }
  return s;
}

std::vector<PerUnitRow> summarize_per_unit(const PerUnitSeries& series,
                                           double level) {
  const double q_lo = (1.0 - level) / 2.0;
  const double q_hi = 1.0 - q_lo;
  const std::size_t ndraws = series.log_smr.size();
  if (ndraws == 0) throw ValidationError("summarize_per_unit: no draws");
  std::vector<PerUnitRow> rows(series.n);
  std::vector<double> buf(ndraws);
  const auto fill = [&](const std::vector<std::vector<double>>& mat, int unit,
                        double& mean, double& lo, double& hi) {
    for (std::size_t t = 0; t < ndraws; ++t) buf[t] = mat[t][unit];
    mean = kahan_mean(buf);
    std::sort(buf.begin(), buf.end());
    lo = quantile_sorted(buf, q_lo);
    hi = quantile_sorted(buf, q_hi);
  };
  for (int i = 0; i < series.n; ++i) {
    auto& r = rows[i];
    r.unit = i;
    fill(series.log_smr, i, r.log_smr_mean, r.log_smr_lo, r.log_smr_hi);
    fill(series.log_trr, i, r.log_trr_mean, r.log_trr_lo, r.log_trr_hi);
    fill(series.loading, i, r.loading_mean, r.loading_lo, r.loading_hi);
    fill(series.nu, i, r.nu_mean, r.nu_lo, r.nu_hi);
  }
  return rows;
}

}  // namespace spfactor
