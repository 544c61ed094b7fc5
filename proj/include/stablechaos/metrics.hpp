/*
 * Copyright 2026 The stablechaos Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef STABLECHAOS_METRICS_HPP
#define STABLECHAOS_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "stablechaos/error.hpp"

namespace stablechaos {

/// Sorted copy of a sample; stands in for an empirical measure.
class EmpiricalSample {
 public:
  explicit EmpiricalSample(std::vector<double> values) : values_(std::move(values)) {
    require(!values_.empty(), ErrorCode::EmptySample, "empirical sample must be nonempty");
    std::sort(values_.begin(), values_.end());
  }
  explicit EmpiricalSample(std::span<const double> values)
      : EmpiricalSample(std::vector<double>(values.begin(), values.end())) {}

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Left-continuous quantile at level u in (0, 1).
  double quantile(double u) const {
    const auto n = static_cast<double>(values_.size());
    auto idx = static_cast<std::size_t>(std::ceil(u * n));
    idx = std::clamp<std::size_t>(idx, 1, values_.size());
    return values_[idx - 1];
  }

 private:
  std::vector<double> values_;
};

/// d_q(x, y) = |x - y| ∧ |x - y|^q.
inline double dq_distance(double x, double y, double q) {
  const double gap = std::fabs(x - y);
  return std::min(gap, std::pow(gap, q));
}

namespace detail {

constexpr std::size_t kQuantileGridCap = 100000;

// Applies cost to the monotone coupling of two sorted samples and returns the
// mean cost. Unequal sizes are compared on the common quantile grid of size
// lcm(n, m) (capped), which is exact whenever the lcm fits under the cap.
template <class Cost>
double monotone_mean_cost(const EmpiricalSample& xs, const EmpiricalSample& ys, Cost cost) {
  if (xs.size() == ys.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) acc += cost(xs[i], ys[i]);
    return acc / static_cast<double>(xs.size());
  }
  const std::size_t l = std::lcm(xs.size(), ys.size());
  const std::size_t grid = std::min(l, kQuantileGridCap);
  double acc = 0.0;
  for (std::size_t k = 0; k < grid; ++k) {
    const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(grid);
    acc += cost(xs.quantile(u), ys.quantile(u));
  }
  return acc / static_cast<double>(grid);
}

}  // namespace detail

/// W_1 between two empirical measures, computed exactly as the integral of
/// |F_x - F_y| for any sample sizes.
inline double w1_empirical(const EmpiricalSample& xs, const EmpiricalSample& ys) {
  const auto a = xs.values();
  const auto b = ys.values();
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double prev = std::min(a[0], b[0]);
  double acc = 0.0;
  while (i < a.size() || j < b.size()) {
    double next;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) {
      next = a[i];
    } else {
      next = b[j];
    }
    const double fa = static_cast<double>(i) / na;
    const double fb = static_cast<double>(j) / nb;
    acc += std::fabs(fa - fb) * (next - prev);
    prev = next;
    while (i < a.size() && a[i] == next) ++i;
    while (j < b.size() && b[j] == next) ++j;
  }
  return acc;
}

/// Wasserstein distance of order p under the monotone coupling. For p >= 1
/// this is exact in one dimension; for p < 1 the value is mean |x - y|^p under
/// that coupling, an upper bound on W_p.
inline double wp_empirical(const EmpiricalSample& xs, const EmpiricalSample& ys, double p) {
  require(p > 0.0, ErrorCode::RangeError, "order p must be positive");
  if (p == 1.0) return w1_empirical(xs, ys);
  const double m =
      detail::monotone_mean_cost(xs, ys, [p](double x, double y) { return std::pow(std::fabs(x - y), p); });
  return p >= 1.0 ? std::pow(m, 1.0 / p) : m;
}

inline double wp_empirical(std::span<const double> xs, std::span<const double> ys, double p) {
  return wp_empirical(EmpiricalSample(xs), EmpiricalSample(ys), p);
}

/// Mean d_q cost of the monotone coupling: an upper bound on W_{d_q}.
inline double wdq_upper(const EmpiricalSample& xs, const EmpiricalSample& ys, double q) {
  require(q > 0.0 && q <= 1.0, ErrorCode::RangeError, "q must lie in (0, 1]");
  return detail::monotone_mean_cost(xs, ys, [q](double x, double y) { return dq_distance(x, y, q); });
}

inline double wdq_upper(std::span<const double> xs, std::span<const double> ys, double q) {
  return wdq_upper(EmpiricalSample(xs), EmpiricalSample(ys), q);
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_x - F_y|.
inline double ks_two_sample(const EmpiricalSample& xs, const EmpiricalSample& ys) {
  const auto a = xs.values();
  const auto b = ys.values();
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / static_cast<double>(a.size()) -
                              static_cast<double>(j) / static_cast<double>(b.size())));
  }
  return d;
}

inline double ks_two_sample(std::span<const double> xs, std::span<const double> ys) {
  return ks_two_sample(EmpiricalSample(xs), EmpiricalSample(ys));
}

/// One-sample KS statistic against a continuous distribution function.
inline double ks_one_sample(const EmpiricalSample& xs, const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Asymptotic Kolmogorov p-value for statistic d at effective size n
/// (n m / (n + m) for two samples), with the Stephens small-sample correction.
inline double ks_pvalue(double d, double effective_n) {
  const double sn = std::sqrt(effective_n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline double chi_square_pvalue(double statistic, double dof) {
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

namespace detail {

inline std::vector<double> quantile_cuts(std::span<const double> v, int bins) {
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  for (int b = 1; b < bins; ++b) {
    const auto idx = static_cast<std::size_t>(static_cast<double>(b) / bins * static_cast<double>(sorted.size()));
    cuts.push_back(sorted[std::min(idx, sorted.size() - 1)]);
  }
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

inline std::size_t bin_of(double x, const std::vector<double>& cuts) {
  return static_cast<std::size_t>(std::lower_bound(cuts.begin(), cuts.end(), x) - cuts.begin());
}

}  // namespace detail

/// Pearson chi-square test of independence on a bins x bins contingency table
/// built from the marginal empirical quantiles. Ties in a discrete marginal
/// merge cut points, shrinking that margin.
inline ChiSquareResult chi_square_independence(std::span<const double> xs, std::span<const double> ys,
                                               int bins = 4) {
  require(xs.size() == ys.size() && !xs.empty(), ErrorCode::EmptySample,
          "independence test needs paired, nonempty samples");
  const auto cx = detail::quantile_cuts(xs, bins);
  const auto cy = detail::quantile_cuts(ys, bins);
  const std::size_t rows = cx.size() + 1;
  const std::size_t cols = cy.size() + 1;
  std::vector<double> table(rows * cols, 0.0);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    table[detail::bin_of(xs[k], cx) * cols + detail::bin_of(ys[k], cy)] += 1.0;
  }
  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      row_sum[r] += table[r * cols + c];
      col_sum[c] += table[r * cols + c];
    }
  }
  const auto n = static_cast<double>(xs.size());
  ChiSquareResult out;
  std::size_t live_rows = 0, live_cols = 0;
  for (double r : row_sum) live_rows += r > 0.0;
  for (double c : col_sum) live_cols += c > 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double expected = row_sum[r] * col_sum[c] / n;
      if (expected > 0.0) {
        const double diff = table[r * cols + c] - expected;
        out.statistic += diff * diff / expected;
      }
    }
  }
  out.dof = static_cast<double>((live_rows - 1) * (live_cols - 1));
  out.p_value = out.dof > 0.0 ? chi_square_pvalue(out.statistic, out.dof) : 1.0;
  return out;
}

/// Chi-square goodness of fit of integer counts to Poisson(mean). Cells are
/// merged from the tails inward until every expected count is at least 5.
inline ChiSquareResult poisson_goodness_of_fit(std::span<const std::size_t> counts, double mean) {
  require(!counts.empty(), ErrorCode::EmptySample, "no counts supplied");
  const auto n = static_cast<double>(counts.size());
  const std::size_t kmax = *std::max_element(counts.begin(), counts.end());
  const std::size_t top = std::max<std::size_t>(kmax, static_cast<std::size_t>(mean + 10.0 * std::sqrt(mean) + 10));
  std::vector<double> observed(top + 1, 0.0), expected(top + 1, 0.0);
  for (auto c : counts) observed[c] += 1.0;
  double cumulative = 0.0;
  for (std::size_t k = 0; k <= top; ++k) {
    const double kd = static_cast<double>(k);
    const double pk = std::exp(-mean + kd * std::log(mean) - std::lgamma(kd + 1.0));
    expected[k] = n * pk;
    cumulative += pk;
  }
  expected[top] += n * std::max(0.0, 1.0 - cumulative);

  std::vector<std::pair<double, double>> cells;
  double obs_acc = 0.0, exp_acc = 0.0;
  for (std::size_t k = 0; k <= top; ++k) {
    obs_acc += observed[k];
    exp_acc += expected[k];
    if (exp_acc >= 5.0) {
      cells.emplace_back(obs_acc, exp_acc);
      obs_acc = exp_acc = 0.0;
    }
  }
  if (!cells.empty()) {
    cells.back().first += obs_acc;
    cells.back().second += exp_acc;
  }
  ChiSquareResult out;
  for (const auto& [o, e] : cells) out.statistic += (o - e) * (o - e) / e;
  out.dof = static_cast<double>(cells.size()) - 1.0;
  out.p_value = out.dof > 0.0 ? chi_square_pvalue(out.statistic, out.dof) : 1.0;
  return out;
}

struct SlopeFit {
  double slope = 0.0;
  double standard_error = 0.0;
  double intercept = 0.0;
};

/// Least-squares slope of log y against log x.
inline SlopeFit loglog_slope(std::span<const std::pair<double, double>> points) {
  require(points.size() >= 3, ErrorCode::DegenerateDesign, "slope fit needs at least 3 points");
  std::vector<double> lx, ly;
  for (const auto& [x, y] : points) {
    require(x > 0.0 && y > 0.0, ErrorCode::DegenerateDesign, "log-log fit needs positive data");
    lx.push_back(std::log(x));
    ly.push_back(std::log(y));
  }
  const auto n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  require(sxx > 0.0, ErrorCode::DegenerateDesign, "x values must be distinct");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    ssr += r * r;
  }
  fit.standard_error = std::sqrt(ssr / (n - 2.0) / sxx);
  return fit;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_and_se(std::span<const double> v) {
  if (v.empty()) return {};
  const auto n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

namespace detail {

inline std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxx > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

}  // namespace detail

/// Spearman rank correlation (average ranks for ties).
inline double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = detail::ranks(x);
  const auto ry = detail::ranks(y);
  return detail::pearson(rx, ry);
}

}  // namespace stablechaos

#endif  // STABLECHAOS_METRICS_HPP
