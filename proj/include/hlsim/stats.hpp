// Copyright 2026 The hlsim Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Paired-comparison statistics: Thurstone Case V scaling, across-listener
// confidence intervals and Tukey HSD flags.

#ifndef HLSIM_STATS_HPP_
#define HLSIM_STATS_HPP_

#include <boost/math/distributions/students_t.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hlsim/common.hpp"

namespace hlsim {

inline double NormalCdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Standard normal quantile. Acklam's rational approximation (relative error
// about 1e-9) followed by one Halley step against erfc.
inline double InverseNormal(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("inverse normal needs 0 < p < 1");
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double kLow = 0.02425;
  double x;
  if (p < kLow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - kLow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = NormalCdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

inline double StudentTQuantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0) || !(df > 0.0)) {
    throw std::domain_error("t quantile needs 0 < p < 1 and df > 0");
  }
  return boost::math::quantile(boost::math::students_t_distribution<double>(df),
                               p);
}

// counts[i][j]: times condition i was judged MORE distorted than j in a trial
// pairing the two (either presentation order); totals[i][j]: such trials.
struct PreferenceMatrix {
  std::vector<std::string> conditions;
  std::vector<std::vector<long>> counts;
  std::vector<std::vector<long>> totals;

  explicit PreferenceMatrix(std::vector<std::string> labels = {})
      : conditions(std::move(labels)),
        counts(conditions.size(), std::vector<long>(conditions.size(), 0)),
        totals(conditions.size(), std::vector<long>(conditions.size(), 0)) {}

  std::size_t size() const { return conditions.size(); }

  std::size_t IndexOf(const std::string& label) const {
    for (std::size_t i = 0; i < conditions.size(); ++i) {
      if (conditions[i] == label) return i;
    }
    throw ConfigError("unknown condition '" + label + "'");
  }

  // `more_distorted` won a trial against `other`.
  void Add(std::size_t more_distorted, std::size_t other) {
    counts[more_distorted][other] += 1;
    totals[more_distorted][other] += 1;
    totals[other][more_distorted] += 1;
  }
};

// Case V scores oriented so that higher = less perceived distortion.
// p[i][j] = P(i judged less distorted than j), clipped to [e, 1 - e] with
// e = 1 / (2 totals); score_i = mean_j z(p[i][j]) with z(p[i][i]) = 0; scores
// are then shifted to sum to zero.
inline std::vector<double> ThurstoneScores(const PreferenceMatrix& m) {
  const std::size_t k = m.size();
  if (k == 0) throw ConfigError("empty preference matrix");
  std::vector<double> scores(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const long n = m.totals[i][j];
      if (n <= 0) {
        throw ConfigError("no trials pairing '" + m.conditions[i] + "' and '" +
                          m.conditions[j] + "'");
      }
      const double eps = 1.0 / (2.0 * static_cast<double>(n));
      const double p = std::clamp(
          static_cast<double>(m.counts[j][i]) / static_cast<double>(n), eps,
          1.0 - eps);
      sum += InverseNormal(p);
    }
    scores[i] = sum / static_cast<double>(k);
  }
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(k);
  for (double& s : scores) s -= mean;
  return scores;
}

// scores[listener][condition].
struct ScoreTable {
  std::vector<std::string> conditions;
  std::vector<std::string> listeners;
  std::vector<std::vector<double>> scores;
};

struct ScoreResult {
  std::vector<std::string> conditions;
  std::vector<double> mean;
  std::vector<double> ci_half_width;
  double level = 0.99;
  std::size_t listeners = 0;
};

inline ScoreResult MeanCi(const ScoreTable& table, double level = 0.99) {
  const std::size_t n = table.scores.size();
  if (n < 2) throw ConfigError("confidence intervals need >= 2 listeners");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must be in (0, 1)");
  const std::size_t k = table.conditions.size();
  ScoreResult out;
  out.conditions = table.conditions;
  out.level = level;
  out.listeners = n;
  out.mean.assign(k, 0.0);
  out.ci_half_width.assign(k, 0.0);
  const double t = StudentTQuantile(0.5 + level / 2.0, static_cast<double>(n - 1));
  for (std::size_t c = 0; c < k; ++c) {
    double mean = 0.0;
    for (const auto& row : table.scores) mean += row.at(c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& row : table.scores) ss += (row[c] - mean) * (row[c] - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    out.mean[c] = mean;
    out.ci_half_width[c] = t * sd / std::sqrt(static_cast<double>(n));
  }
  return out;
}

struct HsdPair {
  std::size_t i = 0;
  std::size_t j = 0;
  double mean_diff = 0.0;  // mean_i - mean_j
  double q = 0.0;          // studentized range statistic
  bool significant = false;
};

struct HsdResult {
  double ms_error = 0.0;
  std::size_t df_error = 0;
  std::vector<HsdPair> pairs;
};

// Repeated-measures (condition x listener) Tukey HSD. MS_error is the
// interaction mean square; a pair is flagged when its means differ and
// |mean_i - mean_j| / sqrt(MS_error / n) >= q_crit.
inline HsdResult TukeyHsd(const ScoreTable& table, double q_crit) {
  const std::size_t n = table.scores.size();
  const std::size_t k = table.conditions.size();
  if (n < 2 || k < 2) throw ConfigError("HSD needs >= 2 listeners and conditions");
  if (!(q_crit >= 0.0)) throw ConfigError("q_crit must be >= 0");
  std::vector<double> cond_mean(k, 0.0), listener_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t c = 0; c < k; ++c) {
      const double v = table.scores[l].at(c);
      cond_mean[c] += v / static_cast<double>(n);
      listener_mean[l] += v / static_cast<double>(k);
      grand += v / static_cast<double>(n * k);
    }
  }
  double ss = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t c = 0; c < k; ++c) {
      const double r = table.scores[l][c] - listener_mean[l] - cond_mean[c] + grand;
      ss += r * r;
    }
  }
  HsdResult out;
  out.df_error = (k - 1) * (n - 1);
  out.ms_error = ss / static_cast<double>(out.df_error);
  const double se = std::sqrt(out.ms_error / static_cast<double>(n));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      HsdPair pair;
      pair.i = i;
      pair.j = j;
      pair.mean_diff = cond_mean[i] - cond_mean[j];
      const double diff = std::abs(pair.mean_diff);
      if (diff == 0.0) {
        pair.q = 0.0;
      } else {
        pair.q = se > 0.0 ? diff / se : kInf;
      }
      pair.significant = diff > 0.0 && pair.q >= q_crit;
      out.pairs.push_back(pair);
    }
  }
  return out;
}

}  // namespace hlsim

#endif  // HLSIM_STATS_HPP_
