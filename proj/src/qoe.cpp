#include "semabr/qoe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "semabr/error.hpp"

namespace semabr {

void QoEWeights::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0))
    throw ValidationError("QoE weights must be >= 0");
}

QoEBreakdown& QoEBreakdown::operator+=(const QoEBreakdown& o) {
  utility += o.utility;
  smoothness += o.smoothness;
  rebuffer += o.rebuffer;
  total += o.total;
  return *this;
}

double utility(int kbps, const BitrateLadder& ladder) {
  if (!ladder.index_of(kbps))
    throw ValidationError("bitrate " + std::to_string(kbps) + " kbps not in ladder");
  return std::log(static_cast<double>(kbps) / ladder.min_kbps());
}

QoEBreakdown chunk_qoe(int a_kbps, std::optional<int> a_prev_kbps,
                       double download_s, std::optional<double> b_prev_s,
                       const QoEWeights& weights, const BitrateLadder& ladder,
                       double quality_scale) {
  weights.validate();
  if (!(download_s >= 0.0)) throw ValidationError("download time must be >= 0");
  if (b_prev_s && !(*b_prev_s >= 0.0)) throw ValidationError("buffer must be >= 0");
  if (!(quality_scale >= 0.0 && quality_scale <= 1.0))
    throw ValidationError("quality_scale must be in [0, 1]");
  const double m = utility(a_kbps, ladder);
  const double m_prev = utility(a_prev_kbps.value_or(a_kbps), ladder);
  QoEBreakdown q;
  q.utility = quality_scale * m;
  q.smoothness = weights.alpha * std::abs(m - m_prev);
  q.rebuffer = b_prev_s ? weights.beta * std::max(0.0, download_s - *b_prev_s) : 0.0;
  q.total = q.utility - q.smoothness - q.rebuffer;
  return q;
}

std::vector<CdfPoint> cdf(std::vector<double> values) {
  if (values.empty()) throw ValidationError("cdf of an empty list");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  std::vector<CdfPoint> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double frac = static_cast<double>(i + 1) / n;
    if (!out.empty() && out.back().value == values[i])
      out.back().fraction = frac;
    else
      out.push_back({values[i], frac});
  }
  return out;
}

}  // namespace semabr
