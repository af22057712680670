#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "semabr/media.hpp"

namespace semabr {

struct QoEWeights {
  double alpha = 1.0;   // smoothness
  double beta = 2.66;   // rebuffering, per stalled second
  void validate() const;
};

// total == utility - smoothness - rebuffer, per chunk or summed.
struct QoEBreakdown {
  double utility = 0.0;
  double smoothness = 0.0;
  double rebuffer = 0.0;
  double total = 0.0;

  QoEBreakdown& operator+=(const QoEBreakdown& o);
};

// ln(a / min(ladder)). Throws ValidationError if `kbps` is not a rung.
double utility(int kbps, const BitrateLadder& ladder);

// Per-chunk score:
//   q * m(a_k) - alpha |m(a_k) - m(a_prev)| - beta max(0, d_k - b_prev)
// A missing a_prev (first chunk) means a_prev := a_k. A missing b_prev marks
// the startup chunk, whose wait is not a stall.
QoEBreakdown chunk_qoe(int a_kbps, std::optional<int> a_prev_kbps,
                       double download_s, std::optional<double> b_prev_s,
                       const QoEWeights& weights, const BitrateLadder& ladder,
                       double quality_scale = 1.0);

struct CdfPoint {
  double value;
  double fraction;
  bool operator==(const CdfPoint&) const = default;
};

std::vector<CdfPoint> cdf(std::vector<double> values);

}  // namespace semabr
