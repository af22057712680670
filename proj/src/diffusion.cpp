#include "semabr/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "semabr/error.hpp"
#include "semabr/rng.hpp"

namespace semabr {

NoiseSchedule NoiseSchedule::linear(int steps, double beta_start,
                                    double beta_end) {
  if (steps < 1) throw ValidationError("schedule needs T >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
    throw ValidationError("schedule needs 0 < beta_start <= beta_end < 1");
  NoiseSchedule s;
  const auto n = static_cast<std::size_t>(steps);
  s.beta_.assign(n + 1, 0.0);
  s.alpha_bar_.assign(n + 1, 1.0);
  for (std::size_t t = 1; t <= n; ++t) {
    const double frac = steps == 1 ? 0.0
                                   : static_cast<double>(t - 1) /
                                         static_cast<double>(steps - 1);
    s.beta_[t] = beta_start + (beta_end - beta_start) * frac;
    s.alpha_bar_[t] = s.alpha_bar_[t - 1] * (1.0 - s.beta_[t]);
  }
  return s;
}

double NoiseSchedule::noise_level(int t) const {
  const double ab = alpha_bar(t);
  return (1.0 - ab) / ab;
}

NoiseSchedule build_schedule(int steps, double beta_start, double beta_end) {
  return NoiseSchedule::linear(steps, beta_start, beta_end);
}

Latent::Latent(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw ValidationError("latent must have dim >= 1");
  for (double v : values_)
    if (!std::isfinite(v)) throw ValidationError("latent has non-finite value");
}

Latent Latent::zeros(std::size_t dim) {
  return Latent(std::vector<double>(dim, 0.0));
}

Latent Latent::standard_normal(std::size_t dim, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = g(rng);
  return Latent(std::move(v));
}

namespace {

void require_same_dim(const Latent& a, const Latent& b, const char* what) {
  if (a.dim() != b.dim())
    throw ValidationError(std::string(what) + ": dimension mismatch (" +
                          std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()) + ")");
}

void require_step(int t, int lo, const NoiseSchedule& sched, const char* what) {
  if (t < lo || t > sched.steps())
    throw ValidationError(std::string(what) + ": step " + std::to_string(t) +
                          " outside [" + std::to_string(lo) + ", " +
                          std::to_string(sched.steps()) + "]");
}

std::vector<double> gaussian(std::size_t n, double stddev, std::uint64_t seed) {
  std::vector<double> v(n, 0.0);
  if (stddev <= 0.0) return v;
  Rng rng = make_rng(seed);
  std::normal_distribution<double> g(0.0, stddev);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace

double Latent::max_abs_diff(const Latent& other) const {
  require_same_dim(*this, other, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < dim(); ++i)
    m = std::max(m, std::abs(values_[i] - other.values_[i]));
  return m;
}

double Latent::mean_squared_error(const Latent& other) const {
  require_same_dim(*this, other, "mean_squared_error");
  double acc = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) {
    const double d = values_[i] - other.values_[i];
    acc += d * d;
  }
  return acc / static_cast<double>(dim());
}

double Latent::mean_power() const {
  double acc = 0.0;
  for (double v : values_) acc += v * v;
  return acc / static_cast<double>(dim());
}

double snr_to_noise_variance(double snr_db) {
  if (std::isinf(snr_db)) return snr_db > 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::pow(10.0, -snr_db / 10.0);
}

void ChannelModel::validate() const {
  if (!(gain > 0.0) || !std::isfinite(gain))
    throw ValidationError("channel gain must be > 0");
  if (std::isnan(snr_db) || std::isnan(csi_error_db))
    throw ValidationError("channel SNR must not be NaN");
}

double ChannelModel::noise_variance() const {
  return snr_to_noise_variance(snr_db);
}

OracleDenoiser::OracleDenoiser(Latent target, bool conditional)
    : target_(std::move(target)), conditional_(conditional) {}

Latent OracleDenoiser::predict(const Latent& z_t, int, const Latent* condition,
                               const NoiseSchedule&) const {
  require_same_dim(z_t, target_, "OracleDenoiser");
  if (!conditional_ || condition == nullptr) return target_;
  require_same_dim(target_, *condition, "OracleDenoiser condition");
  std::vector<double> v(target_.dim());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = target_[i] + (*condition)[i];
  return Latent(std::move(v));
}

Latent GaussianPriorDenoiser::predict(const Latent& z_t, int t, const Latent*,
                                      const NoiseSchedule& sched) const {
  require_step(t, 0, sched, "GaussianPriorDenoiser");
  const double s = std::sqrt(sched.alpha_bar(t));
  std::vector<double> v(z_t.dim());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = s * z_t[i];
  return Latent(std::move(v));
}

Latent forward_diffuse(const Latent& z0, int t, const Latent& noise,
                       const NoiseSchedule& sched) {
  require_same_dim(z0, noise, "forward_diffuse");
  require_step(t, 0, sched, "forward_diffuse");
  if (t == 0) return z0;
  const double ab = sched.alpha_bar(t);
  const double a = std::sqrt(ab);
  const double b = std::sqrt(1.0 - ab);
  std::vector<double> v(z0.dim());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * z0[i] + b * noise[i];
  return Latent(std::move(v));
}

Latent transmit(const Latent& z0, const ChannelModel& ch, std::uint64_t seed) {
  ch.validate();
  const double sigma2 = ch.noise_variance();
  if (!std::isfinite(sigma2)) throw ValidationError("channel SNR is -infinity");
  auto noise = gaussian(z0.dim(), ch.gain * std::sqrt(sigma2), derive_seed(seed, 11));
  for (std::size_t i = 0; i < noise.size(); ++i) noise[i] += ch.gain * z0[i];
  return Latent(std::move(noise));
}

int match_step(double estimated_snr_db, const NoiseSchedule& sched) {
  const double sigma2 = snr_to_noise_variance(estimated_snr_db);
  // noise_level(t) is strictly increasing in t, so binary search is exact.
  int lo = 1;
  int hi = sched.steps();
  if (!(sched.noise_level(hi) >= sigma2)) return hi;
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (sched.noise_level(mid) >= sigma2)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

Latent embed_received(const Latent& y, const ChannelModel& ch, int r,
                      const NoiseSchedule& sched, std::uint64_t seed) {
  ch.validate();
  require_step(r, 1, sched, "embed_received");
  const double makeup_var =
      std::max(0.0, sched.noise_level(r) - ch.noise_variance());
  auto v = gaussian(y.dim(), std::sqrt(makeup_var), derive_seed(seed, 12));
  const double scale = std::sqrt(sched.alpha_bar(r));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = scale * (y[i] / ch.gain + v[i]);
  return Latent(std::move(v));
}

Latent posterior_mean(const Latent& z_t, const Latent& z0_hat, int t,
                      const NoiseSchedule& sched) {
  require_same_dim(z_t, z0_hat, "posterior_mean");
  require_step(t, 1, sched, "posterior_mean");
  const double ab_t = sched.alpha_bar(t);
  const double ab_prev = sched.alpha_bar(t - 1);
  const double c0 = std::sqrt(ab_prev) * sched.beta(t) / (1.0 - ab_t);
  const double ct = std::sqrt(sched.alpha(t)) * (1.0 - ab_prev) / (1.0 - ab_t);
  std::vector<double> v(z_t.dim());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = c0 * z0_hat[i] + ct * z_t[i];
  return Latent(std::move(v));
}

double posterior_variance(int t, const NoiseSchedule& sched) {
  require_step(t, 1, sched, "posterior_variance");
  return sched.beta(t) * (1.0 - sched.alpha_bar(t - 1)) /
         (1.0 - sched.alpha_bar(t));
}

Latent denoise_from(const Latent& z_r, int r, const Denoiser& den,
                    const NoiseSchedule& sched, bool stochastic,
                    std::uint64_t seed, const Latent* condition) {
  require_step(r, 1, sched, "denoise_from");
  Latent z = z_r;
  for (int t = r; t >= 1; --t) {
    const Latent z0_hat = den.predict(z, t, condition, sched);
    Latent mean = posterior_mean(z, z0_hat, t, sched);
    if (stochastic && t > 1) {
      const double sd = std::sqrt(posterior_variance(t, sched));
      auto noise = gaussian(z.dim(), sd,
                            derive_seed(seed, 1000 + static_cast<std::uint64_t>(t)));
      for (std::size_t i = 0; i < noise.size(); ++i) noise[i] += mean[i];
      z = Latent(std::move(noise));
    } else {
      z = std::move(mean);
    }
  }
  return z;
}

Latent conditional_refine(const Latent& z0_ref, const Latent& metadata, int s,
                          const Denoiser& den, const NoiseSchedule& sched,
                          bool stochastic, std::uint64_t seed) {
  require_same_dim(z0_ref, metadata, "conditional_refine");
  require_step(s, 1, sched, "conditional_refine");
  const Latent noise(gaussian(z0_ref.dim(), 1.0, derive_seed(seed, 21)));
  const Latent z_s = forward_diffuse(z0_ref, s, noise, sched);
  return denoise_from(z_s, s, den, sched, stochastic, derive_seed(seed, 22),
                      &metadata);
}

GopReconstruction reconstruct_gop(const Latent& iframe,
                                  std::span<const Latent> deltas,
                                  const ChannelModel& ch,
                                  const NoiseSchedule& sched,
                                  const Denoiser& den, int refine_steps,
                                  std::uint64_t seed) {
  const int r = match_step(ch.estimated_snr_db(), sched);
  const Latent y = transmit(iframe, ch, derive_seed(seed, 31));
  const Latent z_r = embed_received(y, ch, r, sched, derive_seed(seed, 32));
  Latent recovered = denoise_from(z_r, r, den, sched, false, derive_seed(seed, 33));

  GopReconstruction out{r, recovered, {}, recovered.mean_squared_error(iframe), 0.0};
  // Dependent frames are anchored on the recovered I-frame latent.
  const OracleDenoiser anchored(recovered, /*conditional=*/true);
  double acc = 0.0;
  for (std::size_t j = 0; j < deltas.size(); ++j) {
    Latent frame = conditional_refine(recovered, deltas[j], refine_steps,
                                      anchored, sched, false,
                                      derive_seed(seed, 100 + j));
    std::vector<double> truth(iframe.dim());
    for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = iframe[i] + deltas[j][i];
    acc += frame.mean_squared_error(Latent(std::move(truth)));
    out.dependents.push_back(std::move(frame));
  }
  if (!deltas.empty()) out.dependent_mse = acc / static_cast<double>(deltas.size());
  return out;
}

}  // namespace semabr
