#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace semabr {

// Linear-beta diffusion schedule. Steps are 1-based; alpha_bar(0) == 1.
class NoiseSchedule {
 public:
  static NoiseSchedule linear(int steps, double beta_start, double beta_end);
  static NoiseSchedule standard() { return linear(1000, 1e-4, 0.02); }

  int steps() const { return static_cast<int>(beta_.size()) - 1; }
  double beta(int t) const { return beta_.at(static_cast<std::size_t>(t)); }
  double alpha(int t) const { return 1.0 - beta(t); }
  double alpha_bar(int t) const { return alpha_bar_.at(static_cast<std::size_t>(t)); }
  // (1 - alpha_bar) / alpha_bar: the equalized noise variance step t carries.
  double noise_level(int t) const;

 private:
  NoiseSchedule() = default;
  std::vector<double> beta_;       // index 0 unused (0.0)
  std::vector<double> alpha_bar_;  // index 0 == 1.0
};

NoiseSchedule build_schedule(int steps, double beta_start, double beta_end);

class Latent {
 public:
  // Throws ValidationError when empty or any value is non-finite.
  explicit Latent(std::vector<double> values);

  static Latent zeros(std::size_t dim);
  static Latent standard_normal(std::size_t dim, std::uint64_t seed);

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double max_abs_diff(const Latent& other) const;
  double mean_squared_error(const Latent& other) const;
  double mean_power() const;

 private:
  std::vector<double> values_;
};

// Flat-gain AWGN channel. snr_db may be +infinity for a noiseless link.
struct ChannelModel {
  double snr_db = 15.0;
  double gain = 1.0;
  double csi_error_db = 0.0;

  void validate() const;
  double noise_variance() const;  // sigma^2 after equalization, true channel
  double estimated_snr_db() const { return snr_db + csi_error_db; }
};

double snr_to_noise_variance(double snr_db);

// Predicts z_0 from z_t at step t, optionally conditioned.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Latent predict(const Latent& z_t, int t, const Latent* condition,
                         const NoiseSchedule& sched) const = 0;
};

// Returns a stored target. In conditional mode the prediction is
// base + condition whenever a condition is supplied.
class OracleDenoiser final : public Denoiser {
 public:
  explicit OracleDenoiser(Latent target, bool conditional = false);
  Latent predict(const Latent& z_t, int t, const Latent* condition,
                 const NoiseSchedule& sched) const override;

 private:
  Latent target_;
  bool conditional_;
};

// sqrt(alpha_bar_t) * z_t: the exact MMSE predictor for z_0 ~ N(0, I).
// Ignores any condition.
class GaussianPriorDenoiser final : public Denoiser {
 public:
  Latent predict(const Latent& z_t, int t, const Latent* condition,
                 const NoiseSchedule& sched) const override;
};

// z_t = sqrt(abar_t) z0 + sqrt(1 - abar_t) noise, 0 <= t <= T.
Latent forward_diffuse(const Latent& z0, int t, const Latent& noise,
                       const NoiseSchedule& sched);

// y = gain * z0 + n with n ~ N(0, gain^2 sigma^2) per element.
Latent transmit(const Latent& z0, const ChannelModel& ch, std::uint64_t seed);

// Smallest step whose equalized noise level covers the estimated channel
// noise; T when the channel is noisier than the whole schedule.
int match_step(double estimated_snr_db, const NoiseSchedule& sched);

// Equalizes y, tops the noise up to step r's level using the true channel
// variance, and scales onto the step-r marginal.
Latent embed_received(const Latent& y, const ChannelModel& ch, int r,
                      const NoiseSchedule& sched, std::uint64_t seed);

// q-posterior mean of z_{t-1} given z_t and a z_0 estimate, 1 <= t <= T.
Latent posterior_mean(const Latent& z_t, const Latent& z0_hat, int t,
                      const NoiseSchedule& sched);

double posterior_variance(int t, const NoiseSchedule& sched);

// Reverse process from step r down to 0.
Latent denoise_from(const Latent& z_r, int r, const Denoiser& den,
                    const NoiseSchedule& sched, bool stochastic,
                    std::uint64_t seed, const Latent* condition = nullptr);

// Short forward noising of the reference to depth s, then conditional
// reverse denoising guided by `metadata`.
Latent conditional_refine(const Latent& z0_ref, const Latent& metadata, int s,
                          const Denoiser& den, const NoiseSchedule& sched,
                          bool stochastic, std::uint64_t seed);

// End-to-end latent path for one GOP: I-frame latent over the channel,
// channel denoising from the CSI-matched step, then conditional refinement
// of each dependent frame from the recovered I-frame.
struct GopReconstruction {
  int denoise_step = 0;
  Latent iframe;
  std::vector<Latent> dependents;
  double iframe_mse = 0.0;
  double dependent_mse = 0.0;  // mean over dependent frames; 0 if none
};

GopReconstruction reconstruct_gop(const Latent& iframe,
                                  std::span<const Latent> deltas,
                                  const ChannelModel& ch,
                                  const NoiseSchedule& sched,
                                  const Denoiser& den, int refine_steps,
                                  std::uint64_t seed);

}  // namespace semabr
