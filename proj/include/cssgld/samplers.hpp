#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cssgld/loss.hpp"

namespace cssgld {

enum class Method { sgld, gd, mh_sgld };

std::string_view method_name(Method method);
Method parse_method(std::string_view name);

/// Stream ids derived from SamplerConfig::seed.
inline constexpr std::uint64_t kWarmStartStream = 0x57a7;
inline constexpr std::uint64_t kChainNoiseStream = 0x4015e;

struct SamplerConfig {
  double eta = 1e-3;
  /// Inverse temperature. +inf disables the noise term; 0 is the flat target.
  double beta = 1.0;
  /// Proposal ball radius r; unset means sqrt(10 η d / β).
  std::optional<double> proposal_radius;
  std::int64_t k_max = 1000;
  std::uint64_t seed = 0;
  std::int64_t record_every = 1;
  /// Smoothness constant L of F fed to the warm start N(0, (2Lβ)⁻¹ I).
  double lipschitz = 1.0;

  double radius_for(Eigen::Index d) const;
  void validate() const;
};

double default_proposal_radius(double eta, Eigen::Index d, double beta);

/// η = min{1/(30 L d), d/(25 β D²)} from sampled constants.
double theory_step_size(const ConstantsReport& constants, Eigen::Index d, double beta);

/// Iterate plus accept/reject bookkeeping. The counters always sum to k;
/// n_lazy and n_rejected_metropolis stay zero outside mh_sgld.
struct ChainState {
  Vector z;
  std::int64_t k = 0;
  std::int64_t n_accepted = 0;
  std::int64_t n_rejected_ball = 0;
  std::int64_t n_rejected_domain = 0;
  std::int64_t n_lazy = 0;
  std::int64_t n_rejected_metropolis = 0;

  std::int64_t counter_total() const {
    return n_accepted + n_rejected_ball + n_rejected_domain + n_lazy + n_rejected_metropolis;
  }
};

/// z0 ~ N(0, (2Lβ)⁻¹ I) conditioned on ‖z‖ ≤ R, by rejection (capped at 10⁶
/// attempts). βL = 0 degenerates to uniform on the ball.
Vector warm_start(const Problem& problem, double beta, double lipschitz, RngStream& stream);

/// Log of the Metropolis–Hastings ratio P(u|w)/P(w|u) · exp(−β(F(w) − F(u)))
/// for the Langevin proposal density.
double mh_log_acceptance(const Vector& u, double f_u, const Vector& g_u, const Vector& w, double f_w,
                         const Vector& g_w, double eta, double beta);

/// Stateful stepping engine for one chain; caches F and ∇F at the current
/// iterate so rejected proposals cost no extra gradient.
class ChainStepper {
 public:
  ChainStepper(const Problem& problem, const SamplerConfig& config, Method method);

  void step(ChainState& state, RngStream& stream);
  double value_at(const Vector& z);

 private:
  struct Point {
    Vector z;
    double f = 0.0;
    Vector g;
    bool valid = false;
  };

  void ensure(Point& point, const Vector& z);
  void sgld(ChainState& state, RngStream& stream);
  void gd(ChainState& state);
  void mh(ChainState& state, RngStream& stream);
  /// Fills proposal_ with z − η∇F(z) + sqrt(2η/β)ξ; returns 0 accept, 1 ball, 2 domain.
  int propose(const Point& from, RngStream& stream);

  const Problem* problem_;
  SamplerConfig config_;
  Method method_;
  LossEvaluator eval_;
  double r_;
  double noise_scale_;
  Point current_;
  Point candidate_;
  Vector noise_;
  Vector proposal_;
};

ChainState sgld_step(const ChainState& state, const Problem& problem, const SamplerConfig& config,
                     RngStream& stream);
ChainState gd_step(const ChainState& state, const Problem& problem, double eta);
ChainState mh_sgld_step(const ChainState& state, const Problem& problem, const SamplerConfig& config,
                        RngStream& stream);

struct TrajectoryRecord {
  std::int64_t k = 0;
  double f_value = 0.0;
  Vector z;
};

struct Trajectory {
  Method method = Method::sgld;
  SamplerConfig config;
  std::vector<TrajectoryRecord> records;
  ChainState final_state;
};

/// Runs k_max steps from warm_start(seed) so every method sharing a seed
/// shares z0.
Trajectory run(const Problem& problem, Method method, const SamplerConfig& config);
/// Runs from an explicit start; noise comes from (seed, kChainNoiseStream).
Trajectory run_from(const Problem& problem, Method method, const SamplerConfig& config, const Vector& z0);

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);
std::string trajectory_sidecar_json(const Trajectory& trajectory);

}  // namespace cssgld
