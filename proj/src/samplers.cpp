#include "cssgld/samplers.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace cssgld {

std::string_view method_name(Method method) {
  switch (method) {
    case Method::sgld: return "sgld";
    case Method::gd: return "gd";
    case Method::mh_sgld: return "mh_sgld";
  }
  return "sgld";
}

Method parse_method(std::string_view name) {
  if (name == "sgld") return Method::sgld;
  if (name == "gd") return Method::gd;
  if (name == "mh_sgld" || name == "mh") return Method::mh_sgld;
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

double default_proposal_radius(double eta, Eigen::Index d, double beta) {
  return std::sqrt(10.0 * eta * static_cast<double>(d) / beta);
}

double SamplerConfig::radius_for(Eigen::Index d) const {
  return proposal_radius.value_or(default_proposal_radius(eta, d, beta));
}

void SamplerConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw InvalidArgument("sampler.eta must be finite and >= 0");
  if (!(beta >= 0.0)) throw InvalidArgument("sampler.beta must be >= 0");
  if (proposal_radius && !(*proposal_radius > 0.0)) throw InvalidArgument("sampler.r must be positive");
  if (k_max < 0) throw InvalidArgument("sampler.k_max must be >= 0");
  if (record_every < 1) throw InvalidArgument("sampler.record_every must be >= 1");
  if (!(lipschitz > 0.0)) throw InvalidArgument("sampler.lipschitz must be positive");
}

double theory_step_size(const ConstantsReport& c, Eigen::Index d, double beta) {
  const double dd = static_cast<double>(d);
  const double smooth_cap = 1.0 / (30.0 * c.L * dd);
  const double gradient_cap = dd / (25.0 * beta * c.D * c.D);
  return std::min(smooth_cap, gradient_cap);
}

Vector warm_start(const Problem& problem, double beta, double lipschitz, RngStream& stream) {
  if (!(beta >= 0.0) || !(lipschitz > 0.0)) throw InvalidArgument("warm_start: need beta >= 0 and L > 0");
  const Eigen::Index d = problem.latent_dim();
  const double radius = problem.radius();
  const double precision = 2.0 * lipschitz * beta;
  if (precision == 0.0) return uniform_in_ball(stream, d, radius);
  const double sd = 1.0 / std::sqrt(precision);
  constexpr int kMaxAttempts = 1000000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Vector z = gaussian_vector(stream, d) * sd;
    if (z.norm() <= radius) return z;
  }
  throw NumericError("warm_start: no draw landed in the domain after 1e6 attempts (radius too small?)");
}

double mh_log_acceptance(const Vector& u, double f_u, const Vector& g_u, const Vector& w, double f_w,
                         const Vector& g_w, double eta, double beta) {
  // log P(v|u) = −‖v − u + η g(u)‖² / (4η/β) + const
  const double scale = 4.0 * eta / beta;
  const double forward_sq = (w - u + eta * g_u).squaredNorm();
  const double backward_sq = (u - w + eta * g_w).squaredNorm();
  return (forward_sq - backward_sq) / scale - beta * (f_w - f_u);
}

ChainStepper::ChainStepper(const Problem& problem, const SamplerConfig& config, Method method)
    : problem_(&problem), config_(config), method_(method), eval_(problem) {
  config_.validate();
  const Eigen::Index d = problem.latent_dim();
  r_ = config_.radius_for(d);
  noise_scale_ = std::sqrt(2.0 * config_.eta / config_.beta);
  noise_.resize(d);
  proposal_.resize(d);
}

void ChainStepper::ensure(Point& point, const Vector& z) {
  if (point.valid && point.z.size() == z.size() && point.z == z) return;
  point.z = z;
  point.f = eval_.value_and_gradient(z, point.g);
  if (!point.g.allFinite() || !std::isfinite(point.f)) throw NumericError("sampler: non-finite gradient");
  point.valid = true;
}

double ChainStepper::value_at(const Vector& z) {
  ensure(current_, z);
  return current_.f;
}

int ChainStepper::propose(const Point& from, RngStream& stream) {
  for (Eigen::Index i = 0; i < noise_.size(); ++i) noise_[i] = stream.gaussian();
  proposal_ = from.z - config_.eta * from.g + noise_scale_ * noise_;
  // closed ball: a proposal exactly at distance r is accepted
  if (!((proposal_ - from.z).norm() <= r_)) return 1;
  if (!(proposal_.norm() <= problem_->radius())) return 2;
  return 0;
}

void ChainStepper::sgld(ChainState& state, RngStream& stream) {
  ensure(current_, state.z);
  switch (propose(current_, stream)) {
    case 0:
      state.z = proposal_;
      ++state.n_accepted;
      break;
    case 1:
      ++state.n_rejected_ball;
      break;
    default:
      ++state.n_rejected_domain;
      break;
  }
}

void ChainStepper::gd(ChainState& state) {
  ensure(current_, state.z);
  proposal_ = current_.z - config_.eta * current_.g;
  const double norm = proposal_.norm();
  if (norm > problem_->radius()) proposal_ *= problem_->radius() / norm;
  state.z = proposal_;
  ++state.n_accepted;
}

void ChainStepper::mh(ChainState& state, RngStream& stream) {
  if (stream.uniform() < 0.5) {
    ++state.n_lazy;
    return;
  }
  ensure(current_, state.z);
  const int outcome = propose(current_, stream);
  if (outcome == 1) {
    ++state.n_rejected_ball;
    return;
  }
  if (outcome == 2) {
    ++state.n_rejected_domain;
    return;
  }
  ensure(candidate_, proposal_);
  // reverse move must be reachable: u ∈ B(w, r) ∩ D
  if (!((current_.z - candidate_.z).norm() <= r_)) {
    ++state.n_rejected_metropolis;
    return;
  }
  const double log_ratio = mh_log_acceptance(current_.z, current_.f, current_.g, candidate_.z, candidate_.f,
                                             candidate_.g, config_.eta, config_.beta);
  if (std::isnan(log_ratio)) throw NumericError("mh_sgld: non-finite acceptance exponent");
  if (log_ratio >= 0.0 || std::log(stream.uniform()) < log_ratio) {
    std::swap(current_, candidate_);
    state.z = current_.z;
    ++state.n_accepted;
  } else {
    ++state.n_rejected_metropolis;
  }
}

void ChainStepper::step(ChainState& state, RngStream& stream) {
  switch (method_) {
    case Method::sgld: sgld(state, stream); break;
    case Method::gd: gd(state); break;
    case Method::mh_sgld: mh(state, stream); break;
  }
  ++state.k;
}

ChainState sgld_step(const ChainState& state, const Problem& problem, const SamplerConfig& config,
                     RngStream& stream) {
  ChainStepper stepper(problem, config, Method::sgld);
  ChainState next = state;
  stepper.step(next, stream);
  return next;
}

ChainState gd_step(const ChainState& state, const Problem& problem, double eta) {
  SamplerConfig config;
  config.eta = eta;
  ChainStepper stepper(problem, config, Method::gd);
  ChainState next = state;
  RngStream unused(0);
  stepper.step(next, unused);
  return next;
}

ChainState mh_sgld_step(const ChainState& state, const Problem& problem, const SamplerConfig& config,
                        RngStream& stream) {
  ChainStepper stepper(problem, config, Method::mh_sgld);
  ChainState next = state;
  stepper.step(next, stream);
  return next;
}

Trajectory run_from(const Problem& problem, Method method, const SamplerConfig& config, const Vector& z0) {
  config.validate();
  if (z0.size() != problem.latent_dim()) throw DimensionError("run: start point has wrong dimension");
  Trajectory t;
  t.method = method;
  t.config = config;
  ChainStepper stepper(problem, config, method);
  RngStream noise(config.seed, kChainNoiseStream);
  ChainState state;
  state.z = z0;
  t.records.push_back({0, stepper.value_at(state.z), state.z});
  while (state.k < config.k_max) {
    stepper.step(state, noise);
    if (state.k % config.record_every == 0 || state.k == config.k_max) {
      t.records.push_back({state.k, stepper.value_at(state.z), state.z});
    }
  }
  t.final_state = std::move(state);
  return t;
}

Trajectory run(const Problem& problem, Method method, const SamplerConfig& config) {
  config.validate();
  RngStream init(config.seed, kWarmStartStream);
  const Vector z0 = warm_start(problem, config.beta, config.lipschitz, init);
  return run_from(problem, method, config, z0);
}

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
  const Eigen::Index d = trajectory.final_state.z.size();
  out << "k,f_value";
  for (Eigen::Index i = 0; i < d; ++i) out << ",z_" << i;
  out << '\n' << std::setprecision(17);
  for (const TrajectoryRecord& r : trajectory.records) {
    out << r.k << ',' << r.f_value;
    for (Eigen::Index i = 0; i < r.z.size(); ++i) out << ',' << r.z[i];
    out << '\n';
  }
}

namespace {

nlohmann::json finite_or_string(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

}  // namespace

std::string trajectory_sidecar_json(const Trajectory& t) {
  const ChainState& s = t.final_state;
  nlohmann::json j;
  j["method"] = method_name(t.method);
  j["config"] = {
      {"eta", finite_or_string(t.config.eta)},
      {"beta", finite_or_string(t.config.beta)},
      {"r", finite_or_string(t.config.radius_for(s.z.size()))},
      {"k_max", t.config.k_max},
      {"seed", t.config.seed},
      {"record_every", t.config.record_every},
      {"lipschitz", finite_or_string(t.config.lipschitz)},
  };
  j["counters"] = {
      {"k", s.k},
      {"accepted", s.n_accepted},
      {"rejected_ball", s.n_rejected_ball},
      {"rejected_domain", s.n_rejected_domain},
      {"lazy", s.n_lazy},
      {"rejected_metropolis", s.n_rejected_metropolis},
  };
  if (t.method == Method::gd) j["note"] = "gd iterates are radially projected onto B(0, R)";
  return j.dump(2) + "\n";
}

}  // namespace cssgld
