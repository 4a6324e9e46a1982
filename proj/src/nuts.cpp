#include "bdctm/nuts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bdctm/error.hpp"
#include "bdctm/refdist.hpp"

namespace bdctm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void sample_momentum(Vector& p, const Vector& inv_mass, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = normal(rng) / std::sqrt(inv_mass[i]);
}

double uniform(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

bool no_u_turn(const Vector& p_sharp_minus, const Vector& p_sharp_plus, const Vector& rho) {
  return p_sharp_plus.dot(rho) > 0.0 && p_sharp_minus.dot(rho) > 0.0;
}

class Trajectory {
 public:
  Trajectory(const LogDensity& f, const Vector& inv_mass, double eps, Rng& rng)
      : f_(f), inv_mass_(inv_mass), eps_(eps), rng_(rng) {}

  int n_leapfrog = 0;
  double sum_metro_prob = 0.0;
  bool divergent = false;

  bool build_tree(int depth, PhasePoint& z, PhasePoint& z_propose, Vector& p_sharp_beg,
                  Vector& p_sharp_end, Vector& rho, Vector& p_beg, Vector& p_end, double h0,
                  double sign, double& log_sum_weight) {
    if (depth == 0) {
      leapfrog(z, f_, inv_mass_, sign * eps_);
      ++n_leapfrog;
      double h = hamiltonian(z, inv_mass_);
      if (std::isnan(h)) h = kInf;
      if (h - h0 > kMaxDeltaH) divergent = true;
      log_sum_weight = math::log_sum_exp(log_sum_weight, h0 - h);
      sum_metro_prob += h0 - h > 0.0 ? 1.0 : std::exp(h0 - h);
      z_propose = z;
      p_sharp_beg = inv_mass_.cwiseProduct(z.p);
      p_sharp_end = p_sharp_beg;
      rho += z.p;
      p_beg = z.p;
      p_end = p_beg;
      return !divergent;
    }

    const auto dim = z.q.size();
    double lsw_init = -kInf;
    Vector p_init_end(dim), p_sharp_init_end(dim);
    Vector rho_init = Vector::Zero(dim);
    if (!build_tree(depth - 1, z, z_propose, p_sharp_beg, p_sharp_init_end, rho_init, p_beg,
                    p_init_end, h0, sign, lsw_init)) {
      return false;
    }

    PhasePoint z_propose_final = z;
    double lsw_final = -kInf;
    Vector p_final_beg(dim), p_sharp_final_beg(dim);
    Vector rho_final = Vector::Zero(dim);
    if (!build_tree(depth - 1, z, z_propose_final, p_sharp_final_beg, p_sharp_end, rho_final,
                    p_final_beg, p_end, h0, sign, lsw_final)) {
      return false;
    }

    const double lsw_subtree = math::log_sum_exp(lsw_init, lsw_final);
    log_sum_weight = math::log_sum_exp(log_sum_weight, lsw_subtree);
    if (lsw_final > lsw_subtree) {
      z_propose = z_propose_final;
    } else if (uniform(rng_) < std::exp(lsw_final - lsw_subtree)) {
      z_propose = z_propose_final;
    }

    const Vector rho_subtree = rho_init + rho_final;
    rho += rho_subtree;
    bool persist = no_u_turn(p_sharp_beg, p_sharp_end, rho_subtree);
    Vector rho_extended = rho_init + p_final_beg;
    persist = persist && no_u_turn(p_sharp_beg, p_sharp_final_beg, rho_extended);
    rho_extended = rho_final + p_init_end;
    persist = persist && no_u_turn(p_sharp_init_end, p_sharp_end, rho_extended);
    return persist;
  }

 private:
  const LogDensity& f_;
  const Vector& inv_mass_;
  double eps_;
  Rng& rng_;
};

}  // namespace

double hamiltonian(const PhasePoint& z, const Vector& inv_mass) {
  return -z.logp + 0.5 * z.p.dot(inv_mass.cwiseProduct(z.p));
}

void leapfrog(PhasePoint& z, const LogDensity& f, const Vector& inv_mass, double eps) {
  z.p += 0.5 * eps * z.grad;
  z.q += eps * inv_mass.cwiseProduct(z.p);
  z.logp = f(z.q, z.grad);
  if (!std::isfinite(z.logp)) {
    z.logp = -kInf;
    z.grad.setZero();
    return;
  }
  z.p += 0.5 * eps * z.grad;
}

NutsStats nuts_transition(HmcState& state, const LogDensity& f, const Vector& inv_mass, double eps,
                          int max_depth, Rng& rng) {
  const auto dim = state.q.size();
  PhasePoint z{state.q, Vector(dim), state.grad, state.logp};
  sample_momentum(z.p, inv_mass, rng);

  PhasePoint z_fwd = z, z_bck = z, z_sample = z, z_propose = z;
  Vector p_fwd_fwd = z.p;
  Vector p_sharp_fwd_fwd = inv_mass.cwiseProduct(z.p);
  Vector p_fwd_bck = z.p;
  Vector p_sharp_fwd_bck = p_sharp_fwd_fwd;
  Vector p_bck_fwd = z.p;
  Vector p_sharp_bck_fwd = p_sharp_fwd_fwd;
  Vector p_bck_bck = z.p;
  Vector p_sharp_bck_bck = p_sharp_fwd_fwd;
  Vector rho = z.p;

  double log_sum_weight = 0.0;
  const double h0 = hamiltonian(z, inv_mass);
  Trajectory traj(f, inv_mass, eps, rng);
  int depth = 0;

  while (depth < max_depth) {
    Vector rho_fwd = Vector::Zero(dim);
    Vector rho_bck = Vector::Zero(dim);
    bool valid = false;
    double lsw_subtree = -kInf;

    if (uniform(rng) > 0.5) {
      z = z_fwd;
      rho_bck = rho;
      p_bck_fwd = p_fwd_bck;
      p_sharp_bck_fwd = p_sharp_fwd_bck;
      valid = traj.build_tree(depth, z, z_propose, p_sharp_fwd_bck, p_sharp_fwd_fwd, rho_fwd,
                              p_fwd_bck, p_fwd_fwd, h0, 1.0, lsw_subtree);
      z_fwd = z;
    } else {
      z = z_bck;
      rho_fwd = rho;
      p_fwd_bck = p_bck_fwd;
      p_sharp_fwd_bck = p_sharp_bck_fwd;
      valid = traj.build_tree(depth, z, z_propose, p_sharp_bck_fwd, p_sharp_bck_bck, rho_bck,
                              p_bck_fwd, p_bck_bck, h0, -1.0, lsw_subtree);
      z_bck = z;
    }
    if (!valid) break;
    ++depth;

    if (lsw_subtree > log_sum_weight) {
      z_sample = z_propose;
    } else if (uniform(rng) < std::exp(lsw_subtree - log_sum_weight)) {
      z_sample = z_propose;
    }
    log_sum_weight = math::log_sum_exp(log_sum_weight, lsw_subtree);

    rho = rho_bck + rho_fwd;
    bool persist = no_u_turn(p_sharp_bck_bck, p_sharp_fwd_fwd, rho);
    Vector rho_extended = rho_bck + p_fwd_bck;
    persist = persist && no_u_turn(p_sharp_bck_bck, p_sharp_fwd_bck, rho_extended);
    rho_extended = rho_fwd + p_bck_fwd;
    persist = persist && no_u_turn(p_sharp_bck_fwd, p_sharp_fwd_fwd, rho_extended);
    if (!persist) break;
  }

  NutsStats st;
  st.step_size = eps;
  st.tree_depth = depth;
  st.n_leapfrog = traj.n_leapfrog;
  st.divergent = traj.divergent;
  st.accept_stat = traj.n_leapfrog > 0 ? traj.sum_metro_prob / traj.n_leapfrog : 0.0;
  st.energy = hamiltonian(z_sample, inv_mass);
  st.log_density = z_sample.logp;
  state.q = std::move(z_sample.q);
  state.logp = z_sample.logp;
  state.grad = std::move(z_sample.grad);
  return st;
}

double init_step_size(const HmcState& state, const LogDensity& f, const Vector& inv_mass,
                      double eps, Rng& rng) {
  const double target = -std::numbers::ln2;
  const auto dim = state.q.size();
  auto trial = [&](double e) {
    PhasePoint z{state.q, Vector(dim), state.grad, state.logp};
    sample_momentum(z.p, inv_mass, rng);
    const double h0 = hamiltonian(z, inv_mass);
    leapfrog(z, f, inv_mass, e);
    double h = hamiltonian(z, inv_mass);
    if (std::isnan(h)) h = kInf;
    return h0 - h;
  };
  const int direction = trial(eps) > target ? 1 : -1;
  while (true) {
    const double delta = trial(eps);
    if (direction == 1 && !(delta > target)) break;
    if (direction == -1 && !(delta < target)) break;
    eps = direction == 1 ? 2.0 * eps : 0.5 * eps;
    if (eps > 1e7) throw SamplerError("step size search diverged: posterior appears improper");
    if (eps < 1e-300) throw SamplerError("step size search collapsed to zero");
  }
  return eps;
}

DualAveraging::DualAveraging(double delta, double gamma, double t0, double kappa)
    : delta_(delta), gamma_(gamma), t0_(t0), kappa_(kappa) {}

void DualAveraging::restart(double eps) {
  mu_ = std::log(10.0 * eps);
  s_bar_ = 0.0;
  x_bar_ = 0.0;
  counter_ = 0;
  eps_ = eps;
  frozen_ = false;
}

double DualAveraging::update(double accept_stat) {
  if (frozen_) return eps_;
  ++counter_;
  const double a = std::min(1.0, accept_stat);
  const double eta = 1.0 / (counter_ + t0_);
  s_bar_ = (1.0 - eta) * s_bar_ + eta * (delta_ - a);
  const double x = mu_ - s_bar_ * std::sqrt(static_cast<double>(counter_)) / gamma_;
  const double x_eta = std::pow(static_cast<double>(counter_), -kappa_);
  x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
  eps_ = std::exp(x);
  return eps_;
}

double DualAveraging::averaged() const { return counter_ > 0 ? std::exp(x_bar_) : eps_; }

double DualAveraging::freeze() {
  eps_ = averaged();
  frozen_ = true;
  return eps_;
}

WindowSchedule::WindowSchedule(int warmup, int init_buffer, int term_buffer, int base_window)
    : warmup_(warmup), init_(init_buffer), term_(term_buffer) {
  if (warmup < 20) {
    init_ = warmup;
    term_ = 0;
    return;
  }
  int base = base_window;
  if (init_ + term_ + base > warmup) {
    init_ = static_cast<int>(0.15 * warmup);
    term_ = static_cast<int>(0.1 * warmup);
    base = warmup - (init_ + term_);
  }
  const int last = warmup - term_ - 1;
  int size = base;
  int next = init_ + size - 1;
  ends_.push_back(next);
  while (next != last) {
    size *= 2;
    const int counter = next;
    next = counter + size;
    if (next != last && next + 2 * size >= warmup - term_) next = last;
    if (next > last) next = last;
    ends_.push_back(next);
  }
}

bool WindowSchedule::in_window(int it) const {
  return !ends_.empty() && it >= init_ && it < warmup_ - term_;
}

bool WindowSchedule::end_of_window(int it) const {
  return std::find(ends_.begin(), ends_.end(), it) != ends_.end();
}

Vector regularized_inv_mass(const Vector& variance, const Vector& previous) {
  Vector out = previous;
  for (Eigen::Index i = 0; i < variance.size(); ++i) {
    if (variance[i] > 0.0 && std::isfinite(variance[i])) out[i] = 0.95 * variance[i] + 0.05;
  }
  return out;
}

VarianceEstimator::VarianceEstimator(int dim) : mean_(Vector::Zero(dim)), m2_(Vector::Zero(dim)) {}

void VarianceEstimator::add(const Vector& x) {
  ++n_;
  const Vector delta = x - mean_;
  mean_ += delta / n_;
  m2_ += delta.cwiseProduct(x - mean_);
}

void VarianceEstimator::restart() {
  n_ = 0;
  mean_.setZero();
  m2_.setZero();
}

Vector VarianceEstimator::variance() const {
  if (n_ < 2) return Vector::Zero(mean_.size());
  return m2_ / (n_ - 1.0);
}

AdaptiveNuts::AdaptiveNuts(int dim, int warmup, double target_accept, int max_depth)
    : warmup_(warmup),
      max_depth_(max_depth),
      inv_mass_(Vector::Ones(dim)),
      da_(target_accept),
      windows_(warmup),
      var_(dim) {}

void AdaptiveNuts::initialize(const HmcState& state, const LogDensity& f, Rng& rng) {
  eps_ = init_step_size(state, f, inv_mass_, 1.0, rng);
  da_.restart(eps_);
}

NutsStats AdaptiveNuts::step(HmcState& state, const LogDensity& f, Rng& rng) {
  NutsStats st = nuts_transition(state, f, inv_mass_, eps_, max_depth_, rng);
  if (it_ < warmup_) {
    eps_ = da_.update(st.accept_stat);
    if (windows_.in_window(it_)) var_.add(state.q);
    if (windows_.end_of_window(it_)) {
      inv_mass_ = regularized_inv_mass(var_.variance(), inv_mass_);
      var_.restart();
      eps_ = init_step_size(state, f, inv_mass_, eps_, rng);
      da_.restart(eps_);
    }
    if (it_ == warmup_ - 1) eps_ = da_.freeze();
  }
  ++it_;
  return st;
}

}  // namespace bdctm
