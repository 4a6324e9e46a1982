#include "bdctm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>

#include "bdctm/error.hpp"
#include "bdctm/refdist.hpp"

namespace bdctm {

void validate(const NutsConfig& c) {
  if (c.iterations < 1) throw ConfigError("sampler.iterations must be positive");
  if (c.burnin < 0 || c.burnin >= c.iterations) {
    throw ConfigError("sampler.burnin must lie in [0, iterations)");
  }
  if (c.warmup < 0 || c.warmup > c.burnin) {
    throw ConfigError("sampler.warmup must lie in [0, burnin]");
  }
  if (!(c.target_accept > 0.0 && c.target_accept < 1.0)) {
    throw ConfigError("sampler.target_accept must lie in (0,1)");
  }
  if (c.max_treedepth < 1 || c.max_treedepth > 20) {
    throw ConfigError("sampler.max_treedepth must lie in 1..20");
  }
  if (c.chains < 1) throw ConfigError("sampler.chains must be positive");
  if (c.threads < 0) throw ConfigError("sampler.threads must be nonnegative");
}

std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double gibbs_tau2(double quad, int rank, double a, double b, Rng& rng) {
  const double shape = a + 0.5 * rank;
  const double rate = b + 0.5 * quad;
  std::gamma_distribution<double> gamma(shape, 1.0 / rate);
  return 1.0 / gamma(rng);
}

std::vector<double> omega_log_weights(const Vector& beta_j, const Matrix& ka, const Matrix& kb,
                                      double tau2, const AnisotropyGrid& grid) {
  const double qa = beta_j.dot(ka * beta_j);
  const double qb = beta_j.dot(kb * beta_j);
  std::vector<double> w(grid.size());
  for (int k = 0; k < grid.size(); ++k) {
    const double om = grid.omega[k];
    const double quad = om * qa + (1.0 - om) * qb;
    w[k] = 0.5 * grid.log_gdet[k] - quad / (2.0 * tau2) + grid.log_prior[k];
  }
  return w;
}

int gibbs_omega(const Vector& beta_j, const Matrix& ka, const Matrix& kb, double tau2,
                const AnisotropyGrid& grid, Rng& rng) {
  if (grid.size() == 1) return 0;
  const auto w = omega_log_weights(beta_j, ka, kb, tau2, grid);
  double norm = -std::numeric_limits<double>::infinity();
  for (double x : w) norm = math::log_sum_exp(norm, x);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cum = 0.0;
  for (int k = 0; k < grid.size(); ++k) {
    cum += std::exp(w[k] - norm);
    if (u < cum) return k;
  }
  return grid.size() - 1;
}

namespace {

constexpr int kInitAttempts = 100;

}  // namespace

ChainDraws run_chain(const Model& model, const ModelDesign& design, const NutsConfig& config,
                     std::uint64_t seed) {
  validate(config);
  Rng rng(seed);
  const int P = model.dimension();
  LogPosterior post(model, design);
  ModelState state = model.initial_state();

  const LogDensity target = [&](const Vector& q, Vector& grad) {
    return post(q, state.tau2, state.omega, &grad);
  };

  HmcState hs;
  hs.grad = Vector::Zero(P);
  std::normal_distribution<double> jitter(0.0, 0.1);
  bool ok = false;
  for (int attempt = 0; attempt < kInitAttempts && !ok; ++attempt) {
    hs.q = Vector(P);
    for (int i = 0; i < P; ++i) hs.q[i] = jitter(rng);
    hs.logp = target(hs.q, hs.grad);
    ok = std::isfinite(hs.logp) && hs.grad.allFinite();
  }
  if (!ok) {
    throw SamplerError("no finite log-posterior found after " + std::to_string(kInitAttempts) +
                       " jittered initializations");
  }

  AdaptiveNuts nuts(P, config.warmup, config.target_accept, config.max_treedepth);
  nuts.initialize(hs, target, rng);

  const int kept = config.iterations - config.burnin;
  ChainDraws out;
  out.beta.resize(kept, P);
  out.tau2.resize(kept, model.num_tau2());
  out.omega.resize(kept, model.num_omega());
  if (config.store_log_pmf) out.log_pmf.resize(kept, static_cast<Eigen::Index>(design.n));
  out.stats.reserve(config.iterations);

  for (int it = 0; it < config.iterations; ++it) {
    const NutsStats st = nuts.step(hs, target, rng);
    out.stats.push_back(st);

    for (const auto& b : model.blocks()) {
      if (b.tau_index < 0) continue;
      const int om = b.omega_index >= 0 ? state.omega[b.omega_index] : 0;
      const int rank = b.prior == PriorType::Anisotropic ? b.grid.rank[om] : b.rank;
      state.tau2[b.tau_index] = gibbs_tau2(model.block_quadratic(b, hs.q, om), rank, b.a, b.b, rng);
    }
    for (const auto& b : model.blocks()) {
      if (b.omega_index < 0) continue;
      state.omega[b.omega_index] =
          gibbs_omega(hs.q.segment(b.offset, b.size), b.KA, b.KB, state.tau2[b.tau_index], b.grid, rng);
    }
    // The cached density belongs to the old hyperparameters.
    hs.logp = target(hs.q, hs.grad);

    if (it >= config.burnin) {
      const int s = it - config.burnin;
      out.beta.row(s) = hs.q.transpose();
      for (int t = 0; t < model.num_tau2(); ++t) out.tau2(s, t) = state.tau2[t];
      for (const auto& b : model.blocks()) {
        if (b.omega_index >= 0) out.omega(s, b.omega_index) = b.grid.omega[state.omega[b.omega_index]];
      }
      if (config.store_log_pmf) {
        // log_pmf() reflects the last evaluation, which was at hs.q.
        out.log_pmf.row(s) = post.log_pmf().transpose();
      }
      out.divergences += st.divergent;
    }
  }
  out.step_size = nuts.step_size();
  out.inv_mass = nuts.inv_mass();
  return out;
}

std::size_t PosteriorDraws::draws() const {
  std::size_t n = 0;
  for (const auto& c : chains) n += static_cast<std::size_t>(c.beta.rows());
  return n;
}

int PosteriorDraws::divergences() const {
  int n = 0;
  for (const auto& c : chains) n += c.divergences;
  return n;
}

namespace {

template <typename Get>
Matrix stack(const std::vector<ChainDraws>& chains, Get get) {
  Eigen::Index rows = 0, cols = 0;
  for (const auto& c : chains) {
    rows += get(c).rows();
    cols = get(c).cols();
  }
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (const auto& c : chains) {
    const Matrix& m = get(c);
    if (m.rows() == 0) continue;
    out.middleRows(r, m.rows()) = m;
    r += m.rows();
  }
  return out;
}

}  // namespace

Matrix PosteriorDraws::beta() const {
  return stack(chains, [](const ChainDraws& c) -> const Matrix& { return c.beta; });
}
Matrix PosteriorDraws::tau2() const {
  return stack(chains, [](const ChainDraws& c) -> const Matrix& { return c.tau2; });
}
Matrix PosteriorDraws::omega() const {
  return stack(chains, [](const ChainDraws& c) -> const Matrix& { return c.omega; });
}
Matrix PosteriorDraws::log_pmf() const {
  return stack(chains, [](const ChainDraws& c) -> const Matrix& { return c.log_pmf; });
}

PosteriorDraws run_chains(const Model& model, const ModelDesign& design, const NutsConfig& config) {
  validate(config);
  PosteriorDraws out;
  out.chains.resize(config.chains);
  std::vector<std::exception_ptr> errors(config.chains);

  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, config.chains);

  auto work = [&](int worker) {
    for (int c = worker; c < config.chains; c += threads) {
      try {
        out.chains[c] = run_chain(model, design, config, split_seed(config.seed, c));
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace bdctm
