#include "lendopt/mc_sim.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace lendopt {

namespace {

inline uint64_t mix64(uint64_t z) {
  z ^= z >> 33;
  z *= 0xff51afd7ed558ccdULL;
  z ^= z >> 33;
  z *= 0xc4ceb9fe1a85ec53ULL;
  z ^= z >> 33;
  return z;
}

constexpr int kHistogramBins = 64;
constexpr long long kChunk = 8192;

}  // namespace

double CounterRng::uniform(uint64_t path, uint64_t period, uint64_t stream) const {
  uint64_t h = mix64(seed ^ 0x9e3779b97f4a7c15ULL);
  h = mix64(h ^ (path * 0xbf58476d1ce4e5b9ULL));
  h = mix64(h ^ (period * 0x94d049bb133111ebULL));
  h = mix64(h ^ (stream + 0x2545f4914f6cdd1dULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

SimPolicy SimPolicy::exo(std::vector<double> trajectory, double y_limit, double d_rate) {
  SimPolicy p;
  p.y = std::move(trajectory);
  p.y_tail = y_limit;
  p.d.assign(p.y.size(), d_rate);
  p.d_tail = d_rate;
  p.endogenous = false;
  return p;
}

SimPolicy SimPolicy::endo_ge(const GePolicy& ge, const DemandFunction& demand) {
  SimPolicy p;
  p.endogenous = true;
  p.y = {ge.y0};
  p.y_tail = ge.y0;
  p.d = {ge.d0};
  p.d_tail = ge.d_star;
  p.accept = {demand.s(ge.d0)};
  p.accept_tail = demand.s(ge.d_star);
  return p;
}

SimPolicy SimPolicy::endo_le(std::vector<double> y_seq, std::vector<double> d_seq,
                             double y_limit, double d_limit,
                             const DemandFunction& demand) {
  if (y_seq.size() != d_seq.size())
    throw std::invalid_argument("SimPolicy::endo_le: schedule size mismatch");
  SimPolicy p;
  p.endogenous = true;
  p.y = std::move(y_seq);
  p.y_tail = y_limit;
  p.d = std::move(d_seq);
  p.d_tail = d_limit;
  p.accept.reserve(p.d.size());
  for (double dv : p.d) p.accept.push_back(demand.s(dv));
  p.accept_tail = demand.s(d_limit);
  return p;
}

void SimConfig::validate() const {
  if (n_paths < 1) throw std::invalid_argument("SimConfig: n_paths >= 1");
  if (horizon < 1) throw std::invalid_argument("SimConfig: horizon >= 1");
  if (jobs < 1) throw std::invalid_argument("SimConfig: jobs >= 1");
}

namespace {

struct ChunkStats {
  KahanAccumulator sum, sum_sq;
  long long defaults[kHistogramBins] = {};
  long long overflow_defaults = 0;
  long long balk = 0;
  long long survive = 0;
  long long samples = 0;  // pairs in antithetic mode, paths otherwise
};

struct PathOutcome {
  double npv = 0.0;
  int default_period = -1;  // -1: none
  bool balked = false;
  bool survived = false;
};

PathOutcome replay_path(const IncomeDistribution& dist, const SimPolicy& policy,
                        double rho, const SimConfig& config, const CounterRng& rng,
                        long long path, uint64_t income_key, bool flip_income) {
  double u = rng.uniform(income_key, 0, 0);
  if (flip_income) u = 1.0 - u;
  u = std::min(u, 1.0 - 1e-12);
  double theta = dist.quantile(u);

  PathOutcome out;
  double cash = 0.0;
  double disc = 1.0;
  size_t prefix = policy.y.size();
  for (int t = 0; t < config.horizon; ++t) {
    size_t tt = static_cast<size_t>(t);
    if (policy.endogenous) {
      double acc = policy.accept_at(tt);
      if (rng.uniform(path, tt, 1) >= acc) {
        out.balked = true;
        break;
      }
    }
    double y = policy.y_at(tt);
    double dr = policy.d_at(tt);
    cash -= disc * dr * y;
    if (theta >= y) {
      cash += disc * rho * y;
    } else {
      out.default_period = t;
      break;
    }
    disc *= rho;
    // exogenous schedules carry no per-period randomness once the amounts
    // stabilize, so the rest of the path resolves in closed form
    if (!policy.endogenous && tt + 1 >= prefix && t + 1 < config.horizon) {
      if (theta >= policy.y_tail) {
        double per = (rho - policy.d_tail) * policy.y_tail;
        int remaining = config.horizon - (t + 1);
        cash += disc * per * (1.0 - std::pow(rho, remaining)) / (1.0 - rho);
        out.survived = true;
      } else {
        cash -= disc * policy.d_tail * policy.y_tail;
        out.default_period = t + 1;
      }
      break;
    }
  }
  if (!out.balked && out.default_period < 0) out.survived = true;
  out.npv = cash;
  return out;
}

}  // namespace

SimResult simulate_cohort(const IncomeDistribution& dist, const SimPolicy& policy,
                          double rho, const SimConfig& config) {
  config.validate();
  auto t0 = std::chrono::steady_clock::now();
  CounterRng rng{config.seed};

  long long n = config.n_paths;
  if (config.antithetic && (n % 2)) ++n;  // whole twin pairs
  long long n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<ChunkStats> chunks(static_cast<size_t>(n_chunks));

  parallel_for(static_cast<int>(n_chunks), config.jobs, [&](int c) {
    ChunkStats& st = chunks[c];
    long long lo = static_cast<long long>(c) * kChunk;
    long long hi = std::min(n, lo + kChunk);
    auto record = [&st](const PathOutcome& o) {
      if (o.balked)
        ++st.balk;
      else if (o.default_period >= 0) {
        if (o.default_period < kHistogramBins)
          ++st.defaults[o.default_period];
        else
          ++st.overflow_defaults;
      } else {
        ++st.survive;
      }
    };
    if (config.antithetic) {
      for (long long p = lo; p < hi; p += 2) {
        // twins share the income variate; the odd path uses its reflection
        auto a = replay_path(dist, policy, rho, config, rng, p, p, false);
        auto b = replay_path(dist, policy, rho, config, rng, p + 1, p, true);
        record(a);
        record(b);
        double z = 0.5 * (a.npv + b.npv);
        st.sum.add(z);
        st.sum_sq.add(z * z);
        ++st.samples;
      }
    } else {
      for (long long p = lo; p < hi; ++p) {
        auto o = replay_path(dist, policy, rho, config, rng, p, p, false);
        record(o);
        st.sum.add(o.npv);
        st.sum_sq.add(o.npv * o.npv);
        ++st.samples;
      }
    }
  });

  // fixed chunk order keeps the reduction independent of the thread count
  KahanAccumulator sum, sum_sq;
  SimResult res;
  res.default_counts.assign(kHistogramBins + 1, 0);
  long long samples = 0;
  for (const auto& st : chunks) {
    sum.add(st.sum.value());
    sum_sq.add(st.sum_sq.value());
    samples += st.samples;
    res.balk_count += st.balk;
    res.survive_count += st.survive;
    for (int k = 0; k < kHistogramBins; ++k) res.default_counts[k] += st.defaults[k];
    res.default_counts[kHistogramBins] += st.overflow_defaults;
  }
  res.n_paths = n;
  double m = sum.value() / samples;
  res.mean_npv = m;
  double var = std::max(0.0, (sum_sq.value() - samples * m * m) / (samples - 1.0));
  res.std_error = std::sqrt(var / samples);
  res.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

double chi_square_quantile(int dof, double p) {
  // Wilson-Hilferty cube approximation
  double z;
  if (p >= 0.999) {
    z = 3.090232306167814;
  } else if (p >= 0.99) {
    z = 2.3263478740408408;
  } else if (p >= 0.95) {
    z = 1.6448536269514722;
  } else {
    throw std::invalid_argument("chi_square_quantile: supported p >= 0.95");
  }
  double k = static_cast<double>(dof);
  double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  return k * t * t * t;
}

SegmentComparison empirical_segments(const SimResult& result,
                                     const std::vector<double>& trajectory,
                                     const IncomeDistribution& dist, int k_max) {
  if (k_max >= static_cast<int>(result.default_counts.size()) - 1)
    throw std::invalid_argument("empirical_segments: k_max beyond histogram bins");
  if (k_max >= static_cast<int>(trajectory.size()))
    throw std::invalid_argument("empirical_segments: trajectory shorter than k_max");
  double n = static_cast<double>(result.n_paths);

  SegmentComparison cmp;
  double prev_cdf = 0.0;
  double chi = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    double cdfk = dist.cdf(trajectory[k]);
    SegmentComparisonRow row;
    row.k = k;
    row.expected_mass = cdfk - prev_cdf;
    row.observed_freq = result.default_counts[k] / n;
    double se = std::sqrt(row.expected_mass * (1.0 - row.expected_mass) / n);
    row.z = se > 0 ? (row.observed_freq - row.expected_mass) / se : 0.0;
    if (row.expected_mass > 0)
      chi += n * std::pow(row.observed_freq - row.expected_mass, 2) / row.expected_mass;
    cmp.rows.push_back(row);
    prev_cdf = cdfk;
  }
  cmp.creditworthy_expected = 1.0 - prev_cdf;
  long long tail = result.survive_count;
  for (int k = k_max + 1; k < static_cast<int>(result.default_counts.size()); ++k)
    tail += result.default_counts[k];
  cmp.creditworthy_observed = tail / n;
  if (cmp.creditworthy_expected > 0)
    chi += n * std::pow(cmp.creditworthy_observed - cmp.creditworthy_expected, 2) /
           cmp.creditworthy_expected;
  cmp.chi_square = chi;
  cmp.chi_critical = chi_square_quantile(k_max + 1, 0.999);
  cmp.pass = chi < cmp.chi_critical;
  return cmp;
}

}  // namespace lendopt
