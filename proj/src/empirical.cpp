#include "hardy/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include <json.hpp>

#include "hardy/constants.hpp"
#include "hardy/errors.hpp"

namespace hardy {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using numerics::ScaledSum;
using numerics::shortest;

double log_lambda(const WeightSequence& w, std::size_t n) {
  if (const auto* g = std::get_if<WeightSequence::Geometric>(&w.kind())) {
    return static_cast<double>(n - 1) * std::log(g->base);
  }
  const double l = w.lambda(n);
  return l > 0.0 ? std::log(l) : kNegInf;
}

// s / exp(log_den) for a signed scaled sum.
double signed_over(const ScaledSum& s, double log_den) {
  if (s.empty()) {
    return 0.0;
  }
  return s.mantissa() * std::exp(s.log_scale() - log_den);
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double tail_infimum(const EmpiricalTrace& trace) {
  if (trace.points.empty()) {
    throw DomainError("empty trace");
  }
  const std::size_t last = trace.points.back().first;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [n, v] : trace.points) {
    if (2 * n >= last) {
      best = std::min(best, v);
    }
  }
  return best;
}

std::vector<double> log_sequence(const SequenceRule& rule, const WeightSequence& w, std::size_t N) {
  if (N == 0) {
    throw DomainError("sequence length must be at least 1");
  }
  std::vector<double> out;
  out.reserve(N);
  if (const auto* c = std::get_if<sequence::Constant>(&rule)) {
    if (!(c->c > 0.0) || !std::isfinite(c->c)) {
      throw DomainError("constant sequence needs a positive value");
    }
    out.assign(N, std::log(c->c));
  } else if (const auto* r = std::get_if<sequence::Random>(&rule)) {
    if (!(r->lo > 0.0) || !(r->hi >= r->lo) || !std::isfinite(r->hi)) {
      throw DomainError("random sequence needs 0 < lo <= hi");
    }
    std::mt19937_64 rng(r->seed);
    const double a = std::log(r->lo);
    const double b = std::log(r->hi);
    for (std::size_t i = 0; i < N; ++i) {
      out.push_back(a + (b - a) * numerics::unit_double(rng()));
    }
  } else if (const auto* wit = std::get_if<sequence::Witness>(&rule)) {
    if (!(wit->y > 0.0) || !std::isfinite(wit->y)) {
      throw DomainError("witness sequence needs y > 0");
    }
    const double ly = std::log(wit->y);
    ScaledSum lambda_sum;
    for (std::size_t n = 1; n <= N; ++n) {
      lambda_sum.add_log(log_lambda(w, n));
      out.push_back(ly - lambda_sum.log_value());
    }
  } else {
    const auto& values = std::get<sequence::Explicit>(rule).values;
    if (values.size() < N) {
      throw DomainError("explicit sequence has " + std::to_string(values.size()) +
                        " values, need " + std::to_string(N));
    }
    for (std::size_t i = 0; i < N; ++i) {
      if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
        throw DomainError("sequence values must be positive, got " + shortest(values[i]) +
                          " at n=" + std::to_string(i + 1));
      }
      out.push_back(std::log(values[i]));
    }
  }
  return out;
}

PrefixMean::PrefixMean(MeanSpec spec) : spec_(std::move(spec)) {
  if (const auto* m = std::get_if<mean::Power>(&spec_)) {
    incremental_ = true;
    extreme_ = m->p > 0 ? kNegInf : -kNegInf;
  } else if (std::holds_alternative<mean::Gini>(spec_)) {
    incremental_ = true;
  } else if (const auto* m = std::get_if<mean::QuasiArithmetic>(&spec_)) {
    incremental_ = static_cast<bool>(m->g.inverse);
  }
}

void PrefixMean::push(double log_x, double log_lambda) {
  log_x_.push_back(log_x);
  log_lambda_.push_back(log_lambda);
  lo_ = std::min(lo_, log_x);
  hi_ = std::max(hi_, log_x);
  if (!incremental_ || log_lambda == kNegInf) {
    return;
  }
  weight_.add_log(log_lambda);
  if (const auto* m = std::get_if<mean::Power>(&spec_)) {
    if (std::isinf(m->p)) {
      extreme_ = m->p > 0 ? std::max(extreme_, log_x) : std::min(extreme_, log_x);
    } else if (m->p == 0.0) {
      a_.add_log(log_lambda + std::log(std::abs(log_x)), sign_of(log_x));
    } else {
      a_.add_log(log_lambda + m->p * log_x);
    }
  } else if (const auto* m = std::get_if<mean::Gini>(&spec_)) {
    if (m->p == m->q) {
      a_.add_log(log_lambda + m->p * log_x + std::log(std::abs(log_x)), sign_of(log_x));
      b_.add_log(log_lambda + m->p * log_x);
    } else {
      a_.add_log(log_lambda + m->p * log_x);
      b_.add_log(log_lambda + m->q * log_x);
    }
  } else {
    const auto& g = std::get<mean::QuasiArithmetic>(spec_).g;
    const double gx = g(std::exp(log_x));
    if (!std::isfinite(gx)) {
      throw DomainError("generator is not finite at x=" + shortest(std::exp(log_x)));
    }
    a_.add_log(log_lambda + std::log(std::abs(gx)), sign_of(gx));
  }
}

double PrefixMean::log_value() const {
  if (log_x_.empty()) {
    throw DomainError("mean of an empty prefix");
  }
  auto clamp = [&](double v) { return std::clamp(v, lo_, hi_); };
  if (incremental_) {
    const double log_weight = weight_.log_value();
    if (const auto* m = std::get_if<mean::Power>(&spec_)) {
      if (std::isinf(m->p)) {
        return extreme_;
      }
      if (m->p == 0.0) {
        return clamp(signed_over(a_, log_weight));
      }
      return clamp((a_.log_value() - log_weight) / m->p);
    }
    if (const auto* m = std::get_if<mean::Gini>(&spec_)) {
      if (m->p == m->q) {
        return clamp(signed_over(a_, b_.log_value()));
      }
      return clamp((a_.log_value() - b_.log_value()) / (m->p - m->q));
    }
    const auto& g = std::get<mean::QuasiArithmetic>(spec_).g;
    const double y = g.inverse(signed_over(a_, log_weight));
    if (!std::isfinite(y) || !(y > 0.0)) {
      throw InversionError("generator inverse is not finite");
    }
    return clamp(std::log(y));
  }
  // Recompute with weights scaled by the largest one so geometric weights
  // stay finite; terms below e^-700 of the top weight are dropped. Homogeneous
  // means also get their arguments recentred, which keeps witness sequences
  // like 2^-n representable.
  const double top = *std::max_element(log_lambda_.begin(), log_lambda_.end());
  std::vector<std::size_t> keep;
  double klo = std::numeric_limits<double>::infinity();
  double khi = -klo;
  for (std::size_t i = 0; i < log_x_.size(); ++i) {
    if (log_lambda_[i] - top > -700.0) {
      keep.push_back(i);
      klo = std::min(klo, log_x_[i]);
      khi = std::max(khi, log_x_[i]);
    }
  }
  const double shift = is_homogeneous(spec_) ? 0.5 * (klo + khi) : 0.0;
  std::vector<double> x;
  std::vector<double> lam;
  for (std::size_t i : keep) {
    x.push_back(std::exp(log_x_[i] - shift));
    lam.push_back(std::exp(log_lambda_[i] - top));
  }
  return clamp(std::log(evaluate(spec_, x, lam)) + shift);
}

double hardy_ratio(const MeanSpec& spec, const WeightSequence& w, const SequenceRule& x,
                   std::size_t N) {
  const auto lx = log_sequence(x, w, N);
  PrefixMean prefix(spec);
  ScaledSum num;
  ScaledSum den;
  for (std::size_t n = 1; n <= N; ++n) {
    const double ll = log_lambda(w, n);
    prefix.push(lx[n - 1], ll);
    if (ll == kNegInf) {
      continue;
    }
    num.add_log(ll + prefix.log_value());
    den.add_log(ll + lx[n - 1]);
  }
  return std::exp(num.log_value() - den.log_value());
}

EmpiricalTrace est_lower_bound(const MeanSpec& spec, const WeightSequence& w, double y,
                               std::size_t N) {
  if (!(y > 0.0) || !std::isfinite(y)) {
    throw DomainError("y must be positive");
  }
  if (N == 0) {
    throw DomainError("N must be at least 1");
  }
  EmpiricalTrace trace;
  trace.label = "est";
  trace.meta = describe(spec) + " " + w.canonical() + " y=" + shortest(y);
  const auto grid = numerics::log_grid(N);
  const double ly = std::log(y);
  PrefixMean prefix(spec);
  ScaledSum lambda_sum;
  std::size_t next = 0;
  for (std::size_t n = 1; n <= N; ++n) {
    const double ll = log_lambda(w, n);
    lambda_sum.add_log(ll);
    const double log_Lambda = lambda_sum.log_value();
    prefix.push(ly - log_Lambda, ll);
    if (next < grid.size() && grid[next] == n) {
      trace.points.emplace_back(n, std::exp(log_Lambda - ly + prefix.log_value()));
      ++next;
    }
  }
  return trace;
}

std::function<double(double)> power_probe(double p) {
  if (p == 0.0) {
    return [](double) { return 1.0; };
  }
  return [p](double x) { return std::pow(x, -p); };
}

double genA_partial(const std::function<double(double)>& phi, const WeightSequence& w,
                    std::size_t n) {
  if (n == 0) {
    throw DomainError("n must be at least 1");
  }
  numerics::CompensatedSum sum;
  if (std::holds_alternative<WeightSequence::Geometric>(w.kind())) {
    for (std::size_t k = 1; k <= n; ++k) {
      const double wk = w.weight_ratio(k, n);
      if (wk > 0.0) {
        sum += wk * phi(w.prefix_ratio(k, n));
      }
    }
    return sum.value();
  }
  const auto prefix = w.prefix_sums(n);
  const double total = prefix.back();
  for (std::size_t k = 1; k <= n; ++k) {
    const double wk = w.lambda(k) / total;
    if (wk > 0.0) {
      sum += wk * phi(prefix[k - 1] / total);
    }
  }
  return sum.value();
}

double genA_limit(double p, double eta) {
  if (std::isnan(p) || p >= 1.0) {
    throw DomainError("the limit sum diverges for p >= 1");
  }
  if (!(eta >= 0.0 && eta < 1.0)) {
    throw DomainError("eta must lie in [0, 1)");
  }
  if (eta == 0.0) {
    return 1.0 / (1.0 - p);
  }
  return eta / -std::expm1((1.0 - p) * std::log1p(-eta));
}

EmpiricalTrace genA_trace(double p, const WeightSequence& w, std::size_t N) {
  EmpiricalTrace trace;
  trace.label = "genA";
  trace.meta = "p=" + shortest(p) + " " + w.canonical();
  const auto phi = power_probe(p);
  for (std::size_t n : numerics::log_grid(N)) {
    trace.points.emplace_back(n, genA_partial(phi, w, n));
  }
  return trace;
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
  return numerics::splitmix64(seed ^ numerics::splitmix64(static_cast<std::uint64_t>(trial)));
}

namespace {

bool symmetric_monotone(const MeanSpec& spec) {
  if (const auto* m = std::get_if<mean::Gini>(&spec)) {
    return m->p * m->q <= 0.0;
  }
  if (const auto* m = std::get_if<mean::HomogeneousDeviation>(&spec)) {
    return m->f.family != GeneratorFamily::Custom;
  }
  return !std::holds_alternative<mean::Deviation>(spec);
}

std::optional<double> unit_weight_constant(const MeanSpec& spec) {
  if (!symmetric_monotone(spec)) {
    return std::nullopt;
  }
  try {
    const auto c = constant_for(spec, 0.0, ConstantRoute::Auto);
    if (c.infinite) {
      return std::nullopt;
    }
    return c.value;
  } catch (const Error&) {
    return std::nullopt;
  }
}

void persist(const Violation& v, const std::string& path) {
  nlohmann::json j;
  j["trial"] = v.trial;
  j["ratio"] = v.ratio;
  j["bound"] = v.bound;
  j["against"] = v.against;
  j["sequence"] = v.sequence;
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

}  // namespace

VerifyReport run_trials(const MeanSpec& spec, const WeightSequence& w, double constant,
                        std::size_t trials, std::uint64_t seed, std::size_t N,
                        const VerifyOptions& options) {
  if (N == 0) {
    throw DomainError("N must be at least 1");
  }
  if (!(constant > 0.0)) {
    throw DomainError("constant must be positive");
  }
  VerifyReport report;
  report.trials = trials;
  report.seed = seed;
  report.N = N;
  report.constant = constant;
  report.ones_constant = unit_weight_constant(spec);

  std::vector<std::vector<double>> sequences(trials);
  report.outcomes.resize(trials);
  numerics::parallel_for(trials, [&](std::size_t t) {
    std::mt19937_64 rng(trial_seed(seed, t));
    const auto len = std::min<std::size_t>(
        N, 1 + static_cast<std::size_t>(numerics::unit_double(rng()) * static_cast<double>(N)));
    const double a = std::log(options.lo);
    const double b = std::log(options.hi);
    auto& xs = sequences[t];
    xs.resize(len);
    for (auto& v : xs) {
      v = std::exp(a + (b - a) * numerics::unit_double(rng()));
    }
    report.outcomes[t] = {t, len, hardy_ratio(spec, w, sequence::Explicit{xs}, len)};
  });

  for (const auto& o : report.outcomes) {
    if (o.ratio > report.max_ratio) {
      report.max_ratio = o.ratio;
      report.max_ratio_trial = o.trial;
    }
    const bool over = !(o.ratio <= constant * (1.0 + options.slack));
    const bool over_ones =
        report.ones_constant && !(o.ratio <= *report.ones_constant * (1.0 + options.slack));
    if (over) {
      report.violations.push_back({o.trial, o.ratio, constant, "constant", sequences[o.trial]});
    } else if (over_ones) {
      report.violations.push_back(
          {o.trial, o.ratio, *report.ones_constant, "ones", sequences[o.trial]});
    }
  }
  return report;
}

VerifyReport verify_inequality(const MeanSpec& spec, const WeightSequence& w, double constant,
                               std::size_t trials, std::uint64_t seed, std::size_t N,
                               const VerifyOptions& options) {
  auto report = run_trials(spec, w, constant, trials, seed, N, options);
  if (!report.violations.empty()) {
    const auto& v = report.violations.front();
    std::string where;
    if (!options.witness_path.empty()) {
      persist(v, options.witness_path);
      where = "; witness written to " + options.witness_path;
    }
    throw ViolationFound("trial " + std::to_string(v.trial) + " (length " +
                         std::to_string(v.sequence.size()) + ") has ratio " + shortest(v.ratio) +
                         " above the " + v.against + " bound " + shortest(v.bound) + where);
  }
  return report;
}

}  // namespace hardy
