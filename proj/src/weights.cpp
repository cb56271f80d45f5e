#include "hardy/weights.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>

#include "hardy/errors.hpp"
#include "hardy/numerics.hpp"

namespace hardy {

struct WeightSequence::Cache {
  std::mutex mutex;
  std::vector<double> prefix;  // prefix[i] = Lambda_{i+1}
  numerics::CompensatedSum running;
};

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_index(std::size_t n) {
  if (n == 0) {
    throw DomainError("weight index must be >= 1");
  }
}

}  // namespace

WeightSequence::WeightSequence(Kind kind)
    : kind_(std::move(kind)), cache_(std::make_shared<Cache>()) {}

WeightSequence WeightSequence::ones() { return WeightSequence(Ones{}); }

WeightSequence WeightSequence::geometric(double base) {
  if (!std::isfinite(base) || !(base > 1.0)) {
    throw DomainError("geometric weights need a finite base a > 1");
  }
  return WeightSequence(Geometric{base});
}

WeightSequence WeightSequence::power_law(double alpha) {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw DomainError("power-law weights need a finite exponent alpha >= 0");
  }
  return WeightSequence(PowerLaw{alpha});
}

WeightSequence WeightSequence::explicit_list(std::vector<double> values, TailRule tail) {
  if (values.empty()) {
    throw DomainError("explicit weights need at least one value");
  }
  if (!(values.front() > 0.0)) {
    throw DomainError("explicit weights need lambda_1 > 0");
  }
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw DomainError("explicit weights must be finite and nonnegative");
    }
  }
  return WeightSequence(Explicit{std::move(values), tail});
}

WeightSequence WeightSequence::from_file(const std::string& path, TailRule tail) {
  std::ifstream in(path);
  if (!in) {
    throw DomainError("cannot open weight file '" + path + "'");
  }
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    std::istringstream ls(line);
    double v = 0.0;
    if (!(ls >> v)) {
      throw DomainError("bad weight value '" + line + "' in " + path);
    }
    values.push_back(v);
  }
  return explicit_list(std::move(values), tail);
}

double WeightSequence::lambda(std::size_t n) const {
  require_index(n);
  return std::visit(
      overloaded{
          [](const Ones&) { return 1.0; },
          [n](const Geometric& g) { return std::pow(g.base, static_cast<double>(n - 1)); },
          [n](const PowerLaw& p) { return std::pow(static_cast<double>(n), p.alpha); },
          [n](const Explicit& e) {
            if (n <= e.values.size()) {
              return e.values[n - 1];
            }
            return e.tail == TailRule::RepeatLast ? e.values.back() : 0.0;
          },
      },
      kind_);
}

void WeightSequence::ensure(std::size_t n) const {
  std::lock_guard lock(cache_->mutex);
  auto& prefix = cache_->prefix;
  if (prefix.size() >= n) {
    return;
  }
  prefix.reserve(n);
  while (prefix.size() < n) {
    cache_->running.add(lambda(prefix.size() + 1));
    prefix.push_back(cache_->running.value());
  }
}

double WeightSequence::Lambda(std::size_t n) const {
  require_index(n);
  if (const auto* g = std::get_if<Geometric>(&kind_)) {
    // (a^n - 1) / (a - 1), exact up to rounding of pow.
    const double v = std::expm1(static_cast<double>(n) * std::log(g->base)) / (g->base - 1.0);
    if (!std::isfinite(v)) {
      throw DomainError("Lambda_n overflows for geometric weights at n=" + std::to_string(n));
    }
  }
  ensure(n);
  double v = 0.0;
  {
    std::lock_guard lock(cache_->mutex);
    v = cache_->prefix[n - 1];
  }
  if (!std::isfinite(v)) {
    throw DomainError("Lambda_n overflows at n=" + std::to_string(n));
  }
  return v;
}

std::vector<double> WeightSequence::prefix_sums(std::size_t n) const {
  if (n == 0) {
    return {};
  }
  (void)Lambda(n);
  std::lock_guard lock(cache_->mutex);
  return {cache_->prefix.begin(), cache_->prefix.begin() + static_cast<std::ptrdiff_t>(n)};
}

double WeightSequence::ratio(std::size_t n) const {
  require_index(n);
  if (const auto* g = std::get_if<Geometric>(&kind_)) {
    const double a = g->base;
    return (a - 1.0) / (a - std::pow(a, 1.0 - static_cast<double>(n)));
  }
  return lambda(n) / Lambda(n);
}

double WeightSequence::weight_ratio(std::size_t k, std::size_t n) const {
  require_index(k);
  if (k > n) {
    throw DomainError("weight_ratio needs k <= n");
  }
  if (const auto* g = std::get_if<Geometric>(&kind_)) {
    const double la = std::log(g->base);
    const auto dk = static_cast<double>(k);
    const auto dn = static_cast<double>(n);
    return (g->base - 1.0) * std::exp((dk - 1.0 - dn) * la) / -std::expm1(-dn * la);
  }
  return lambda(k) / Lambda(n);
}

double WeightSequence::prefix_ratio(std::size_t k, std::size_t n) const {
  require_index(k);
  if (k > n) {
    throw DomainError("prefix_ratio needs k <= n");
  }
  if (const auto* g = std::get_if<Geometric>(&kind_)) {
    const double la = std::log(g->base);
    const auto dk = static_cast<double>(k);
    const auto dn = static_cast<double>(n);
    return std::exp((dk - dn) * la) * std::expm1(-dk * la) / std::expm1(-dn * la);
  }
  return Lambda(k) / Lambda(n);
}

std::optional<double> WeightSequence::analytic_eta() const {
  return std::visit(overloaded{
                        [](const Ones&) -> std::optional<double> { return 0.0; },
                        [](const Geometric& g) -> std::optional<double> {
                          return (g.base - 1.0) / g.base;
                        },
                        [](const PowerLaw&) -> std::optional<double> { return 0.0; },
                        [](const Explicit&) -> std::optional<double> { return 0.0; },
                    },
                    kind_);
}

std::string WeightSequence::canonical() const {
  return std::visit(
      overloaded{
          [](const Ones&) -> std::string { return "ones"; },
          [](const Geometric& g) -> std::string {
            return "geometric:a=" + numerics::shortest(g.base);
          },
          [](const PowerLaw& p) -> std::string {
            return "powerlaw:alpha=" + numerics::shortest(p.alpha);
          },
          [](const Explicit& e) -> std::string {
            std::string out = "explicit:values=";
            for (std::size_t i = 0; i < e.values.size(); ++i) {
              out += (i ? "/" : "") + numerics::shortest(e.values[i]);
            }
            if (e.tail == TailRule::Zero) {
              out += ",tail=zero";
            }
            return out;
          },
      },
      kind_);
}

WeightProfile profile(const WeightSequence& w, std::size_t horizon) {
  if (horizon < 100) {
    throw DomainError("profile horizon must be >= 100");
  }
  WeightProfile out;
  out.horizon = horizon;

  std::vector<double> r(horizon + 1);
  for (std::size_t n = 1; n <= horizon; ++n) {
    r[n] = w.ratio(n);
  }
  out.ratio_nonincreasing = true;
  for (std::size_t n = 1; n < horizon; ++n) {
    if (r[n + 1] > r[n] + 1e-14) {
      out.ratio_nonincreasing = false;
      break;
    }
  }

  // Window: last quarter of the horizon.
  const std::size_t start = horizon - horizon / 4 + 1;
  const std::size_t m = horizon - start + 1;

  // Least-squares fit r_n ~ c0 + c1 v + c2 v^2 with v = horizon/n - vbar,
  // via modified Gram-Schmidt on the three columns. The limit n -> inf is
  // v = -vbar.
  std::vector<std::array<double, 3>> cols(m);
  double vbar = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    vbar += static_cast<double>(horizon) / static_cast<double>(start + i);
  }
  vbar /= static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double v = static_cast<double>(horizon) / static_cast<double>(start + i) - vbar;
    cols[i] = {1.0, v, v * v};
  }
  std::array<std::array<double, 3>, 3> R{};
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < j; ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        dot += cols[i][k] * cols[i][j];
      }
      R[k][j] = dot;
      for (std::size_t i = 0; i < m; ++i) {
        cols[i][j] -= dot * cols[i][k];
      }
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      norm += cols[i][j] * cols[i][j];
    }
    norm = std::sqrt(norm);
    R[j][j] = norm;
    for (std::size_t i = 0; i < m; ++i) {
      cols[i][j] /= norm;
    }
  }
  std::array<double, 3> qtb{};
  for (int j = 0; j < 3; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      qtb[j] += cols[i][j] * r[start + i];
    }
  }
  std::array<double, 3> c{};
  for (int j = 2; j >= 0; --j) {
    double s = qtb[j];
    for (int k = j + 1; k < 3; ++k) {
      s -= R[j][k] * c[k];
    }
    c[j] = s / R[j][j];
  }

  // Trend-corrected values: remove the part of the fit that vanishes as n -> inf.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  numerics::CompensatedSum avg;
  for (std::size_t i = 0; i < m; ++i) {
    const double v = static_cast<double>(horizon) / static_cast<double>(start + i) - vbar;
    const double u = v + vbar;  // horizon / n
    const double trend = c[1] * u + c[2] * (u * u - 2.0 * vbar * u);
    const double corrected = r[start + i] - trend;
    lo = std::min(lo, corrected);
    hi = std::max(hi, corrected);
    avg.add(corrected);
  }
  out.window_spread = hi - lo;
  double eta = avg.value() / static_cast<double>(m);
  if (out.window_spread >= 1e-6 || !(eta > -1e-6) || !(eta < 1.0)) {
    throw InconclusiveProfile("lambda_n/Lambda_n does not settle over the last quarter of n <= " +
                              std::to_string(horizon) + " (spread " +
                              numerics::shortest(out.window_spread) + ")");
  }
  out.eta = std::max(eta, 0.0);
  if (out.eta < 1e-12) {
    out.eta = 0.0;
  }

  const double rel_growth = 1.0 - w.prefix_ratio(start - 1, horizon);
  numerics::CompensatedSum series;
  for (std::size_t n = start; n <= horizon; ++n) {
    series.add(r[n]);
  }
  constexpr double kGrowthThreshold = 1e-10;
  out.lambda_divergent = rel_growth > kGrowthThreshold;
  out.series_divergent = series.value() > kGrowthThreshold;
  if (out.lambda_divergent != out.series_divergent) {
    throw InconclusiveProfile("Lambda_n growth and sum lambda_n/Lambda_n disagree near the "
                              "divergence threshold");
  }
  return out;
}

double eta_of(const WeightSequence& w) {
  if (auto eta = w.analytic_eta()) {
    return *eta;
  }
  return *profile(w, 10000).eta;
}

}  // namespace hardy
