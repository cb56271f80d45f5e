#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hardy/means.hpp"
#include "hardy/numerics.hpp"
#include "hardy/weights.hpp"

namespace hardy {

struct EmpiricalTrace {
  std::vector<std::pair<std::size_t, double>> points;  // n strictly increasing
  std::string label;
  std::string meta;
};

/// min of the trace over points with n >= N/2 (N the last grid point); the
/// finite stand-in for a liminf.
double tail_infimum(const EmpiricalTrace& trace);

namespace sequence {
struct Constant {
  double c = 1.0;
};
/// Log-uniform on [lo, hi], drawn from mt19937_64(seed).
struct Random {
  std::uint64_t seed = 0;
  double lo = 1e-3;
  double hi = 1e3;
};
/// x_n = y / Lambda_n.
struct Witness {
  double y = 1.0;
};
struct Explicit {
  std::vector<double> values;
};
}  // namespace sequence

using SequenceRule =
    std::variant<sequence::Constant, sequence::Random, sequence::Witness, sequence::Explicit>;

/// ln x_1, ..., ln x_N for the rule. Throws DomainError on nonpositive values
/// or an explicit list shorter than N.
std::vector<double> log_sequence(const SequenceRule& rule, const WeightSequence& w, std::size_t N);

/// Running weighted mean over prefixes. Power, Gini and quasiarithmetic
/// (with a known inverse) means are updated in O(1) per term with log-scaled
/// sums; other means are recomputed from the stored prefix.
class PrefixMean {
public:
  explicit PrefixMean(MeanSpec spec);
  void push(double log_x, double log_lambda);
  /// ln of the mean of everything pushed so far.
  [[nodiscard]] double log_value() const;
  [[nodiscard]] std::size_t size() const noexcept { return log_x_.size(); }

private:
  MeanSpec spec_;
  bool incremental_ = false;
  std::vector<double> log_x_;
  std::vector<double> log_lambda_;
  numerics::ScaledSum a_;  // meaning depends on the family
  numerics::ScaledSum b_;
  numerics::ScaledSum weight_;
  double extreme_ = 0.0;
  double lo_ = std::numeric_limits<double>::infinity();  // running min/max of ln x
  double hi_ = -std::numeric_limits<double>::infinity();
};

/// (sum_{n<=N} lambda_n M(x_1..x_n)) / (sum_{n<=N} lambda_n x_n).
double hardy_ratio(const MeanSpec& spec, const WeightSequence& w, const SequenceRule& x,
                   std::size_t N);

/// n -> (Lambda_n / y) M((y/Lambda_1, ..., y/Lambda_n), lambda) on a log grid.
EmpiricalTrace est_lower_bound(const MeanSpec& spec, const WeightSequence& w, double y,
                               std::size_t N);

/// phi_p(x) = x^-p, the probe family of the limit sums.
std::function<double(double)> power_probe(double p);

/// sum_{k<=n} (lambda_k / Lambda_n) phi(Lambda_k / Lambda_n).
double genA_partial(const std::function<double(double)>& phi, const WeightSequence& w,
                    std::size_t n);

/// Limit of genA_partial for phi_p: 1/(1-p) at eta = 0, eta/(1-(1-eta)^(1-p)) otherwise.
double genA_limit(double p, double eta);

/// genA_partial(phi_p, w, n) on a log grid up to N.
EmpiricalTrace genA_trace(double p, const WeightSequence& w, std::size_t N);

struct TrialOutcome {
  std::size_t trial = 0;
  std::size_t length = 0;
  double ratio = 0.0;
};

struct Violation {
  std::size_t trial = 0;
  double ratio = 0.0;
  double bound = 0.0;
  std::string against;  // "constant" or "ones"
  std::vector<double> sequence;
};

struct VerifyOptions {
  double slack = 1e-9;
  double lo = 1e-3;
  double hi = 1e3;
  /// Where a violating witness is written (JSON); empty disables.
  std::string witness_path;
};

struct VerifyReport {
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t N = 0;
  double constant = 0.0;
  /// Constant for unit weights, used for the sup-over-weights direction on
  /// symmetric monotone means; empty when not applicable.
  std::optional<double> ones_constant;
  double max_ratio = 0.0;
  std::size_t max_ratio_trial = 0;
  std::vector<TrialOutcome> outcomes;
  std::vector<Violation> violations;
};

/// Seed of the PRNG stream used by `trial`.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial);

/// Random log-uniform sequences of length in [1, N]; each hardy ratio must
/// stay below constant * (1 + slack), and below the unit-weight constant for
/// symmetric monotone means. Trials run in parallel with per-trial streams.
/// Throws ViolationFound (after persisting the witness) on any violation.
VerifyReport verify_inequality(const MeanSpec& spec, const WeightSequence& w, double constant,
                               std::size_t trials, std::uint64_t seed, std::size_t N,
                               const VerifyOptions& options = {});

/// Same checks without throwing; the caller inspects `violations`.
VerifyReport run_trials(const MeanSpec& spec, const WeightSequence& w, double constant,
                        std::size_t trials, std::uint64_t seed, std::size_t N,
                        const VerifyOptions& options = {});

}  // namespace hardy
