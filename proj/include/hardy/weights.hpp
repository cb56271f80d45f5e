#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hardy {

/// Weight sequences (lambda_n) with lambda_1 > 0 and lambda_n >= 0, indexed
/// from n = 1. Prefix sums Lambda_n = lambda_1 + ... + lambda_n are cached
/// lazily with compensated summation; the cache is append-only and guarded by
/// a mutex, so a WeightSequence may be shared across threads. Copies share
/// the cache.
class WeightSequence {
public:
  struct Ones {};
  struct Geometric {
    double base;  // a > 1, lambda_n = a^(n-1)
  };
  struct PowerLaw {
    double alpha;  // alpha >= 0, lambda_n = n^alpha
  };
  enum class TailRule { RepeatLast, Zero };
  struct Explicit {
    std::vector<double> values;
    TailRule tail = TailRule::RepeatLast;
  };
  using Kind = std::variant<Ones, Geometric, PowerLaw, Explicit>;

  static WeightSequence ones();
  static WeightSequence geometric(double base);
  static WeightSequence power_law(double alpha);
  static WeightSequence explicit_list(std::vector<double> values,
                                      TailRule tail = TailRule::RepeatLast);
  /// One positive (nonnegative after the first) real per line.
  static WeightSequence from_file(const std::string& path,
                                  TailRule tail = TailRule::RepeatLast);

  [[nodiscard]] const Kind& kind() const noexcept { return kind_; }

  /// lambda_n, n >= 1.
  [[nodiscard]] double lambda(std::size_t n) const;
  /// Lambda_n, n >= 1. Throws DomainError if the sum overflows.
  [[nodiscard]] double Lambda(std::size_t n) const;
  /// Lambda_1..Lambda_n as a vector (index 0 holds Lambda_1).
  [[nodiscard]] std::vector<double> prefix_sums(std::size_t n) const;

  /// lambda_n / Lambda_n; closed form for geometric weights, so it stays
  /// finite even where Lambda_n itself overflows.
  [[nodiscard]] double ratio(std::size_t n) const;
  /// lambda_k / Lambda_n for k <= n.
  [[nodiscard]] double weight_ratio(std::size_t k, std::size_t n) const;
  /// Lambda_k / Lambda_n for k <= n.
  [[nodiscard]] double prefix_ratio(std::size_t k, std::size_t n) const;

  /// The analytically known limit of lambda_n / Lambda_n, if the kind fixes it.
  [[nodiscard]] std::optional<double> analytic_eta() const;

  /// Canonical CLI text, e.g. `geometric:a=2`.
  [[nodiscard]] std::string canonical() const;

private:
  struct Cache;
  explicit WeightSequence(Kind kind);
  void ensure(std::size_t n) const;

  Kind kind_;
  std::shared_ptr<Cache> cache_;
};

struct WeightProfile {
  std::optional<double> eta;  // empty: ratio does not settle
  bool ratio_nonincreasing = false;
  bool lambda_divergent = false;
  bool series_divergent = false;  // sum of lambda_n / Lambda_n over the window
  std::size_t horizon = 0;
  double window_spread = 0.0;  // max - min of the trend-corrected ratio
};

/// Profiles lambda_n / Lambda_n over n <= horizon (horizon >= 100).
///
/// eta is the tail average over the last quarter of the horizon after
/// removing a fitted b/n trend (the universal shape of the ratio when
/// eta = 0, e.g. 1/n for constant weights). The estimate is accepted when the
/// corrected values spread by less than 1e-6; otherwise InconclusiveProfile.
/// Divergence of Lambda_n is judged from its relative growth over the window
/// and cross-checked against the window sum of lambda_n / Lambda_n, which
/// must agree by equiconvergence.
WeightProfile profile(const WeightSequence& w, std::size_t horizon);

/// Analytic eta when known, otherwise profile(w, 10000).eta.
double eta_of(const WeightSequence& w);

}  // namespace hardy
