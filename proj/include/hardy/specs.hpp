#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "hardy/means.hpp"
#include "hardy/weights.hpp"

namespace hardy {

/// Mean specs:
///   power:p=<real>          (inf and -inf allowed)
///   gini:p=<real>,q=<real>
///   qa:g=log | qa:g=exp | qa:g=pow:<real>
///   devmean:f=log | devmean:f=pow:<real> | devmean:f=gini:<real>,<real>
/// Throws UsageError naming the offending text.
MeanSpec parse_mean(std::string_view text);

/// Weight specs: ones | geometric:a=<real> | powerlaw:alpha=<real> |
/// explicit:file=<path>[,tail=zero|repeat] | explicit:values=<r>/<r>/...[,tail=...]
WeightSequence parse_weights(std::string_view text);

/// A real; accepts inf, -inf.
double parse_real(std::string_view text, std::string_view what);

/// A nonnegative integer; scientific notation such as 1e6 is accepted when exact.
std::size_t parse_count(std::string_view text, std::string_view what);

/// Comma-separated reals.
std::vector<double> parse_list(std::string_view text, std::string_view what);

/// Either a single value or start:stop:step (inclusive of stop up to rounding).
std::vector<double> parse_grid(std::string_view text, std::string_view what);

}  // namespace hardy
