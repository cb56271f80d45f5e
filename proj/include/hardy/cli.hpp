#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hardy/means.hpp"
#include "hardy/weights.hpp"

namespace hardy::cli {

enum class Command { Constant, Solve, Verify, Est, GenA, Sweep, Homogenize };

struct RunConfig {
  Command command = Command::Constant;
  std::string mean_text;  // canonical form of the parsed spec
  std::string weights_text;
  std::optional<MeanSpec> mean;
  std::optional<WeightSequence> weights;
  std::vector<double> eta;  // one value, or the sweep grid
  std::string method = "auto";
  std::string constant = "auto";
  double tol = 1e-12;
  std::size_t N = 0;
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  double y = 1.0;
  double p = 0.0;
  std::vector<double> x;
  std::vector<double> lambda;
  std::string out;
  std::string format = "json";
  std::string witness = "hardy_witness.json";
};

/// Parses arguments (without the program name). `--config <path>` supplies
/// key=value defaults that explicit flags override. Throws UsageError.
RunConfig parse_args(const std::vector<std::string>& args);

/// Executes a parsed config: 0 on success, 1 on computational errors (with
/// a JSON error object on `err`).
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + run with exit codes {0 ok, 1 computational, 2 usage}.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hardy::cli
