#include "hardy/cli.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hardy/constants.hpp"
#include "hardy/empirical.hpp"
#include "hardy/errors.hpp"
#include "hardy/homogenize.hpp"
#include "hardy/numerics.hpp"
#include "hardy/specs.hpp"

namespace hardy::cli {

namespace {

using Json = nlohmann::ordered_json;

struct HelpRequested {
  std::string text;
};

// Option values as typed; converted after CLI11 has matched them so that
// every conversion error names its flag.
struct Raw {
  std::string family;
  std::string weights;
  std::string eta;
  std::string method = "auto";
  std::string constant = "auto";
  std::string tol;
  std::string N;
  std::string trials = "200";
  std::string seed = "0";
  std::string y = "1";
  std::string p;
  std::string x;
  std::string lambda;
  std::string out;
  std::string format = "json";
  std::string witness = "hardy_witness.json";
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) {
    return {};
  }
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("--config: cannot read '" + path + "'");
  }
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("--config: line " + std::to_string(lineno) + " of '" + path +
                       "' is not key=value");
    }
    auto key = trim(line.substr(0, eq));
    while (!key.empty() && key.front() == '-') {
      key.erase(0, 1);
    }
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

bool has_flag(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) {
      return true;
    }
  }
  // Either spelling of an aliased option counts.
  static const std::map<std::string, std::string> alias{
      {"family", "mean"}, {"mean", "family"}, {"lam", "lambda"}, {"lambda", "lam"}};
  if (const auto it = alias.find(key); it != alias.end()) {
    const std::string other = "--" + it->second;
    for (const auto& a : args) {
      if (a == other || a.rfind(other + "=", 0) == 0) {
        return true;
      }
    }
  }
  return false;
}

// Splices config entries in as flags unless given explicitly.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) {
        throw UsageError("--config needs a path");
      }
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) {
    return args;
  }
  auto kv = read_config(path);
  if (const auto it = kv.find("command"); it != kv.end()) {
    if (args.empty() || args.front().rfind("-", 0) == 0) {
      args.insert(args.begin(), it->second);
    }
    kv.erase(it);
  }
  for (const auto& [k, v] : kv) {
    if (!has_flag(args, k)) {
      args.push_back("--" + k);
      args.push_back(v);
    }
  }
  return args;
}

double check_eta(double eta, const char* flag) {
  if (!(eta >= 0.0 && eta < 1.0)) {
    throw UsageError(std::string(flag) + " must lie in [0, 1), got " + numerics::shortest(eta));
  }
  return eta;
}

Json number(double v) {
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  if (std::isnan(v)) {
    return nullptr;
  }
  return v;
}

std::string csv_number(double v) {
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json result_json(const HardyConstantResult& r) {
  Json j;
  j["value"] = r.infinite ? Json("inf") : number(r.value);
  j["method"] = std::string(to_string(r.method));
  j["residual"] = number(r.residual);
  j["eta"] = number(r.eta);
  j["bracket"] = Json::array({number(r.lo), number(r.hi)});
  return j;
}

ConstantRoute route_of(const std::string& method) {
  if (method == "closed") {
    return ConstantRoute::Closed;
  }
  if (method == "root") {
    return ConstantRoute::Root;
  }
  return ConstantRoute::Auto;
}

class Output {
public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) {
        throw UsageError("--out: cannot write '" + path + "'");
      }
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

private:
  std::ofstream file_;
  std::ostream* stream_;
};

void write_trace_csv(std::ostream& os, const char* header,
                     const std::vector<std::pair<double, double>>& rows) {
  os << header << '\n';
  for (const auto& [a, b] : rows) {
    os << csv_number(a) << ',' << csv_number(b) << '\n';
  }
}

std::vector<std::pair<double, double>> as_rows(const EmpiricalTrace& t) {
  std::vector<std::pair<double, double>> rows;
  for (const auto& [n, v] : t.points) {
    rows.emplace_back(static_cast<double>(n), v);
  }
  return rows;
}

double eta_for(const RunConfig& c) {
  if (!c.eta.empty()) {
    return c.eta.front();
  }
  return eta_of(*c.weights);
}

int cmd_constant(const RunConfig& c, std::ostream& out) {
  const double eta = eta_for(c);
  Json j;
  j["family"] = c.mean_text;
  if (c.method == "both") {
    const auto closed = constant_for(*c.mean, eta, ConstantRoute::Closed, c.tol);
    const auto root = constant_for(*c.mean, eta, ConstantRoute::Root, c.tol);
    j["closed"] = result_json(closed);
    j["root"] = result_json(root);
    const double diff = closed.infinite && root.infinite ? 0.0 : std::abs(closed.value - root.value);
    j["difference"] = number(diff);
  } else {
    const auto r = constant_for(*c.mean, eta, route_of(c.method), c.tol);
    if (c.format == "csv") {
      out << "eta,value,method,residual\n"
          << csv_number(eta) << ',' << csv_number(r.value) << ',' << to_string(r.method) << ','
          << csv_number(r.residual) << '\n';
      return 0;
    }
    const auto fields = result_json(r);
    for (const auto& [k, v] : fields.items()) {
      j[k] = v;
    }
  }
  out << j.dump() << '\n';
  return 0;
}

int cmd_solve(const RunConfig& c, std::ostream& out) {
  const double eta = eta_for(c);
  auto j = result_json(constant_for(*c.mean, eta, ConstantRoute::Root, c.tol));
  j["family"] = c.mean_text;
  out << j.dump() << '\n';
  return 0;
}

int cmd_sweep(const RunConfig& c, std::ostream& out) {
  const auto route = route_of(c.method);
  std::vector<HardyConstantResult> results(c.eta.size());
  std::vector<std::exception_ptr> errors(c.eta.size());
  numerics::parallel_for(c.eta.size(), [&](std::size_t i) {
    try {
      results[i] = constant_for(*c.mean, c.eta[i], route, c.tol);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  Output o(c.out, out);
  *o << "eta,value,method,residual\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    *o << csv_number(c.eta[i]) << ',' << csv_number(results[i].value) << ','
       << to_string(results[i].method) << ',' << csv_number(results[i].residual) << '\n';
  }
  if (!c.out.empty()) {
    Json j;
    j["family"] = c.mean_text;
    j["rows"] = results.size();
    j["out"] = c.out;
    out << j.dump() << '\n';
  }
  return 0;
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
  const double eta = eta_of(*c.weights);
  double constant = 0.0;
  if (c.constant == "auto") {
    const auto r = constant_for(*c.mean, eta, ConstantRoute::Auto, c.tol);
    constant = r.value;
  } else {
    constant = parse_real(c.constant, "--constant");
  }
  VerifyOptions opts;
  opts.witness_path = c.witness;
  const auto report = verify_inequality(*c.mean, *c.weights, constant, c.trials, c.seed, c.N, opts);
  Json j;
  j["mean"] = c.mean_text;
  j["weights"] = c.weights_text;
  j["eta"] = number(eta);
  j["constant"] = number(report.constant);
  j["ones_constant"] = report.ones_constant ? number(*report.ones_constant) : Json(nullptr);
  j["trials"] = report.trials;
  j["seed"] = report.seed;
  j["N"] = report.N;
  j["max_ratio"] = number(report.max_ratio);
  j["max_ratio_trial"] = report.max_ratio_trial;
  j["violations"] = report.violations.size();
  j["passed"] = report.violations.empty();
  out << j.dump() << '\n';
  return 0;
}

int cmd_est(const RunConfig& c, std::ostream& out) {
  const auto trace = est_lower_bound(*c.mean, *c.weights, c.y, c.N);
  Output o(c.out, out);
  write_trace_csv(*o, "n,value", as_rows(trace));
  if (!c.out.empty()) {
    Json j;
    j["mean"] = c.mean_text;
    j["weights"] = c.weights_text;
    j["y"] = number(c.y);
    j["N"] = c.N;
    j["points"] = trace.points.size();
    j["last"] = number(trace.points.back().second);
    j["tail_infimum"] = number(tail_infimum(trace));
    j["out"] = c.out;
    out << j.dump() << '\n';
  }
  return 0;
}

int cmd_gena(const RunConfig& c, std::ostream& out) {
  const double eta = eta_of(*c.weights);
  const double limit = genA_limit(c.p, eta);
  const double partial = genA_partial(power_probe(c.p), *c.weights, c.N);
  if (!c.out.empty()) {
    Output o(c.out, out);
    write_trace_csv(*o, "n,value", as_rows(genA_trace(c.p, *c.weights, c.N)));
  }
  Json j;
  j["p"] = number(c.p);
  j["weights"] = c.weights_text;
  j["eta"] = number(eta);
  j["N"] = c.N;
  j["partial"] = number(partial);
  j["limit"] = number(limit);
  j["abs_error"] = number(std::abs(partial - limit));
  if (!c.out.empty()) {
    j["out"] = c.out;
  }
  out << j.dump() << '\n';
  return 0;
}

int cmd_homogenize(const RunConfig& c, std::ostream& out) {
  std::vector<double> lam = c.lambda;
  if (lam.empty()) {
    lam.assign(c.x.size(), 1.0);
  }
  const double tol = c.tol;
  const auto est = homogenize(*c.mean, c.x, lam, tol);
  std::vector<std::pair<double, double>> rows(est.t_ladder.begin(), est.t_ladder.end());
  rows.emplace_back(0.0, est.value);
  Output o(c.out, out);
  write_trace_csv(*o, "t,value", rows);
  if (!c.out.empty()) {
    Json j;
    j["mean"] = c.mean_text;
    j["value"] = number(est.value);
    j["mean_at_x"] = number(evaluate(*c.mean, c.x, lam));
    j["converged"] = est.converged;
    j["spread"] = number(est.spread);
    j["out"] = c.out;
    out << j.dump() << '\n';
  }
  return 0;
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& input) {
  const auto args = merge_config(input);
  CLI::App app{"Sharp weighted Hardy constants and numerical checks", "hardy"};
  app.require_subcommand(1);
  Raw raw;

  auto* constant = app.add_subcommand("constant", "sharp constant for a mean family");
  auto* solve = app.add_subcommand("solve", "root-solved constant for a mean family");
  auto* verify = app.add_subcommand("verify", "randomized check of the Hardy inequality");
  auto* est = app.add_subcommand("est", "lower-estimate trace along the witness sequence");
  auto* gena = app.add_subcommand("gena", "partial sums against their limit");
  auto* sweep = app.add_subcommand("sweep", "constant over an eta grid (CSV)");
  auto* homog = app.add_subcommand("homogenize", "homogenization ladder of a mean at x");

  for (auto* sc : {constant, solve, sweep}) {
    sc->add_option("--family,--mean", raw.family, "mean spec")->required();
    sc->add_option("--tol", raw.tol, "root tolerance");
  }
  for (auto* sc : {constant, solve}) {
    sc->add_option("--eta", raw.eta, "limit of lambda_n / Lambda_n");
    sc->add_option("--weights", raw.weights, "weight spec (eta derived when --eta is absent)");
  }
  constant->add_option("--method", raw.method)
      ->check(CLI::IsMember({"closed", "root", "both", "auto"}));
  constant->add_option("--format", raw.format)->check(CLI::IsMember({"json", "csv"}));
  sweep->add_option("--eta", raw.eta, "start:stop:step")->required();
  sweep->add_option("--method", raw.method)->check(CLI::IsMember({"closed", "root", "auto"}));
  sweep->add_option("--out", raw.out, "CSV path (stdout when absent)");

  for (auto* sc : {verify, est}) {
    sc->add_option("--mean,--family", raw.family, "mean spec")->required();
    sc->add_option("--weights", raw.weights, "weight spec")->required();
  }
  verify->add_option("--constant", raw.constant, "auto or a number");
  verify->add_option("--trials", raw.trials);
  verify->add_option("--seed", raw.seed);
  verify->add_option("--N", raw.N, "maximal sequence length")->default_str("50");
  verify->add_option("--witness", raw.witness, "where a violating sequence is written");
  verify->add_option("--tol", raw.tol);

  est->add_option("--y", raw.y);
  est->add_option("--N", raw.N)->required();
  est->add_option("--out", raw.out, "CSV path (stdout when absent)");

  gena->add_option("--p", raw.p)->required();
  gena->add_option("--weights", raw.weights, "weight spec")->required();
  gena->add_option("--N", raw.N)->required();
  gena->add_option("--out", raw.out, "CSV trace path");

  homog->add_option("--mean,--family", raw.family, "mean spec")->required();
  homog->add_option("--x", raw.x, "comma-separated positive values")->required();
  homog->add_option("--lam,--lambda", raw.lambda, "comma-separated weights (default all 1)");
  homog->add_option("--tol", raw.tol)->default_str("1e-10");
  homog->add_option("--out", raw.out, "CSV path (stdout when absent)");

  std::vector<const char*> argv{"hardy"};
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    throw HelpRequested{subs.empty() ? app.help() : subs.front()->help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  RunConfig c;
  const auto* sc = app.get_subcommands().front();
  const std::map<std::string, Command> names{
      {"constant", Command::Constant}, {"solve", Command::Solve},   {"verify", Command::Verify},
      {"est", Command::Est},           {"gena", Command::GenA},     {"sweep", Command::Sweep},
      {"homogenize", Command::Homogenize}};
  c.command = names.at(sc->get_name());

  if (!raw.family.empty()) {
    c.mean = parse_mean(raw.family);
    c.mean_text = describe(*c.mean);
  }
  if (!raw.weights.empty()) {
    c.weights = parse_weights(raw.weights);
    c.weights_text = c.weights->canonical();
  }
  c.method = raw.method;
  c.format = raw.format;
  c.constant = raw.constant;
  c.out = raw.out;
  c.witness = raw.witness;
  if (!raw.tol.empty()) {
    c.tol = parse_real(raw.tol, "--tol");
    if (!(c.tol > 0.0)) {
      throw UsageError("--tol must be positive");
    }
  } else if (c.command == Command::Homogenize) {
    c.tol = 1e-10;
  }

  switch (c.command) {
    case Command::Constant:
    case Command::Solve:
      if (raw.eta.empty() && !c.weights) {
        throw UsageError("--eta is required (or --weights to derive it)");
      }
      if (!raw.eta.empty()) {
        c.eta = {check_eta(parse_real(raw.eta, "--eta"), "--eta")};
      }
      break;
    case Command::Sweep:
      c.eta = parse_grid(raw.eta, "--eta");
      for (double e : c.eta) {
        check_eta(e, "--eta");
      }
      break;
    case Command::Verify:
      c.N = raw.N.empty() ? 50 : parse_count(raw.N, "--N");
      c.trials = parse_count(raw.trials, "--trials");
      c.seed = static_cast<std::uint64_t>(parse_count(raw.seed, "--seed"));
      if (c.constant != "auto") {
        const double v = parse_real(c.constant, "--constant");
        if (!(v > 0.0)) {
          throw UsageError("--constant must be positive or auto");
        }
      }
      break;
    case Command::Est:
      c.N = parse_count(raw.N, "--N");
      c.y = parse_real(raw.y, "--y");
      if (!(c.y > 0.0) || !std::isfinite(c.y)) {
        throw UsageError("--y must be positive");
      }
      break;
    case Command::GenA:
      c.N = parse_count(raw.N, "--N");
      c.p = parse_real(raw.p, "--p");
      if (!(c.p < 1.0)) {
        throw UsageError("--p must be below 1");
      }
      break;
    case Command::Homogenize:
      c.x = parse_list(raw.x, "--x");
      if (!raw.lambda.empty()) {
        c.lambda = parse_list(raw.lambda, "--lam");
        if (c.lambda.size() != c.x.size()) {
          throw UsageError("--lam must have as many entries as --x");
        }
      }
      break;
  }
  if ((c.command == Command::Est || c.command == Command::GenA || c.command == Command::Verify) &&
      c.N == 0) {
    throw UsageError("--N must be at least 1");
  }
  return c;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    switch (config.command) {
      case Command::Constant:
        return cmd_constant(config, out);
      case Command::Solve:
        return cmd_solve(config, out);
      case Command::Verify:
        return cmd_verify(config, out);
      case Command::Est:
        return cmd_est(config, out);
      case Command::GenA:
        return cmd_gena(config, out);
      case Command::Sweep:
        return cmd_sweep(config, out);
      case Command::Homogenize:
        return cmd_homogenize(config, out);
    }
  } catch (const UsageError& e) {
    err << Json{{"error", std::string(e.name())}, {"message", e.what()}}.dump() << '\n';
    return 2;
  } catch (const Error& e) {
    err << Json{{"error", std::string(e.name())}, {"message", e.what()}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << Json{{"error", "InternalError"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 1;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = parse_args(args);
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const Error& e) {
    err << Json{{"error", std::string(e.name())}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }
  return run(config, out, err);
}

}  // namespace hardy::cli
