#include "hardy/specs.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <string>

#include "hardy/errors.hpp"

namespace hardy {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) {
      break;
    }
    start = pos + 1;
  }
  return out;
}

// "name:k=v,k=v" -> (name, {k: v}). Values may themselves contain ':' but
// not ','; callers that need commas in a value parse the tail themselves.
struct Tagged {
  std::string_view name;
  std::string_view rest;
};

Tagged tag(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    return {text, {}};
  }
  return {text.substr(0, colon), text.substr(colon + 1)};
}

std::map<std::string, std::string, std::less<>> keyvals(std::string_view rest,
                                                        std::string_view spec) {
  std::map<std::string, std::string, std::less<>> out;
  if (rest.empty()) {
    return out;
  }
  for (auto part : split(rest, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("expected key=value in '" + std::string(spec) + "', got '" +
                       std::string(part) + "'");
    }
    out.emplace(std::string(trim(part.substr(0, eq))), std::string(trim(part.substr(eq + 1))));
  }
  return out;
}

const std::string& need(const std::map<std::string, std::string, std::less<>>& kv,
                        std::string_view key, std::string_view spec) {
  const auto it = kv.find(key);
  if (it == kv.end()) {
    throw UsageError("'" + std::string(spec) + "' is missing " + std::string(key) + "=");
  }
  return it->second;
}

void only(const std::map<std::string, std::string, std::less<>>& kv,
          std::initializer_list<std::string_view> allowed, std::string_view spec) {
  for (const auto& [k, v] : kv) {
    bool ok = false;
    for (auto a : allowed) {
      ok = ok || k == a;
    }
    if (!ok) {
      throw UsageError("unknown key '" + k + "' in '" + std::string(spec) + "'");
    }
  }
}

GeneratorFunction parse_f(std::string_view text, std::string_view spec) {
  const auto [name, rest] = tag(text);
  if (name == "log" && rest.empty()) {
    return log_generator();
  }
  if (name == "pow") {
    return power_generator(parse_real(rest, spec));
  }
  if (name == "gini") {
    const auto parts = split(rest, ',');
    if (parts.size() != 2) {
      throw UsageError("devmean gini needs two parameters in '" + std::string(spec) + "'");
    }
    return gini_generator(parse_real(parts[0], spec), parse_real(parts[1], spec));
  }
  throw UsageError("unknown deviation function '" + std::string(text) + "' in '" +
                   std::string(spec) + "'");
}

GeneratorFunction parse_g(std::string_view text, std::string_view spec) {
  const auto [name, rest] = tag(text);
  if (name == "log" && rest.empty()) {
    return pi_generator(0.0);
  }
  if (name == "exp" && rest.empty()) {
    return exp_generator();
  }
  if (name == "pow") {
    const double p = parse_real(rest, spec);
    if (!std::isfinite(p)) {
      throw UsageError("qa generator exponent must be finite in '" + std::string(spec) + "'");
    }
    return pi_generator(p);
  }
  throw UsageError("unknown quasiarithmetic generator '" + std::string(text) + "' in '" +
                   std::string(spec) + "'");
}

}  // namespace

double parse_real(std::string_view text, std::string_view what) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') {
    text.remove_prefix(1);
  }
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (text.empty() || r.ec != std::errc{} || r.ptr != end || std::isnan(v)) {
    throw UsageError("invalid number '" + std::string(text) + "' for " + std::string(what));
  }
  return v;
}

std::size_t parse_count(std::string_view text, std::string_view what) {
  const double v = parse_real(text, what);
  if (!(v >= 0.0) || !std::isfinite(v) || v != std::floor(v) || v > 9.0e15) {
    throw UsageError("invalid count '" + std::string(trim(text)) + "' for " + std::string(what));
  }
  return static_cast<std::size_t>(v);
}

std::vector<double> parse_list(std::string_view text, std::string_view what) {
  std::vector<double> out;
  for (auto part : split(text, ',')) {
    out.push_back(parse_real(part, what));
  }
  return out;
}

std::vector<double> parse_grid(std::string_view text, std::string_view what) {
  const auto parts = split(trim(text), ':');
  if (parts.size() == 1) {
    return {parse_real(parts[0], what)};
  }
  if (parts.size() != 3) {
    throw UsageError("grid for " + std::string(what) + " must be start:stop:step, got '" +
                     std::string(text) + "'");
  }
  const double a = parse_real(parts[0], what);
  const double b = parse_real(parts[1], what);
  const double h = parse_real(parts[2], what);
  if (!(h > 0.0) || !(b >= a) || !std::isfinite(a) || !std::isfinite(b)) {
    throw UsageError("grid for " + std::string(what) + " needs start <= stop and step > 0");
  }
  const auto count = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9)) + 1;
  if (count > 1'000'000) {
    throw UsageError("grid for " + std::string(what) + " is too large");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    // Round to the decimal grid so 0.1 * 3 prints as 0.3.
    const double v = a + h * static_cast<double>(i);
    out.push_back(std::round(v * 1e12) / 1e12);
  }
  return out;
}

MeanSpec parse_mean(std::string_view text) {
  const auto [name, rest] = tag(text);
  try {
    if (name == "power") {
      const auto kv = keyvals(rest, text);
      only(kv, {"p"}, text);
      return mean::Power{parse_real(need(kv, "p", text), text)};
    }
    if (name == "gini") {
      const auto kv = keyvals(rest, text);
      only(kv, {"p", "q"}, text);
      const double p = parse_real(need(kv, "p", text), text);
      const double q = parse_real(need(kv, "q", text), text);
      if (!std::isfinite(p) || !std::isfinite(q)) {
        throw UsageError("gini parameters must be finite in '" + std::string(text) + "'");
      }
      return mean::Gini{p, q};
    }
    if (name == "qa" || name == "devmean") {
      const auto eq = rest.find('=');
      const auto key = trim(rest.substr(0, eq));
      const std::string_view want = name == "qa" ? "g" : "f";
      if (eq == std::string_view::npos || key != want) {
        throw UsageError("'" + std::string(text) + "' needs " + std::string(want) + "=");
      }
      const auto value = rest.substr(eq + 1);
      if (name == "qa") {
        return mean::QuasiArithmetic{parse_g(value, text)};
      }
      return mean::HomogeneousDeviation{parse_f(value, text)};
    }
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError("invalid mean '" + std::string(text) + "': " + e.what());
  }
  throw UsageError("unknown mean family '" + std::string(name) + "' in '" + std::string(text) +
                   "' (expected power, gini, qa or devmean)");
}

WeightSequence parse_weights(std::string_view text) {
  const auto [name, rest] = tag(text);
  try {
    if (name == "ones" && rest.empty()) {
      return WeightSequence::ones();
    }
    if (name == "geometric") {
      const auto kv = keyvals(rest, text);
      only(kv, {"a"}, text);
      return WeightSequence::geometric(parse_real(need(kv, "a", text), text));
    }
    if (name == "powerlaw") {
      const auto kv = keyvals(rest, text);
      only(kv, {"alpha"}, text);
      return WeightSequence::power_law(parse_real(need(kv, "alpha", text), text));
    }
    if (name == "explicit") {
      const auto kv = keyvals(rest, text);
      only(kv, {"file", "values", "tail"}, text);
      auto tail = WeightSequence::TailRule::RepeatLast;
      if (const auto it = kv.find("tail"); it != kv.end()) {
        if (it->second == "zero") {
          tail = WeightSequence::TailRule::Zero;
        } else if (it->second != "repeat") {
          throw UsageError("tail must be zero or repeat in '" + std::string(text) + "'");
        }
      }
      if (kv.contains("file") == kv.contains("values")) {
        throw UsageError("'" + std::string(text) + "' needs exactly one of file= or values=");
      }
      if (const auto it = kv.find("file"); it != kv.end()) {
        return WeightSequence::from_file(it->second, tail);
      }
      std::vector<double> values;
      for (auto part : split(kv.find("values")->second, '/')) {
        values.push_back(parse_real(part, text));
      }
      return WeightSequence::explicit_list(std::move(values), tail);
    }
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError("invalid weights '" + std::string(text) + "': " + e.what());
  }
  throw UsageError("unknown weight sequence '" + std::string(text) +
                   "' (expected ones, geometric, powerlaw or explicit)");
}

}  // namespace hardy
