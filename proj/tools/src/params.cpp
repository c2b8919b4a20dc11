#include "params.hpp"

#include <fmt/format.h>

#include <cmath>

namespace molsim::cli {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

}  // namespace

ParamReader::ParamReader(const Json& params, std::string prefix)
    : params_(params), prefix_(std::move(prefix)) {
  if (!params_.is_object()) throw ConfigError(prefix_, "must be an object");
}

bool ParamReader::has(const std::string& key) const { return params_.contains(key); }

void ParamReader::fail(const std::string& key, const std::string& message) const {
  throw ConfigError(path(key), message);
}

const Json* ParamReader::lookup(const std::string& key) {
  used_.insert(key);
  auto it = params_.find(key);
  if (it == params_.end() || it->is_null()) return nullptr;
  return &*it;
}

double ParamReader::number(const std::string& key, double fallback) {
  double v = fallback;
  if (const Json* j = lookup(key)) {
    if (!j->is_number()) fail(key, "expected a number");
    v = j->get<double>();
    if (!std::isfinite(v)) fail(key, "must be finite");
  }
  resolved_[key] = v;
  return v;
}

double ParamReader::positive(const std::string& key, double fallback) {
  const double v = number(key, fallback);
  if (!(v > 0.0)) fail(key, "must be > 0");
  return v;
}

double ParamReader::non_negative(const std::string& key, double fallback) {
  const double v = number(key, fallback);
  if (v < 0.0) fail(key, "must be >= 0");
  return v;
}

std::optional<double> ParamReader::optional_number(const std::string& key) {
  const Json* j = lookup(key);
  if (!j) return std::nullopt;
  if (!j->is_number() || !std::isfinite(j->get<double>())) fail(key, "expected a finite number");
  resolved_[key] = j->get<double>();
  return j->get<double>();
}

int ParamReader::integer(const std::string& key, int fallback, int lo, int hi) {
  int v = fallback;
  if (const Json* j = lookup(key)) {
    if (!j->is_number_integer()) fail(key, "expected an integer");
    const auto raw = j->get<long long>();
    if (raw < lo || raw > hi) fail(key, fmt::format("must be in [{}, {}]", lo, hi));
    v = static_cast<int>(raw);
  }
  resolved_[key] = v;
  return v;
}

bool ParamReader::flag(const std::string& key, bool fallback) {
  bool v = fallback;
  if (const Json* j = lookup(key)) {
    if (!j->is_boolean()) fail(key, "expected true or false");
    v = j->get<bool>();
  }
  resolved_[key] = v;
  return v;
}

std::string ParamReader::choice(const std::string& key, const std::string& fallback,
                                const std::vector<std::string>& allowed) {
  std::string v = fallback;
  if (const Json* j = lookup(key)) {
    if (!j->is_string()) fail(key, "expected a string");
    v = j->get<std::string>();
  }
  bool ok = false;
  for (const auto& a : allowed) ok = ok || a == v;
  if (!ok) fail(key, fmt::format("'{}' is not one of: {}", v, join(allowed)));
  resolved_[key] = v;
  return v;
}

std::vector<double> ParamReader::numbers(const std::string& key,
                                         const std::vector<double>& fallback) {
  std::vector<double> out = fallback;
  if (const Json* j = lookup(key)) {
    out.clear();
    if (j->is_number()) {
      out.push_back(j->get<double>());
    } else if (j->is_array()) {
      for (const auto& e : *j) {
        if (!e.is_number()) fail(key, "expected an array of numbers");
        out.push_back(e.get<double>());
      }
    } else {
      fail(key, "expected a number or an array of numbers");
    }
  }
  if (out.empty()) fail(key, "must not be empty");
  for (double v : out) {
    if (!std::isfinite(v)) fail(key, "values must be finite");
  }
  resolved_[key] = out;
  return out;
}

std::vector<double> ParamReader::grid(const std::string& key, const Json& fallback) {
  const Json* j = lookup(key);
  const Json& spec = j ? *j : fallback;
  std::vector<double> out;
  if (spec.is_array()) {
    for (const auto& e : spec) {
      if (!e.is_number()) fail(key, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
  } else if (spec.is_object()) {
    for (const auto& [k, v] : spec.items()) {
      if (k != "from" && k != "to" && k != "points" && k != "log") {
        fail(key + "." + k, "unknown key");
      }
    }
    if (!spec.contains("from") || !spec["from"].is_number()) fail(key + ".from", "expected a number");
    if (!spec.contains("to") || !spec["to"].is_number()) fail(key + ".to", "expected a number");
    if (!spec.contains("points") || !spec["points"].is_number_integer()) {
      fail(key + ".points", "expected an integer");
    }
    const bool log = spec.contains("log") && spec["log"].is_boolean() && spec["log"].get<bool>();
    if (spec.contains("log") && !spec["log"].is_boolean()) fail(key + ".log", "expected true or false");
    const double from = spec["from"].get<double>();
    const double to = spec["to"].get<double>();
    const auto points = spec["points"].get<long long>();
    if (points < 1 || points > 100000) fail(key + ".points", "must be in [1, 100000]");
    if (log && !(from > 0.0 && to > 0.0)) fail(key, "log grid needs positive bounds");
    for (long long i = 0; i < points; ++i) {
      const double s = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
      out.push_back(log ? std::pow(10.0, std::log10(from) + s * (std::log10(to) - std::log10(from)))
                        : from + s * (to - from));
    }
  } else {
    fail(key, "expected an array of numbers or a {from, to, points} range");
  }
  if (out.empty()) fail(key, "grid is empty");
  for (double v : out) {
    if (!std::isfinite(v)) fail(key, "values must be finite");
  }
  resolved_[key] = spec;
  return out;
}

std::vector<int> ParamReader::integers(const std::string& key, const std::vector<int>& fallback,
                                       int lo, int hi) {
  std::vector<int> out = fallback;
  if (const Json* j = lookup(key)) {
    out.clear();
    auto take = [&](const Json& e) {
      if (!e.is_number_integer()) fail(key, "expected integers");
      const auto v = e.get<long long>();
      if (v < lo || v > hi) fail(key, fmt::format("values must be in [{}, {}]", lo, hi));
      out.push_back(static_cast<int>(v));
    };
    if (j->is_array()) {
      for (const auto& e : *j) take(e);
    } else {
      take(*j);
    }
  }
  if (out.empty()) fail(key, "must not be empty");
  resolved_[key] = out;
  return out;
}

std::vector<std::string> ParamReader::choices(const std::string& key,
                                              const std::vector<std::string>& fallback,
                                              const std::vector<std::string>& allowed) {
  std::vector<std::string> out = fallback;
  if (const Json* j = lookup(key)) {
    out.clear();
    auto take = [&](const Json& e) {
      if (!e.is_string()) fail(key, "expected strings");
      out.push_back(e.get<std::string>());
    };
    if (j->is_array()) {
      for (const auto& e : *j) take(e);
    } else {
      take(*j);
    }
  }
  if (out.empty()) fail(key, "must not be empty");
  for (const auto& v : out) {
    bool ok = false;
    for (const auto& a : allowed) ok = ok || a == v;
    if (!ok) fail(key, fmt::format("'{}' is not one of: {}", v, join(allowed)));
  }
  resolved_[key] = out;
  return out;
}

void ParamReader::finish() const {
  for (const auto& [key, value] : params_.items()) {
    if (!used_.contains(key)) fail(key, "unknown key");
  }
}

}  // namespace molsim::cli
