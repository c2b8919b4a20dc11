#pragma once

#include "config.hpp"

#include <set>
#include <string>
#include <vector>

namespace molsim::cli {

/// Typed access to a params object. Every key read is recorded together with
/// the value actually used (defaults included), and finish() rejects keys
/// nobody asked for.
class ParamReader {
 public:
  explicit ParamReader(const Json& params, std::string prefix = "params");

  bool has(const std::string& key) const;

  double number(const std::string& key, double fallback);
  double positive(const std::string& key, double fallback);
  double non_negative(const std::string& key, double fallback);
  std::optional<double> optional_number(const std::string& key);
  int integer(const std::string& key, int fallback, int lo, int hi);
  bool flag(const std::string& key, bool fallback);
  std::string choice(const std::string& key, const std::string& fallback,
                     const std::vector<std::string>& allowed);
  /// A number, or an array of numbers; never empty.
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
  /// An explicit array, or {"from", "to", "points", "log"}; log grids are
  /// spaced in log10 between from and to. Never empty.
  std::vector<double> grid(const std::string& key, const Json& fallback);
  std::vector<int> integers(const std::string& key, const std::vector<int>& fallback, int lo,
                            int hi);
  std::vector<std::string> choices(const std::string& key,
                                   const std::vector<std::string>& fallback,
                                   const std::vector<std::string>& allowed);

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

  /// Throws on unread keys.
  void finish() const;
  /// Effective parameters, in reading order.
  const Json& resolved() const { return resolved_; }

 private:
  const Json* lookup(const std::string& key);
  std::string path(const std::string& key) const { return prefix_ + "." + key; }

  const Json& params_;
  std::string prefix_;
  std::set<std::string> used_;
  Json resolved_ = Json::object();
};

}  // namespace molsim::cli
