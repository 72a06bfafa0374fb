// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agc::cli {

// Flat sectioned text:
//
//   # comment
//   scenario = demo
//   [workers]
//   k = 10
//
// Keys before the first header live in section "". Every error carries the
// source name and line number.
class ConfigFile {
 public:
  static ConfigFile parse(std::string_view text, const std::string& source = "<config>");
  static ConfigFile load(const std::string& path);

  bool empty() const { return entries_.empty(); }
  bool has(const std::string& section, const std::string& key) const;

  std::optional<std::string> str(const std::string& section, const std::string& key) const;
  std::optional<double> real(const std::string& section, const std::string& key) const;
  std::optional<std::int64_t> integer(const std::string& section, const std::string& key) const;
  std::optional<std::uint64_t> u64(const std::string& section, const std::string& key) const;
  /// Comma- or whitespace-separated items.
  std::optional<std::vector<std::string>> list(const std::string& section,
                                               const std::string& key) const;
  std::optional<std::vector<double>> reals(const std::string& section, const std::string& key) const;
  std::optional<std::vector<int>> ints(const std::string& section, const std::string& key) const;

  /// Throws for any key outside `known` (section -> keys).
  void require_known(const std::map<std::string, std::vector<std::string>>& known) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  const Entry* find(const std::string& section, const std::string& key) const;
  [[noreturn]] void fail(const Entry& e, const std::string& what) const;

  std::string source_;
  std::map<std::pair<std::string, std::string>, Entry> entries_;
};

}  // namespace agc::cli
