// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include "agc_cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "agc/error.hpp"

namespace agc::cli {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '.' || c == '-';
  });
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::string> split_items(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text, const std::string& source) {
  ConfigFile cfg;
  cfg.source_ = source;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::kConfig, where + "unterminated section header");
      const auto name = trim(line.substr(1, line.size() - 2));
      if (!valid_name(name)) throw Error(ErrorKind::kConfig, where + "bad section name");
      section = std::string(name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::kConfig, where + "expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!valid_name(key)) throw Error(ErrorKind::kConfig, where + "bad key '" + std::string(key) + "'");
    if (value.empty()) throw Error(ErrorKind::kConfig, where + "empty value for '" + std::string(key) + "'");
    const auto [it, inserted] =
        cfg.entries_.emplace(std::pair{section, std::string(key)}, Entry{std::string(value), line_no});
    if (!inserted) {
      throw Error(ErrorKind::kConfig, where + "duplicate key '" + std::string(key) +
                                          "' (first set on line " + std::to_string(it->second.line) + ")");
    }
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section, const std::string& key) const {
  const auto it = entries_.find({section, key});
  return it == entries_.end() ? nullptr : &it->second;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

void ConfigFile::fail(const Entry& e, const std::string& what) const {
  throw Error(ErrorKind::kConfig, source_ + ":" + std::to_string(e.line) + ": " + what);
}

std::optional<std::string> ConfigFile::str(const std::string& section, const std::string& key) const {
  const auto* e = find(section, key);
  if (e == nullptr) return std::nullopt;
  return e->value;
}

std::optional<double> ConfigFile::real(const std::string& section, const std::string& key) const {
  const auto* e = find(section, key);
  if (e == nullptr) return std::nullopt;
  double v = 0.0;
  if (!parse_number(e->value, v) || !std::isfinite(v)) fail(*e, "'" + key + "' must be a finite number");
  return v;
}

std::optional<std::int64_t> ConfigFile::integer(const std::string& section, const std::string& key) const {
  const auto* e = find(section, key);
  if (e == nullptr) return std::nullopt;
  std::int64_t v = 0;
  if (!parse_number(e->value, v)) fail(*e, "'" + key + "' must be an integer");
  return v;
}

std::optional<std::uint64_t> ConfigFile::u64(const std::string& section, const std::string& key) const {
  const auto* e = find(section, key);
  if (e == nullptr) return std::nullopt;
  std::uint64_t v = 0;
  if (!parse_number(e->value, v)) fail(*e, "'" + key + "' must be a nonnegative integer");
  return v;
}

std::optional<std::vector<std::string>> ConfigFile::list(const std::string& section,
                                                         const std::string& key) const {
  const auto* e = find(section, key);
  if (e == nullptr) return std::nullopt;
  return split_items(e->value);
}

std::optional<std::vector<double>> ConfigFile::reals(const std::string& section,
                                                     const std::string& key) const {
  const auto* e = find(section, key);
  if (e == nullptr) return std::nullopt;
  std::vector<double> out;
  for (const auto& item : split_items(e->value)) {
    double v = 0.0;
    if (!parse_number(std::string_view(item), v) || !std::isfinite(v)) {
      fail(*e, "'" + key + "': '" + item + "' is not a finite number");
    }
    out.push_back(v);
  }
  return out;
}

std::optional<std::vector<int>> ConfigFile::ints(const std::string& section, const std::string& key) const {
  const auto* e = find(section, key);
  if (e == nullptr) return std::nullopt;
  std::vector<int> out;
  for (const auto& item : split_items(e->value)) {
    int v = 0;
    if (!parse_number(std::string_view(item), v)) fail(*e, "'" + key + "': '" + item + "' is not an integer");
    out.push_back(v);
  }
  return out;
}

void ConfigFile::require_known(const std::map<std::string, std::vector<std::string>>& known) const {
  for (const auto& [name, entry] : entries_) {
    const auto& [section, key] = name;
    const auto it = known.find(section);
    if (it == known.end()) {
      fail(entry, "unknown section '[" + section + "]'");
    }
    if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
      fail(entry, "unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"));
    }
  }
}

}  // namespace agc::cli
