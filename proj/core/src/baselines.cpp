// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include "agc/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "agc/error.hpp"

namespace agc {
namespace {

struct NamedKind {
  std::string_view name;
  SchemeKind kind;
};

constexpr NamedKind kKinds[] = {
    {"ideal_sgd", SchemeKind::kIdealSgd}, {"is_sgd", SchemeKind::kIsSgd},
    {"bgc", SchemeKind::kBgc},           {"sgc", SchemeKind::kSgc},
    {"osgc_equalbits", SchemeKind::kOsgcEqualBits}, {"proposed", SchemeKind::kProposed},
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Fills alpha, targets and decoders from physical coefficients.
CodeDesign from_encoding(const Profiles& profiles, SparseRows encoding,
                         std::vector<double> decoder) {
  CodeDesign d;
  d.k = encoding.rows();
  d.n = encoding.cols();
  d.p = probabilities(profiles);
  d.decoder = std::move(decoder);
  d.effective_decoder.resize(d.k);
  d.targets.resize(d.k);
  d.alpha = SparseRows(d.k, d.n);
  for (std::size_t i = 0; i < d.k; ++i) {
    d.effective_decoder[i] = (1.0 - d.p[i]) * d.decoder[i];
    for (const auto& e : encoding.row(i)) d.alpha.push(i, e.col, d.effective_decoder[i] * e.value);
    d.targets[i] = d.alpha.row_sum(i);
  }
  d.encoding = std::move(encoding);
  return d;
}

void check_workers(const Profiles& profiles, std::size_t n) {
  if (profiles.empty()) throw Error(ErrorKind::kInvalidInput, "no workers");
  if (n == 0) throw Error(ErrorKind::kInvalidInput, "no partitions");
}

}  // namespace

SchemeSpec SchemeSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string head = lower(text.substr(0, colon));
  if (head == "ehd" || head == "od") {
    throw Error(ErrorKind::kConfig,
                "scheme '" + head + "' is not implemented; choose one of ideal_sgd, is_sgd, "
                "bgc, sgc, osgc_equalbits, proposed");
  }
  SchemeSpec spec;
  const auto* it = std::find_if(std::begin(kKinds), std::end(kKinds),
                                [&](const NamedKind& nk) { return nk.name == head; });
  if (it == std::end(kKinds)) throw Error(ErrorKind::kConfig, "unknown scheme '" + head + "'");
  spec.kind = it->kind;
  if (colon == std::string_view::npos) return spec;

  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || lower(item.substr(0, eq)) != "d") {
      throw Error(ErrorKind::kConfig, "unknown scheme parameter '" + std::string(item) + "'");
    }
    const std::string_view value = item.substr(eq + 1);
    double d = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), d);
    if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(d)) {
      throw Error(ErrorKind::kConfig, "bad value for d: '" + std::string(value) + "'");
    }
    if (spec.kind != SchemeKind::kBgc && spec.kind != SchemeKind::kSgc) {
      throw Error(ErrorKind::kConfig, "scheme '" + head + "' takes no parameters");
    }
    spec.d = d;
  }
  return spec;
}

std::string SchemeSpec::name() const {
  for (const auto& nk : kKinds) {
    if (nk.kind != kind) continue;
    std::string out(nk.name);
    if (kind == SchemeKind::kBgc || kind == SchemeKind::kSgc) {
      char buf[32];
      std::snprintf(buf, sizeof buf, ":d=%g", d);
      out += buf;
    }
    return out;
  }
  return "unknown";
}

void SchemeSpec::validate(std::size_t k) const {
  const auto kk = static_cast<double>(k);
  if (kind == SchemeKind::kBgc && !(d > 0.0 && d <= kk)) {
    throw Error(ErrorKind::kConfig, "bgc requires 0 < d/k <= 1");
  }
  if (kind == SchemeKind::kSgc && !(d >= 1.0 && d <= kk && d == std::floor(d))) {
    throw Error(ErrorKind::kConfig, "sgc requires an integer d in [1, k]");
  }
}

bool SchemeSpec::quantized() const {
  return kind == SchemeKind::kOsgcEqualBits || kind == SchemeKind::kProposed;
}

CodeDesign issgd_design(const Profiles& profiles, std::size_t n) {
  check_workers(profiles, n);
  const std::size_t k = profiles.size();
  if (k > n) throw Error(ErrorKind::kInfeasible, "is_sgd needs k <= n");
  SparseRows a(k, n);
  for (std::size_t j = 0; j < n; ++j) a.push(((j + 1) * k + n - 1) / n - 1, j, 1.0);
  return from_encoding(profiles, std::move(a), std::vector<double>(k, 1.0));
}

CodeDesign bgc_design(const Profiles& profiles, std::size_t n, double d, Rng& rng) {
  check_workers(profiles, n);
  const std::size_t k = profiles.size();
  const double rate = d / static_cast<double>(k);
  if (!(rate > 0.0 && rate <= 1.0)) throw Error(ErrorKind::kInvalidInput, "bgc requires 0 < d/k <= 1");
  SparseRows a(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (rng.uniform() < rate) a.push(i, j, 1.0);
    }
  }
  return from_encoding(profiles, std::move(a), std::vector<double>(k, 1.0));
}

CodeDesign sgc_design(const Profiles& profiles, std::size_t n, std::span<const int> copies) {
  check_workers(profiles, n);
  const std::size_t k = profiles.size();
  if (copies.size() != n) throw Error(ErrorKind::kInvalidInput, "one replication count per partition");
  std::vector<std::vector<SparseEntry>> rows(k);
  for (std::size_t j = 0; j < n; ++j) {
    const int dj = copies[j];
    if (dj < 1) throw Error(ErrorKind::kInvalidInput, "replication counts must be >= 1");
    if (static_cast<std::size_t>(dj) > k) throw Error(ErrorKind::kInfeasible, "replication exceeds k");
    for (int t = 0; t < dj; ++t) {
      const std::size_t i = (j + static_cast<std::size_t>(t)) % k;
      rows[i].push_back({j, 1.0 / (dj * (1.0 - profiles[i].p()))});
    }
  }
  SparseRows a(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    for (const auto& e : rows[i]) a.push(i, e.col, e.value);
  }
  return from_encoding(profiles, std::move(a), std::vector<double>(k, 1.0));
}

CodeDesign sgc_design(const Profiles& profiles, std::size_t n, int d) {
  return sgc_design(profiles, n, std::vector<int>(n, d));
}

std::vector<int> equal_bit_widths(const Profiles& profiles, int z_tot) {
  const auto k = static_cast<int>(profiles.size());
  if (k == 0) throw Error(ErrorKind::kInvalidInput, "no workers");
  if (z_tot < 2 * k) throw Error(ErrorKind::kInfeasibleBudget, "Z_tot must be at least 2k");
  std::vector<int> z(profiles.size(), z_tot / k);
  std::vector<std::size_t> order(profiles.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return profiles[a].p() < profiles[b].p();
  });
  for (int t = 0; t < z_tot % k; ++t) ++z[order[static_cast<std::size_t>(t)]];
  return z;
}

QuantizedDesign osgc_equalbits_design(const Profiles& profiles, std::size_t n, int z_tot,
                                      Rng& rng) {
  check_workers(profiles, n);
  QuantizedDesign out;
  out.bit_widths = equal_bit_widths(profiles, z_tot);
  const auto p = probabilities(profiles);
  const std::vector<double> zero_phi(p.size(), 0.0);
  const auto c = cost_coeffs(p, zero_phi, 1.0);
  out.design = realize_code(segment_construction(target_masses(c, n), n), profiles, c, rng);
  return out;
}

QuantizedDesign proposed_design(const Profiles& profiles, std::size_t n, int z_tot,
                                std::size_t dim, double eta, Rng& rng) {
  check_workers(profiles, n);
  const auto k = static_cast<int>(profiles.size());
  if (z_tot < 2 * k) throw Error(ErrorKind::kInfeasibleBudget, "Z_tot must be at least 2k");
  QuantizedDesign out;
  const auto p = probabilities(profiles);
  out.bit_widths = proposed_allocate(p, dim, z_tot - 2 * k).bit_widths();
  out.design = optimal_design(profiles, out.bit_widths, dim, n, eta, rng);
  return out;
}

std::vector<double> expected_bias(const CodeDesign& design, std::span<const double> grads,
                                  std::size_t dim) {
  if (grads.size() != design.n * dim) throw Error(ErrorKind::kInvalidInput, "gradient shape mismatch");
  std::vector<double> col(design.n, -1.0);
  for (std::size_t i = 0; i < design.k; ++i) {
    const double scale = (1.0 - design.p[i]) * design.decoder[i];
    for (const auto& e : design.encoding.row(i)) col[e.col] += scale * e.value;
  }
  std::vector<double> bias(dim, 0.0);
  for (std::size_t j = 0; j < design.n; ++j) {
    for (std::size_t t = 0; t < dim; ++t) bias[t] += col[j] * grads[j * dim + t];
  }
  return bias;
}

}  // namespace agc
