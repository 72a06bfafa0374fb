// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include "agc/bit_alloc.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "agc/error.hpp"

namespace agc {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kBisectionSteps = 60;
// Past this many residual bits phi(r + 2) is below 1e-290 and h is flat.
constexpr double kContinuousCap = 960.0;

void check_budget(int z_res) {
  if (z_res < 0) throw Error(ErrorKind::kInfeasibleBudget, "residual budget must be >= 0");
}

void check_probabilities(std::span<const double> p) {
  for (double v : p) {
    if (!(v >= 0.0) || !(v < 1.0)) {
      throw Error(ErrorKind::kDegenerateWorker, "straggler probabilities must lie in [0, 1)");
    }
  }
}

// Continuous extension of h in r through x = 2^(r+1) - 1:
//   h(x)  = (1 - p) 4x^2 / (4p x^2 + l)
//   dh/dr = K (1 + 1/x) / (4p x + l/x)^2,  K = 8 l ln2 (1 - p).
// The slope is unimodal in x; only its decreasing branch right of the peak
// matters for the water level.
class Marginal {
 public:
  Marginal(double p, double dim, double budget)
      : p_(p), l_(dim), k_(8.0 * dim * std::numbers::ln2 * (1.0 - p)),
        budget_(budget), x_top_(std::exp2(std::min(budget, kContinuousCap) + 1.0) - 1.0) {
    x_peak_ = p_ > 0.0 ? std::clamp(peak_x(), 1.0, x_top_) : x_top_;
    guess_ = x_peak_;
  }

  double slope_x(double x) const {
    if (p_ == 0.0) return k_ * x * (x + 1.0) / (l_ * l_);
    const double d = 4.0 * p_ * x + l_ / x;
    return k_ * (1.0 + 1.0 / x) / (d * d);
  }

  double top_slope() const { return slope_x(x_top_); }
  double peak_slope() const { return slope_x(x_peak_); }

  // d level / d log(lambda) at a level returned by level_x; zero when the
  // level is pinned at 0 or at the budget.
  double level_rate(double x) const {
    if (!(x > x_peak_ && x < x_top_) || x <= 1.0) return 0.0;
    const double d = 4.0 * p_ * x + l_ / x;
    const double dlog_slope = -1.0 / (x * (x + 1.0)) - 2.0 * (4.0 * p_ - l_ / (x * x)) / d;
    return 1.0 / ((x + 1.0) * std::numbers::ln2 * dlog_slope);
  }

  static double to_level(double x) { return std::log2(x + 1.0) - 1.0; }

  // sup { r in [0, budget] : dh/dr >= lambda } in x coordinates, or x = 1
  // (r = 0) when empty.
  double level_x(double lambda) {
    if (budget_ <= 0.0) return 1.0;
    if (slope_x(x_top_) >= lambda) return x_top_;
    if (slope_x(x_peak_) < lambda) return 1.0;
    // Root of H(x) = sqrt(K (1 + 1/x) / lambda) - (4p x + l/x) on
    // [x_peak, x_top]; H >= 0 exactly where the slope is >= lambda and H is
    // nearly affine on the tail. Newton, with geometric bisection whenever a
    // step leaves the bracket.
    const double root_k = std::sqrt(k_ / lambda);
    double a = x_peak_;
    double b = x_top_;
    double x = std::clamp(guess_ > x_peak_ ? guess_ : root_k / (4.0 * p_), a, b);
    for (int it = 0; it < 100; ++it) {
      const double inv = 1.0 / x;
      const double root = std::sqrt(1.0 + inv);
      const double h = root_k * root - (4.0 * p_ * x + l_ * inv);
      if (h >= 0.0) {
        a = x;
      } else {
        b = x;
      }
      const double dh = -0.5 * root_k * inv * inv / root - (4.0 * p_ - l_ * inv * inv);
      const double step = h / dh;
      // Quadratic convergence: the error after a step this small is far
      // below rounding.
      if (std::abs(step) <= 1e-8 * x) {
        x = std::clamp(x - step, a, b);
        break;
      }
      double next = x - step;
      if (!(next > a && next < b)) next = std::sqrt(a * b);
      x = next;
      if (b - a <= 1e-14 * b) break;
    }
    guess_ = x;
    return x;
  }

 private:
  // Stationary point of x(x+1) / (4p x^2 + l)^2, the positive root of the
  // convex cubic 8p x^3 + 12p x^2 - 2l x - l; Newton from the right.
  double peak_x() const {
    double x = std::max(1.0, std::sqrt(l_ / p_));
    for (int it = 0; it < 100; ++it) {
      const double g = ((8.0 * p_ * x + 12.0 * p_) * x - 2.0 * l_) * x - l_;
      const double dg = (24.0 * p_ * x + 24.0 * p_) * x - 2.0 * l_;
      const double next = x - g / dg;
      if (!(next < x) || x - next <= 1e-15 * x) break;
      x = next;
    }
    return x;
  }

  double p_;
  double l_;
  double k_;
  double budget_;
  double x_top_;
  double x_peak_ = 1.0;
  double guess_ = 1.0;
};

// Adjusts an integer vector to the exact total with +-1 moves at the best
// marginal gain / smallest marginal loss. util(i, r) is worker i's utility.
template <class Util>
void fix_total(std::vector<int>& r, const Util& util, int budget) {
  int total = std::accumulate(r.begin(), r.end(), 0);
  while (total < budget) {
    std::size_t best = 0;
    double best_gain = kNegInf;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double g = util(i, r[i] + 1) - util(i, r[i]);
      if (g > best_gain) {
        best_gain = g;
        best = i;
      }
    }
    ++r[best];
    ++total;
  }
  while (total > budget) {
    std::size_t worst = r.size();
    double worst_loss = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i] == 0) continue;
      const double loss = util(i, r[i]) - util(i, r[i] - 1);
      if (loss < worst_loss) {
        worst_loss = loss;
        worst = i;
      }
    }
    --r[worst];
    --total;
  }
}

// Mantissa of a normal v > 0 in [1, 2); its binary exponent is added to
// exponent.
double split_exponent(double v, int& exponent) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  exponent += static_cast<int>((bits >> 52) & 0x7ff) - 1023;
  return std::bit_cast<double>((bits & 0x000fffffffffffffULL) | 0x3ff0000000000000ULL);
}

// Water level over a set of marginals: the multiplier where the continuous
// levels sum to the budget. t_floor, when finite, is a log multiplier already
// known to give a total >= budget. Buffers are reused across calls.
struct WaterFill {
  std::vector<double> level;
  double log_lambda = 0.0;
  bool ok = false;
  std::vector<double> hi;
  std::vector<double> scratch;
};

void water_fill(std::span<Marginal> marg, double b, double t_floor, WaterFill& out) {
  const std::size_t count = marg.size();
  out.ok = false;
  auto& r_lo = out.level;
  auto& r_hi = out.hi;
  auto& scratch = out.scratch;
  r_lo.resize(count);
  r_hi.resize(count);
  scratch.resize(count);
  // Sum of log2(x_i + 1) - 1 through one log2 of a renormalized product,
  // and its derivative in log(lambda).
  double rate = 0.0;
  auto total_at = [&](double log_lambda, std::vector<double>& x) {
    const double lambda = std::exp(log_lambda);
    double prod = 1.0;
    int exponent = 0;
    rate = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      x[i] = marg[i].level_x(lambda);
      rate += marg[i].level_rate(x[i]);
      prod = split_exponent(prod * (x[i] + 1.0), exponent);
    }
    return std::log2(prod) + exponent - static_cast<double>(count);
  };

  // Bracket: at the smallest end-of-budget slope the arg-min worker alone
  // takes the whole budget; just above the largest peak slope nobody gets a
  // bit.
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& m : marg) {
    lo = std::min(lo, m.top_slope());
    hi = std::max(hi, m.peak_slope());
  }
  hi = std::nextafter(hi, std::numeric_limits<double>::infinity());
  if (!(lo > 0.0) || !std::isfinite(hi)) return;
  double t_hi = std::log(hi);
  double sum_hi = total_at(t_hi, r_hi);
  double t_lo = std::max(std::log(lo), t_floor);
  double sum_lo = total_at(t_lo, r_lo);
  double rate_cur = rate;
  if (!(sum_lo >= b) || !(sum_hi <= b)) return;

  // The total is nonincreasing in lambda and smooth between the points where
  // a worker enters or saturates. Newton on log(lambda) from the last
  // evaluated point, falling back to Illinois regula falsi whenever the step
  // leaves the bracket; the bracket is kept at every step.
  double g_lo = sum_lo - b;
  double g_hi = sum_hi - b;
  double t_cur = t_lo;
  double g_cur = g_lo;
  int stale = 0;
  for (int it = 0; it < kBisectionSteps; ++it) {
    if (g_lo <= 1e-9 || -g_hi <= 1e-9 || t_hi - t_lo <= 1e-13 * std::max(1.0, std::abs(t_lo))) {
      break;
    }
    double t = rate_cur < 0.0 ? t_cur - g_cur / rate_cur : t_hi;
    if (!(t > t_lo && t < t_hi)) {
      t = t_lo + (t_hi - t_lo) * g_lo / (g_lo - g_hi);
      if (!(t > t_lo && t < t_hi)) t = 0.5 * (t_lo + t_hi);
    }
    const double s = total_at(t, scratch);
    const double g = s - b;
    t_cur = t;
    g_cur = g;
    rate_cur = rate;
    if (g >= 0.0) {
      t_lo = t;
      g_lo = g;
      sum_lo = s;
      std::swap(r_lo, scratch);
      if (stale == 1) g_hi *= 0.5;
      stale = 1;
    } else {
      t_hi = t;
      g_hi = g;
      sum_hi = s;
      std::swap(r_hi, scratch);
      if (stale == -1) g_lo *= 0.5;
      stale = -1;
    }
  }
  const bool take_lo = (sum_lo - b) <= (b - sum_hi);
  if (!take_lo) std::swap(r_lo, r_hi);
  for (double& v : out.level) v = Marginal::to_level(v);
  out.log_lambda = take_lo ? t_lo : t_hi;
  out.ok = true;
}

// Largest-remainder rounding followed by the exact-total repair.
template <class Util>
std::vector<int> round_levels(std::span<const double> level, const Util& util, int budget) {
  const std::size_t count = level.size();
  std::vector<int> r(count);
  std::vector<std::size_t> order(count);
  int floor_sum = 0;
  for (std::size_t i = 0; i < count; ++i) {
    r[i] = static_cast<int>(std::floor(level[i]));
    floor_sum += r[i];
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
    return level[a] - r[a] > level[c] - r[c];
  });
  for (std::size_t t = 0; t < count && floor_sum < budget; ++t, ++floor_sum) ++r[order[t]];
  fix_total(r, util, budget);
  return r;
}

// Steepest-ascent single-bit swaps, in place; up and down are scratch.
template <class Util>
void local_search(std::vector<int>& r, const Util& util, std::vector<double>& up,
                  std::vector<double>& down) {
  const std::size_t k = r.size();
  if (k < 2) return;
  const long total = std::accumulate(r.begin(), r.end(), 0L);
  const long cap = 10L * static_cast<long>(k) * total;
  up.resize(k);
  down.resize(k);
  auto refresh = [&](std::size_t i) {
    const double here = util(i, r[i]);
    up[i] = util(i, r[i] + 1) - here;
    down[i] = r[i] > 0 ? here - util(i, r[i] - 1) : std::numeric_limits<double>::infinity();
  };
  for (std::size_t i = 0; i < k; ++i) refresh(i);

  for (long round = 0; round < cap; ++round) {
    // Best swap donor j -> receiver i (i != j) maximizes up[i] - down[j];
    // the two largest ups and two smallest downs cover the i == j case.
    std::size_t u1 = k, u2 = k, d1 = k, d2 = k;
    for (std::size_t i = 0; i < k; ++i) {
      if (u1 == k || up[i] > up[u1]) {
        u2 = u1;
        u1 = i;
      } else if (u2 == k || up[i] > up[u2]) {
        u2 = i;
      }
      if (d1 == k || down[i] < down[d1]) {
        d2 = d1;
        d1 = i;
      } else if (d2 == k || down[i] < down[d2]) {
        d2 = i;
      }
    }
    std::size_t recv = u1;
    std::size_t donor = d1;
    if (recv == donor) {
      const double via_u2 = up[u2] - down[d1];
      const double via_d2 = up[u1] - down[d2];
      if (via_u2 >= via_d2) {
        recv = u2;
      } else {
        donor = d2;
      }
    }
    const double gain = up[recv] - down[donor];
    if (!(gain > 0.0)) break;
    ++r[recv];
    --r[donor];
    refresh(recv);
    refresh(donor);
  }
}

BitAllocation finish(std::span<const double> p, std::size_t dim, int z_res,
                     std::vector<int> r) {
  BitAllocation a;
  a.residual = std::move(r);
  a.residual_budget = z_res;
  a.objective = allocation_objective(p, a.residual, dim);
  return a;
}

}  // namespace

std::vector<int> BitAllocation::bit_widths() const {
  std::vector<int> z(residual.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = residual[i] + 2;
  return z;
}

double utility(double p, int r, std::size_t dim) {
  // 1/(4 s^2) underflows to 0 past r ~ 510, which is the exact limit anyway.
  // 2^(r+1) is assembled from its exponent bits.
  const auto biased = static_cast<std::uint64_t>(1023 + std::min(r, 1000) + 1);
  const double s = std::bit_cast<double>(biased << 52) - 1.0;
  const double phi = static_cast<double>(dim) / (4.0 * s * s);
  return (1.0 - p) / (p + phi);
}

double allocation_objective(std::span<const double> p, std::span<const int> r,
                            std::size_t dim) {
  if (p.size() != r.size()) throw Error(ErrorKind::kInvalidInput, "p/r length mismatch");
  double f = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) f += utility(p[i], r[i], dim);
  return f;
}

BitAllocation dp_allocate(std::span<const double> p, std::size_t dim, int z_res) {
  check_budget(z_res);
  check_probabilities(p);
  const std::size_t k = p.size();
  const auto width = static_cast<std::size_t>(z_res) + 1;
  if (k == 0) throw Error(ErrorKind::kInvalidInput, "no workers");

  std::vector<double> h(k * width);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t a = 0; a < width; ++a) h[i * width + a] = utility(p[i], static_cast<int>(a), dim);
  }
  // value[i][r]: best utility of workers 0..i-1 spending exactly r bits.
  std::vector<double> prev(width, kNegInf);
  std::vector<double> next(width);
  prev[0] = 0.0;
  std::vector<int> choice(k * width, 0);
  for (std::size_t i = 0; i < k; ++i) {
    const double* hi = &h[i * width];
    int* ci = &choice[i * width];
    for (std::size_t r = 0; r < width; ++r) {
      double best = kNegInf;
      int arg = 0;
      for (std::size_t a = 0; a <= r; ++a) {
        const double v = prev[r - a] + hi[a];
        if (v > best) {
          best = v;
          arg = static_cast<int>(a);
        }
      }
      next[r] = best;
      ci[r] = arg;
    }
    std::swap(prev, next);
  }
  std::vector<int> r(k, 0);
  int left = z_res;
  for (std::size_t i = k; i-- > 0;) {
    r[i] = choice[i * width + static_cast<std::size_t>(left)];
    left -= r[i];
  }
  return finish(p, dim, z_res, std::move(r));
}

BitAllocation exhaustive_oracle(std::span<const double> p, std::size_t dim, int z_res) {
  check_budget(z_res);
  check_probabilities(p);
  const std::size_t k = p.size();
  if (k == 0) throw Error(ErrorKind::kInvalidInput, "no workers");
  // C(z_res + k - 1, k - 1), stopping as soon as it passes the guard.
  double count = 1.0;
  for (std::size_t j = 1; j < k; ++j) {
    count = count * static_cast<double>(z_res + static_cast<int>(j)) / static_cast<double>(j);
    if (count > 1e7) {
      throw Error(ErrorKind::kInstanceTooLarge, "more than 1e7 compositions to enumerate");
    }
  }
  const auto width = static_cast<std::size_t>(z_res) + 1;
  std::vector<double> h(k * width);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t a = 0; a < width; ++a) h[i * width + a] = utility(p[i], static_cast<int>(a), dim);
  }
  std::vector<int> cur(k, 0);
  std::vector<int> best(k, 0);
  double best_f = kNegInf;
  // Odometer over compositions; the last worker takes the remainder.
  auto recurse = [&](auto&& self, std::size_t i, int left, double acc) -> void {
    if (i + 1 == k) {
      cur[i] = left;
      const double f = acc + h[i * width + static_cast<std::size_t>(left)];
      if (f > best_f) {
        best_f = f;
        best = cur;
      }
      return;
    }
    for (int a = 0; a <= left; ++a) {
      cur[i] = a;
      self(self, i + 1, left - a, acc + h[i * width + static_cast<std::size_t>(a)]);
    }
  };
  recurse(recurse, 0, z_res, 0.0);
  return finish(p, dim, z_res, std::move(best));
}

LagrangianResult lagrangian_allocate(std::span<const double> p, std::size_t dim, int budget) {
  check_budget(budget);
  check_probabilities(p);
  if (p.empty()) throw Error(ErrorKind::kInvalidInput, "empty worker subset");
  LagrangianResult out;
  const std::size_t count = p.size();
  out.continuous.assign(count, 0.0);
  if (budget == 0) {
    out.residual.assign(count, 0);
    return out;
  }
  if (count == 1) {
    out.residual = {budget};
    out.continuous = {static_cast<double>(budget)};
    return out;
  }
  const auto b = static_cast<double>(budget);
  std::vector<Marginal> marg;
  marg.reserve(count);
  for (double pi : p) marg.emplace_back(pi, static_cast<double>(dim), b);
  WaterFill fill;
  water_fill(marg, b, kNegInf, fill);
  if (!fill.ok) {
    out.fallback = true;
    out.residual = equal_allocate(count, budget);
    for (std::size_t i = 0; i < count; ++i) out.continuous[i] = out.residual[i];
    return out;
  }
  out.continuous = std::move(fill.level);
  out.multiplier = std::exp(fill.log_lambda);
  out.residual = round_levels(out.continuous,
                              [&](std::size_t i, int r) { return utility(p[i], r, dim); }, budget);
  return out;
}

std::vector<int> equal_allocate(std::size_t count, int budget) {
  check_budget(budget);
  if (count == 0) throw Error(ErrorKind::kInvalidInput, "empty worker subset");
  const auto c = static_cast<int>(count);
  std::vector<int> r(count, budget / c);
  for (int i = 0; i < budget % c; ++i) ++r[static_cast<std::size_t>(i)];
  return r;
}

std::vector<int> local_search_refine(std::vector<int> r, std::span<const double> p,
                                     std::size_t dim) {
  if (r.size() != p.size()) throw Error(ErrorKind::kInvalidInput, "p/r length mismatch");
  std::vector<double> up;
  std::vector<double> down;
  local_search(r, [&](std::size_t i, int v) { return utility(p[i], v, dim); }, up, down);
  return r;
}

BitAllocation proposed_allocate(std::span<const double> p, std::size_t dim, int z_res) {
  check_budget(z_res);
  check_probabilities(p);
  const std::size_t k = p.size();
  if (k == 0) throw Error(ErrorKind::kInvalidInput, "no workers");
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

  std::vector<int> best(k, 0);
  const std::size_t kappa_max = std::min(k, static_cast<std::size_t>(z_res));
  if (kappa_max == 0) return finish(p, dim, z_res, std::move(best));

  // Utilities of every worker at 0..z_res+1 residual bits, the only values
  // any candidate or local-search move can touch.
  const auto width = static_cast<std::size_t>(z_res) + 2;
  std::vector<double> table(k * width);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t a = 0; a < width; ++a) table[i * width + a] = utility(p[i], static_cast<int>(a), dim);
  }
  auto util = [&](std::size_t i, int r) { return table[i * width + static_cast<std::size_t>(r)]; };
  auto objective = [&](const std::vector<int>& r) {
    double f = 0.0;
    for (std::size_t i = 0; i < k; ++i) f += util(i, r[i]);
    return f;
  };
  auto sorted_util = [&](std::size_t t, int r) { return util(order[t], r); };

  const auto b = static_cast<double>(z_res);
  std::vector<Marginal> marg;
  marg.reserve(kappa_max);
  for (std::size_t t = 0; t < kappa_max; ++t) marg.emplace_back(p[order[t]], static_cast<double>(dim), b);

  double best_f = kNegInf;
  // Adding a worker only raises the total at a fixed multiplier, so the
  // previous water level bounds the next one from below.
  double t_floor = kNegInf;
  std::vector<int> cand_lag(k);
  std::vector<int> cand_eq(k);
  WaterFill fill;
  std::vector<double> up;
  std::vector<double> down;
  for (std::size_t kappa = 1; kappa <= kappa_max; ++kappa) {
    std::vector<int> lag;
    if (kappa == 1) {
      lag = {z_res};
    } else {
      water_fill(std::span<Marginal>(marg.data(), kappa), b, t_floor, fill);
      if (fill.ok) {
        t_floor = fill.log_lambda;
        lag = round_levels(fill.level, sorted_util, z_res);
      } else {
        lag = equal_allocate(kappa, z_res);
      }
    }
    const auto eq = equal_allocate(kappa, z_res);
    std::fill(cand_lag.begin(), cand_lag.end(), 0);
    std::fill(cand_eq.begin(), cand_eq.end(), 0);
    for (std::size_t t = 0; t < kappa; ++t) {
      cand_lag[order[t]] = lag[t];
      cand_eq[order[t]] = eq[t];
    }
    const double f_lag = objective(cand_lag);
    const double f_eq = objective(cand_eq);
    auto& refined = f_lag >= f_eq ? cand_lag : cand_eq;
    local_search(refined, util, up, down);
    const double f = objective(refined);
    if (f > best_f) {
      best_f = f;
      best = refined;
    }
  }
  return finish(p, dim, z_res, std::move(best));
}

BitAllocation greedy_allocate(std::span<const double> p, std::size_t dim, int z_res) {
  check_budget(z_res);
  check_probabilities(p);
  const std::size_t k = p.size();
  if (k == 0) throw Error(ErrorKind::kInvalidInput, "no workers");
  std::vector<int> r(k, 0);
  std::vector<double> gain(k);
  for (std::size_t i = 0; i < k; ++i) gain[i] = utility(p[i], 1, dim) - utility(p[i], 0, dim);
  for (int step = 0; step < z_res; ++step) {
    const auto it = std::max_element(gain.begin(), gain.end());
    const auto i = static_cast<std::size_t>(it - gain.begin());
    ++r[i];
    gain[i] = utility(p[i], r[i] + 1, dim) - utility(p[i], r[i], dim);
  }
  return finish(p, dim, z_res, std::move(r));
}

BitAllocation equal_allocation(std::span<const double> p, std::size_t dim, int z_res) {
  check_probabilities(p);
  return finish(p, dim, z_res, equal_allocate(p.size(), z_res));
}

BitAllocation lagrangian_allocation(std::span<const double> p, std::size_t dim, int z_res) {
  return finish(p, dim, z_res, lagrangian_allocate(p, dim, z_res).residual);
}

}  // namespace agc
