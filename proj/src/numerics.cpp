#include "powerpost/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace powerpost {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TemperingGrid make_grid(int n_alpha, int sub_points) {
  if (n_alpha < 1) throw std::invalid_argument("make_grid: n_alpha must be >= 1");
  std::vector<double> pts(static_cast<std::size_t>(n_alpha) + 1);
  for (int k = 0; k <= n_alpha; ++k) {
    pts[static_cast<std::size_t>(k)] = static_cast<double>(k) / n_alpha;
  }
  pts.back() = 1.0;
  return make_grid(std::move(pts), sub_points);
}

TemperingGrid make_grid(std::vector<double> points, int sub_points) {
  if (sub_points < 3 || sub_points % 2 == 0) {
    throw std::invalid_argument("make_grid: sub_points must be odd and >= 3");
  }
  if (points.size() < 2 || points.front() != 0.0 || points.back() != 1.0) {
    throw std::invalid_argument("make_grid: points must start at 0 and end at 1");
  }
  for (std::size_t k = 1; k < points.size(); ++k) {
    if (!(points[k] > points[k - 1])) {
      throw std::invalid_argument("make_grid: points must be strictly increasing");
    }
  }
  return TemperingGrid{std::move(points), sub_points};
}

double simpson_integrate(std::span<const double> values, double step) {
  const std::size_t n = values.size();
  if (n < 3 || n % 2 == 0) {
    throw std::invalid_argument("simpson_integrate: need an odd node count >= 3");
  }
  if (!(step > 0.0)) throw std::invalid_argument("simpson_integrate: step must be > 0");
  double acc = values[0] + values[n - 1];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    acc += (i % 2 == 1 ? 4.0 : 2.0) * values[i];
  }
  return acc * step / 3.0;
}

SignedLogValue SignedLogValue::from_value(double x) {
  if (x == 0.0) return zero();
  return {x > 0.0 ? 1 : -1, std::log(std::abs(x))};
}

SignedLogValue SignedLogValue::from_log(int sign, double log_magnitude) {
  if (sign == 0) return zero();
  return {sign > 0 ? 1 : -1, log_magnitude};
}

double SignedLogValue::value() const {
  if (sign == 0) return 0.0;
  return static_cast<double>(sign) * std::exp(log_magnitude);
}

SignedLogValue SignedLogValue::scaled(double factor) const {
  if (sign == 0 || factor == 0.0) return zero();
  return {factor > 0.0 ? sign : -sign, log_magnitude + std::log(std::abs(factor))};
}

SignedLogValue signed_lse_sum(std::span<const SignedLogValue> terms) {
  double max_lm = -kInf;
  for (const auto& t : terms) {
    if (t.sign != 0) max_lm = std::max(max_lm, t.log_magnitude);
  }
  if (max_lm == -kInf) return SignedLogValue::zero();
  double pos = 0.0, neg = 0.0;
  for (const auto& t : terms) {
    if (t.sign == 0) continue;
    const double e = std::exp(t.log_magnitude - max_lm);
    (t.sign > 0 ? pos : neg) += e;
  }
  const double diff = pos - neg;
  if (diff == 0.0) return SignedLogValue::zero();
  return {diff > 0.0 ? 1 : -1, max_lm + std::log(std::abs(diff))};
}

SignedLogValue signed_lse_mean(std::span<const SignedLogValue> terms) {
  if (terms.empty()) throw std::invalid_argument("signed_lse_mean: empty list");
  SignedLogValue s = signed_lse_sum(terms);
  if (s.sign == 0) return s;
  s.log_magnitude -= std::log(static_cast<double>(terms.size()));
  return s;
}

double log_sum_exp(std::span<const double> log_terms) {
  double max_lt = -kInf;
  for (double t : log_terms) max_lt = std::max(max_lt, t);
  if (max_lt == -kInf) return -kInf;
  double acc = 0.0;
  for (double t : log_terms) acc += std::exp(t - max_lt);
  return max_lt + std::log(acc);
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) {
    throw std::invalid_argument("MonotoneCubic: need >= 2 matching nodes");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) {
      throw std::invalid_argument("MonotoneCubic: nodes must be strictly increasing");
    }
  }
  d_.assign(n, 0.0);
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  if (n == 2) {
    d_[0] = d_[1] = delta[0];
    return;
  }
  // Fritsch--Carlson: harmonic-mean interior slopes, shape-limited endpoints.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      d_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  auto endpoint = [](double h0, double h1, double d0, double d1) {
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0) {
      d = 0.0;
    } else if (d0 * d1 <= 0.0 && std::abs(d) > 3.0 * std::abs(d0)) {
      d = 3.0 * d0;
    }
    return d;
  };
  d_[0] = endpoint(h[0], h[1], delta[0], delta[1]);
  d_[n - 1] = endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

std::size_t MonotoneCubic::locate(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - x_.begin());
  if (i == 0) return 0;
  if (i >= x_.size()) return x_.size() - 2;
  return i - 1;
}

double MonotoneCubic::operator()(double x) const {
  const std::size_t i = locate(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return y_[i] * (2.0 * t3 - 3.0 * t2 + 1.0) + h * d_[i] * (t3 - 2.0 * t2 + t) +
         y_[i + 1] * (-2.0 * t3 + 3.0 * t2) + h * d_[i + 1] * (t3 - t2);
}

double MonotoneCubic::integrate(double a, double b) const {
  if (b < a) return -integrate(b, a);
  // antiderivative of the Hermite basis on one interval, evaluated at local t
  auto segment = [this](std::size_t i, double t0, double t1) {
    const double h = x_[i + 1] - x_[i];
    auto F = [&](double t) {
      const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
      const double f00 = 0.5 * t4 - t3 + t;
      const double f10 = 0.25 * t4 - (2.0 / 3.0) * t3 + 0.5 * t2;
      const double f01 = -0.5 * t4 + t3;
      const double f11 = 0.25 * t4 - t3 / 3.0;
      return y_[i] * f00 + h * d_[i] * f10 + y_[i + 1] * f01 + h * d_[i + 1] * f11;
    };
    return h * (F(t1) - F(t0));
  };
  double acc = 0.0;
  std::size_t i = locate(a);
  double pos = a;
  while (pos < b) {
    const double seg_end = std::min(b, x_[i + 1]);
    const double h = x_[i + 1] - x_[i];
    acc += segment(i, (pos - x_[i]) / h, (seg_end - x_[i]) / h);
    pos = seg_end;
    if (i + 2 >= x_.size()) break;  // clamp at the last interval
    ++i;
  }
  return acc;
}

std::vector<double> cumulative_integral(std::span<const double> x,
                                        std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) {
    throw std::invalid_argument("cumulative_integral: need >= 2 matching nodes");
  }
  std::vector<double> out(n, 0.0);
  const double h0 = x[1] - x[0];
  bool uniform = true;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (std::abs((x[i + 1] - x[i]) - h0) > 1e-12 * std::max(1.0, std::abs(h0))) {
      uniform = false;
      break;
    }
  }
  if (uniform && n >= 3) {
    // Simpson pairs for even indices, 3/8 closer for odd ones.
    out[1] = h0 / 12.0 * (5.0 * y[0] + 8.0 * y[1] - y[2]);
    for (std::size_t k = 2; k < n; ++k) {
      if (k % 2 == 0) {
        out[k] = out[k - 2] + h0 / 3.0 * (y[k - 2] + 4.0 * y[k - 1] + y[k]);
      } else if (k >= 3) {
        out[k] = out[k - 3] +
                 3.0 * h0 / 8.0 * (y[k - 3] + 3.0 * y[k - 2] + 3.0 * y[k - 1] + y[k]);
      }
    }
    return out;
  }
  if (n == 2) {
    out[1] = 0.5 * (y[0] + y[1]) * (x[1] - x[0]);
    return out;
  }
  MonotoneCubic interp(std::vector<double>(x.begin(), x.end()),
                       std::vector<double>(y.begin(), y.end()));
  for (std::size_t k = 1; k < n; ++k) {
    out[k] = out[k - 1] + interp.integrate(x[k - 1], x[k]);
  }
  return out;
}

}  // namespace powerpost
