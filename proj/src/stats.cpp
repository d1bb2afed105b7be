#include "latticeperm/stats.hpp"

#include <cmath>
#include <limits>

#include "latticeperm/errors.hpp"

namespace latticeperm {

namespace {

constexpr int kMaxIterations = 500;
constexpr double kEpsilon = 3.0e-15;
constexpr double kTiny = 1.0e-300;

// Lower incomplete gamma P(a, x) by power series, for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < kMaxIterations; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEpsilon) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw NumericalError("incomplete gamma series did not converge");
}

// Upper incomplete gamma Q(a, x) by Lentz continued fraction, for x >= a + 1.
double gamma_q_contfrac(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEpsilon) {
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
  }
  throw NumericalError("incomplete gamma continued fraction did not converge");
}

}  // namespace

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw DomainError("gamma_q needs x >= 0 and a > 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_contfrac(a, x);
}

double chi_square_survival(double statistic, int dof) {
  if (dof < 1) throw DomainError("chi-square needs dof >= 1");
  if (statistic <= 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * statistic);
}

ChiSquareResult chi_square_gof(const std::vector<std::uint64_t>& counts,
                               const std::vector<double>& probabilities,
                               double min_expected) {
  if (counts.size() != probabilities.size() || counts.empty()) {
    throw DomainError("counts and probabilities must align");
  }
  std::uint64_t total = 0;
  for (std::uint64_t c : counts) total += c;
  if (total == 0) throw DomainError("chi-square needs at least one observation");

  double statistic = 0.0;
  int bins = 0;
  double tail_expected = 0.0;
  std::uint64_t tail_observed = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = probabilities[i] * static_cast<double>(total);
    if (expected < min_expected) {
      tail_expected += expected;
      tail_observed += counts[i];
      continue;
    }
    const double diff = static_cast<double>(counts[i]) - expected;
    statistic += diff * diff / expected;
    ++bins;
  }
  if (tail_expected > 0.0) {
    const double diff = static_cast<double>(tail_observed) - tail_expected;
    statistic += diff * diff / tail_expected;
    ++bins;
  } else if (tail_observed > 0) {
    // Mass observed on zero-probability bins: no fit at all.
    statistic = std::numeric_limits<double>::infinity();
  }
  if (bins < 2) throw DomainError("chi-square needs at least two effective bins");

  ChiSquareResult out;
  out.statistic = statistic;
  out.dof = bins - 1;
  out.p_value = chi_square_survival(statistic, out.dof);
  return out;
}

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return WilsonInterval{};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  WilsonInterval out;
  out.lo = std::max(0.0, center - half);
  out.hi = std::min(1.0, center + half);
  return out;
}

}  // namespace latticeperm
