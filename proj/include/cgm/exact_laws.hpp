#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cgm/rng.hpp"

namespace cgm {

using BigInt = boost::multiprecision::cpp_int;

// Rows 0..n of the Catalan triangle from C(r,0) = 1 and C(r,k) = C(r,k-1) + C(r-1,k),
// with C(r-1,r) = 0.
inline std::vector<std::vector<BigInt>> catalan_triangle_rows(std::size_t n) {
  std::vector<std::vector<BigInt>> rows(n + 1);
  for (std::size_t r = 0; r <= n; ++r) {
    rows[r].resize(r + 1);
    rows[r][0] = 1;
    for (std::size_t k = 1; k <= r; ++k) rows[r][k] = rows[r][k - 1] + (k <= r - 1 ? rows[r - 1][k] : BigInt(0));
  }
  return rows;
}

inline BigInt catalan_triangle(std::size_t n, std::size_t k) {
  if (k > n) throw std::invalid_argument("catalan_triangle: k > n");
  return catalan_triangle_rows(n)[n][k];
}

// C_n = C(n,n).
inline BigInt catalan_number(std::size_t n) { return catalan_triangle(n, n); }

// Catalan-triangle terms weighted by the embedded jump chain of two competing Poisson
// processes: w[r][k] = C(r,k) q_a^{r+1} q_b^k with q_a = a/(a+b), q_b = b/(a+b), built from
// w[r][k] = w[r][k-1] q_b + w[r-1][k] q_a. All terms are positive, so nothing cancels.
class PoissonCompetition {
 public:
  PoissonCompetition(double alpha, double beta) {
    if (!(alpha > 0.0 && beta > 0.0)) throw std::invalid_argument("PoissonCompetition: rates must be positive");
    qa_ = alpha / (alpha + beta);
    qb_ = beta / (alpha + beta);
    ratio_ = beta / alpha;
  }

  // P(A_n): the first n rate-a jumps each precede the matching rate-b jump.
  double A(std::size_t n) {
    if (n < 1) throw std::invalid_argument("PoissonCompetition: n >= 1");
    extend(n - 1);
    double s = 0.0;
    for (double v : rows_[n - 1]) s += v;
    return s;
  }

  // P(B_n): A_{n-1} holds and the n-th rate-b jump comes first.
  double B(std::size_t n) {
    if (n < 1) throw std::invalid_argument("PoissonCompetition: n >= 1");
    extend(n - 1);
    return rows_[n - 1][n - 1] * ratio_;
  }

 private:
  void extend(std::size_t r_max) {
    while (rows_.size() <= r_max) {
      const std::size_t r = rows_.size();
      std::vector<double> row(r + 1);
      row[0] = r == 0 ? qa_ : rows_[r - 1][0] * qa_;
      for (std::size_t k = 1; k <= r; ++k) row[k] = row[k - 1] * qb_ + (k < r ? rows_[r - 1][k] * qa_ : 0.0);
      rows_.push_back(std::move(row));
    }
  }

  double qa_ = 0.5, qb_ = 0.5, ratio_ = 1.0;
  std::vector<std::vector<double>> rows_;
};

inline double poisson_competition_A(std::size_t n, double alpha, double beta) {
  return PoissonCompetition(alpha, beta).A(n);
}

inline double poisson_competition_B(std::size_t n, double alpha, double beta) {
  return PoissonCompetition(alpha, beta).B(n);
}

// P{a = n} with P{a = 0} = (rho - lambda)/rho and, for n >= 1,
// (rho - lambda)/rho * sum_{k<n} C(n-1,k) rho^k lambda^n / (lambda + rho)^{n+k}.
inline double initial_run_pmf2(double lambda, double rho, std::size_t n) {
  if (!(lambda > 0.0 && lambda < rho)) throw std::invalid_argument("initial_run_pmf2: needs 0 < lambda < rho");
  const double p0 = (rho - lambda) / rho;
  if (n == 0) return p0;
  // Poisson competition with alpha = 1/rho and beta = 1/lambda.
  return p0 * poisson_competition_A(n, 1.0 / rho, 1.0 / lambda);
}

// Law of the number of consecutive -e1 steps of a rho-geodesic.
inline double initial_run_pmf(double rho, std::size_t n) {
  if (!(rho > 1.0)) throw std::invalid_argument("initial_run_pmf: needs rho > 1");
  return initial_run_pmf2(1.0, rho, n);
}

// pmf values for n = 0..n_max.
inline std::vector<double> initial_run_pmf_table(double lambda, double rho, std::size_t n_max) {
  if (!(lambda > 0.0 && lambda < rho)) throw std::invalid_argument("initial_run_pmf_table: needs 0 < lambda < rho");
  const double p0 = (rho - lambda) / rho;
  PoissonCompetition pc(1.0 / rho, 1.0 / lambda);
  std::vector<double> out{p0};
  for (std::size_t n = 1; n <= n_max; ++n) out.push_back(p0 * pc.A(n));
  return out;
}

// Sum of the pmf over n until a term falls below tol.
inline double initial_run_pmf_total(double lambda, double rho, double tol = 1e-15, std::size_t n_max = 100000) {
  if (!(lambda > 0.0 && lambda < rho)) throw std::invalid_argument("initial_run_pmf_total: needs 0 < lambda < rho");
  const double p0 = (rho - lambda) / rho;
  PoissonCompetition pc(1.0 / rho, 1.0 / lambda);
  double s = p0;
  for (std::size_t n = 1; n < n_max; ++n) {
    const double p = p0 * pc.A(n);
    s += p;
    if (p < tol) break;
  }
  return s;
}

// Atom lambda/rho at 0, otherwise exponential with mean rho.
struct IncrementLaw {
  double lambda = 1.0;
  double rho = 2.0;

  double atom() const { return lambda / rho; }
  double cdf(double s) const {
    if (s < 0.0) return 0.0;
    return atom() + (1.0 - atom()) * (1.0 - std::exp(-s / rho));
  }
  double survival(double s) const { return s < 0.0 ? 1.0 : (1.0 - atom()) * std::exp(-s / rho); }
  double laplace(double t) const { return (1.0 + lambda * t) / (1.0 + rho * t); }
  double quantile(double u) const {
    if (u <= atom()) return 0.0;
    return -rho * std::log((1.0 - u) / (1.0 - atom()));
  }
  double sample(double u) const { return quantile(u); }
};

inline IncrementLaw increment_law(double lambda, double rho) {
  if (!(lambda > 0.0 && lambda <= rho)) throw std::invalid_argument("increment_law: needs 0 < lambda <= rho");
  return {lambda, rho};
}

// Locations 1 = s_0 < s_1 < ... <= rho_max with marks Z_s ~ Exp(mean s).
struct MarkedPointProcess {
  double rho_max = 1.0;
  std::vector<double> points;
  std::vector<double> marks;
};

// Points of intensity ds/s on (1, rho_max] are exp(E_1 + ... + E_j) for i.i.d. Exp(1) E_i.
inline MarkedPointProcess sample_X_process(double rho_max, const RngSpec& rng) {
  if (!(rho_max >= 1.0) || !std::isfinite(rho_max)) throw std::invalid_argument("sample_X_process: rho_max >= 1");
  Stream gaps(rng.child("locations"));
  Stream marks(rng.child("marks"));
  MarkedPointProcess m;
  m.rho_max = rho_max;
  m.points.push_back(1.0);
  m.marks.push_back(marks.exp(1.0));
  const double log_max = std::log(rho_max);
  double u = 0.0;
  for (;;) {
    u += gaps.exp(1.0);
    if (u > log_max) break;
    const double s = std::exp(u);
    m.points.push_back(s);
    m.marks.push_back(marks.exp(s));
  }
  return m;
}

inline double X_value(const MarkedPointProcess& m, double rho) {
  if (rho < 1.0) throw std::invalid_argument("X_value: rho >= 1");
  if (rho > m.rho_max) throw std::invalid_argument("X_value: rho beyond sampled range");
  double x = 0.0;
  for (std::size_t i = 0; i < m.points.size() && m.points[i] <= rho; ++i) x += m.marks[i];
  return x;
}

inline std::size_t X_point_count(const MarkedPointProcess& m, double lo, double hi) {
  return static_cast<std::size_t>(std::count_if(m.points.begin(), m.points.end(),
                                                [&](double s) { return s > lo && s <= hi; }));
}

// P{rho* <= lambda}.
inline double rho_star_cdf(double lambda) {
  if (std::isinf(lambda)) return 1.0;
  return lambda <= 1.0 ? 0.0 : 1.0 - 1.0 / lambda;
}

}  // namespace cgm
