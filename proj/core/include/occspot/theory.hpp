#ifndef OCCSPOT_THEORY_HPP
#define OCCSPOT_THEORY_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "occspot/rng.hpp"

namespace occspot::theory {

inline constexpr double kMassTolerance = 1e-12;
inline constexpr double kSlackTolerance = 1e-12;

/// Joint over (Z, T), row-major p[z * nt + t].
struct Joint2 {
  int nz = 0;
  int nt = 0;
  std::vector<double> p;

  double at(int z, int t) const { return p[static_cast<std::size_t>(z * nt + t)]; }
  std::vector<double> marginal_z() const;
  std::vector<double> marginal_t() const;
  /// Throws std::invalid_argument on negative entries, wrong size or mass != 1.
  void validate() const;
};

/// Joint over (O, T, Z), row-major p[(o * nt + t) * nz + z].
struct Joint3 {
  int no = 0;
  int nt = 0;
  int nz = 0;
  std::vector<double> p;

  double at(int o, int t, int z) const { return p[static_cast<std::size_t>((o * nt + t) * nz + z)]; }
  void validate() const;
};

/// Natural-log entropy, 0 ln 0 = 0.
double entropy(std::span<const double> dist);
double mutual_information(const Joint2& j);
/// I(O; T | Z).
double conditional_mi(const Joint3& j);
/// 1 - sum_z max_t p(z, t).
double bayes_error(const Joint2& j);

struct BoundReport {
  double entropy_t = 0.0;
  double mutual_information = 0.0;
  double bayes_error = 0.0;
  double bound_value = 0.0;  // 1 - exp(-H(T) + I(Z, T))
  double slack = 0.0;        // bound_value - bayes_error
  bool satisfied = false;
};

BoundReport check_bayes_bound(const Joint2& j);

/// Joint of (f(Z), T) for a deterministic map f: Z -> {0..n_out-1}.
Joint2 pushforward(const Joint2& j, std::span<const int> f);
/// Joint of (O, T, f(O)).
Joint3 attach(const Joint2& j_ot, std::span<const int> f);

struct Lemma1Report {
  double lhs = 0.0;  // I(z_occ, T) - I(z_mae, T)
  double rhs = 0.0;  // I(O, T | z_mae) - I(O, T | z_occ)
  double difference = 0.0;
  bool holds = false;
};

/// `j` is over (O, T); both representations are deterministic maps of O.
Lemma1Report lemma1_decomposition(const Joint2& j, std::span<const int> f_occ, std::span<const int> f_mae);

/// E[Var(T | Z)] for numeric T values.
double min_squared_risk(const Joint2& j, std::span<const double> t_values);

struct RiskReport {
  double risk = 0.0;
  double risk_garbled = 0.0;
  double bayes = 0.0;
  double bayes_garbled = 0.0;
  double mi = 0.0;
  double mi_garbled = 0.0;
  bool holds = false;
};

/// Compares Z with Z' = g(Z): every risk must not decrease and MI must not increase.
RiskReport risk_ordering(const Joint2& j, std::span<const double> t_values, std::span<const int> g);

/// Random joint with some exact zeros.
Joint2 random_joint(Rng& rng, int nz, int nt);
std::vector<int> random_map(Rng& rng, int n_in, int n_out);

struct SweepSummary {
  std::size_t bound_cases = 0;
  std::size_t bound_violations = 0;
  double min_slack = 0.0;
  std::size_t lemma_cases = 0;
  std::size_t lemma_violations = 0;
  double lemma_max_difference = 0.0;
  std::size_t risk_cases = 0;
  std::size_t risk_violations = 0;
};

/// Randomized sweeps over supports up to 8 per variable.
SweepSummary run_sweeps(std::size_t bound_cases, std::size_t lemma_cases, std::size_t risk_cases,
                        std::uint64_t seed);

}  // namespace occspot::theory

#endif  // OCCSPOT_THEORY_HPP
