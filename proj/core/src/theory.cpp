#include "occspot/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace occspot::theory {

namespace {

void check_mass(std::span<const double> p, const char* what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": negative or non-finite mass");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kMassTolerance) {
    throw std::invalid_argument(std::string(what) + ": total mass " + std::to_string(sum) + " != 1");
  }
}

void check_map(std::span<const int> f, int n_in, const char* what) {
  if (static_cast<int>(f.size()) != n_in) throw std::invalid_argument(std::string(what) + ": map size mismatch");
  for (int v : f) {
    if (v < 0) throw std::invalid_argument(std::string(what) + ": map values must be >= 0");
  }
}

int map_range(std::span<const int> f) { return f.empty() ? 1 : *std::max_element(f.begin(), f.end()) + 1; }

}  // namespace

std::vector<double> Joint2::marginal_z() const {
  std::vector<double> m(static_cast<std::size_t>(nz), 0.0);
  for (int z = 0; z < nz; ++z) {
    for (int t = 0; t < nt; ++t) m[static_cast<std::size_t>(z)] += at(z, t);
  }
  return m;
}

std::vector<double> Joint2::marginal_t() const {
  std::vector<double> m(static_cast<std::size_t>(nt), 0.0);
  for (int z = 0; z < nz; ++z) {
    for (int t = 0; t < nt; ++t) m[static_cast<std::size_t>(t)] += at(z, t);
  }
  return m;
}

void Joint2::validate() const {
  if (nz < 1 || nt < 1 || p.size() != static_cast<std::size_t>(nz) * static_cast<std::size_t>(nt)) {
    throw std::invalid_argument("joint: support sizes do not match the probability table");
  }
  check_mass(p, "joint");
}

void Joint3::validate() const {
  if (no < 1 || nt < 1 || nz < 1 ||
      p.size() != static_cast<std::size_t>(no) * static_cast<std::size_t>(nt) * static_cast<std::size_t>(nz)) {
    throw std::invalid_argument("joint3: support sizes do not match the probability table");
  }
  check_mass(p, "joint3");
}

double entropy(std::span<const double> dist) {
  check_mass(dist, "entropy");
  double h = 0.0;
  for (double v : dist) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

double mutual_information(const Joint2& j) {
  j.validate();
  const auto pz = j.marginal_z();
  const auto pt = j.marginal_t();
  double mi = 0.0;
  for (int z = 0; z < j.nz; ++z) {
    for (int t = 0; t < j.nt; ++t) {
      const double v = j.at(z, t);
      if (v > 0.0) mi += v * std::log(v / (pz[static_cast<std::size_t>(z)] * pt[static_cast<std::size_t>(t)]));
    }
  }
  return std::max(mi, 0.0);
}

double conditional_mi(const Joint3& j) {
  j.validate();
  std::vector<double> pz(static_cast<std::size_t>(j.nz), 0.0);
  std::vector<double> poz(static_cast<std::size_t>(j.no * j.nz), 0.0);
  std::vector<double> ptz(static_cast<std::size_t>(j.nt * j.nz), 0.0);
  for (int o = 0; o < j.no; ++o) {
    for (int t = 0; t < j.nt; ++t) {
      for (int z = 0; z < j.nz; ++z) {
        const double v = j.at(o, t, z);
        pz[static_cast<std::size_t>(z)] += v;
        poz[static_cast<std::size_t>(o * j.nz + z)] += v;
        ptz[static_cast<std::size_t>(t * j.nz + z)] += v;
      }
    }
  }
  double cmi = 0.0;
  for (int o = 0; o < j.no; ++o) {
    for (int t = 0; t < j.nt; ++t) {
      for (int z = 0; z < j.nz; ++z) {
        const double v = j.at(o, t, z);
        if (v <= 0.0) continue;
        cmi += v * std::log(v * pz[static_cast<std::size_t>(z)] /
                            (poz[static_cast<std::size_t>(o * j.nz + z)] * ptz[static_cast<std::size_t>(t * j.nz + z)]));
      }
    }
  }
  return std::max(cmi, 0.0);
}

double bayes_error(const Joint2& j) {
  j.validate();
  double correct = 0.0;
  for (int z = 0; z < j.nz; ++z) {
    double best = 0.0;
    for (int t = 0; t < j.nt; ++t) best = std::max(best, j.at(z, t));
    correct += best;
  }
  return std::clamp(1.0 - correct, 0.0, 1.0);
}

BoundReport check_bayes_bound(const Joint2& j) {
  BoundReport r;
  r.entropy_t = entropy(j.marginal_t());
  r.mutual_information = mutual_information(j);
  r.bayes_error = bayes_error(j);
  r.bound_value = 1.0 - std::exp(-r.entropy_t + r.mutual_information);
  r.slack = r.bound_value - r.bayes_error;
  r.satisfied = r.slack >= -kSlackTolerance;
  return r;
}

Joint2 pushforward(const Joint2& j, std::span<const int> f) {
  j.validate();
  check_map(f, j.nz, "pushforward");
  Joint2 out{map_range(f), j.nt, {}};
  out.p.assign(static_cast<std::size_t>(out.nz * out.nt), 0.0);
  for (int z = 0; z < j.nz; ++z) {
    const int fz = f[static_cast<std::size_t>(z)];
    for (int t = 0; t < j.nt; ++t) out.p[static_cast<std::size_t>(fz * out.nt + t)] += j.at(z, t);
  }
  return out;
}

Joint3 attach(const Joint2& j_ot, std::span<const int> f) {
  j_ot.validate();
  check_map(f, j_ot.nz, "attach");
  Joint3 out{j_ot.nz, j_ot.nt, map_range(f), {}};
  out.p.assign(static_cast<std::size_t>(out.no * out.nt * out.nz), 0.0);
  for (int o = 0; o < j_ot.nz; ++o) {
    for (int t = 0; t < j_ot.nt; ++t) {
      out.p[static_cast<std::size_t>((o * out.nt + t) * out.nz + f[static_cast<std::size_t>(o)])] = j_ot.at(o, t);
    }
  }
  return out;
}

Lemma1Report lemma1_decomposition(const Joint2& j, std::span<const int> f_occ, std::span<const int> f_mae) {
  Lemma1Report r;
  r.lhs = mutual_information(pushforward(j, f_occ)) - mutual_information(pushforward(j, f_mae));
  r.rhs = conditional_mi(attach(j, f_mae)) - conditional_mi(attach(j, f_occ));
  r.difference = std::abs(r.lhs - r.rhs);
  r.holds = r.difference <= kSlackTolerance;
  return r;
}

double min_squared_risk(const Joint2& j, std::span<const double> t_values) {
  j.validate();
  if (static_cast<int>(t_values.size()) != j.nt) {
    throw std::invalid_argument("min_squared_risk: need one numeric value per T outcome");
  }
  for (double v : t_values) {
    if (!std::isfinite(v)) throw std::invalid_argument("min_squared_risk: non-numeric T value");
  }
  double risk = 0.0;
  for (int z = 0; z < j.nz; ++z) {
    double mass = 0.0;
    double mean = 0.0;
    for (int t = 0; t < j.nt; ++t) {
      mass += j.at(z, t);
      mean += j.at(z, t) * t_values[static_cast<std::size_t>(t)];
    }
    if (mass <= 0.0) continue;
    mean /= mass;
    for (int t = 0; t < j.nt; ++t) {
      const double d = t_values[static_cast<std::size_t>(t)] - mean;
      risk += j.at(z, t) * d * d;
    }
  }
  return risk;
}

RiskReport risk_ordering(const Joint2& j, std::span<const double> t_values, std::span<const int> g) {
  const Joint2 garbled = pushforward(j, g);
  RiskReport r;
  r.risk = min_squared_risk(j, t_values);
  r.risk_garbled = min_squared_risk(garbled, t_values);
  r.bayes = bayes_error(j);
  r.bayes_garbled = bayes_error(garbled);
  r.mi = mutual_information(j);
  r.mi_garbled = mutual_information(garbled);
  r.holds = r.risk <= r.risk_garbled + kSlackTolerance && r.bayes <= r.bayes_garbled + kSlackTolerance &&
            r.mi_garbled <= r.mi + kSlackTolerance;
  return r;
}

Joint2 random_joint(Rng& rng, int nz, int nt) {
  Joint2 j{nz, nt, std::vector<double>(static_cast<std::size_t>(nz * nt))};
  const double zero_rate = rng.uniform(0.0, 0.5);
  double sum = 0.0;
  for (double& v : j.p) {
    v = rng.bernoulli(zero_rate) ? 0.0 : -std::log(1.0 - rng.uniform());
    sum += v;
  }
  if (sum == 0.0) {
    j.p[rng.below(j.p.size())] = 1.0;
    return j;
  }
  for (double& v : j.p) v /= sum;
  return j;
}

std::vector<int> random_map(Rng& rng, int n_in, int n_out) {
  std::vector<int> f(static_cast<std::size_t>(n_in));
  for (int& v : f) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_out)));
  return f;
}

SweepSummary run_sweeps(std::size_t bound_cases, std::size_t lemma_cases, std::size_t risk_cases,
                        std::uint64_t seed) {
  SweepSummary s;
  s.min_slack = std::numeric_limits<double>::infinity();
  Rng rng(derive_seed(seed, "theory", 0));
  auto size = [&] { return 1 + static_cast<int>(rng.below(8)); };
  for (std::size_t i = 0; i < bound_cases; ++i) {
    const auto j = random_joint(rng, size(), size());
    const auto r = check_bayes_bound(j);
    ++s.bound_cases;
    s.min_slack = std::min(s.min_slack, r.slack);
    if (!r.satisfied) ++s.bound_violations;
  }
  Rng lemma_rng(derive_seed(seed, "theory", 1));
  for (std::size_t i = 0; i < lemma_cases; ++i) {
    const int no = 1 + static_cast<int>(lemma_rng.below(8));
    const auto j = random_joint(lemma_rng, no, 1 + static_cast<int>(lemma_rng.below(8)));
    const auto f_occ = random_map(lemma_rng, no, 1 + static_cast<int>(lemma_rng.below(8)));
    const auto f_mae = random_map(lemma_rng, no, 1 + static_cast<int>(lemma_rng.below(8)));
    const auto r = lemma1_decomposition(j, f_occ, f_mae);
    ++s.lemma_cases;
    s.lemma_max_difference = std::max(s.lemma_max_difference, r.difference);
    if (!r.holds) ++s.lemma_violations;
  }
  Rng risk_rng(derive_seed(seed, "theory", 2));
  for (std::size_t i = 0; i < risk_cases; ++i) {
    const int nz = 1 + static_cast<int>(risk_rng.below(8));
    const int nt = 1 + static_cast<int>(risk_rng.below(8));
    const auto j = random_joint(risk_rng, nz, nt);
    std::vector<double> values(static_cast<std::size_t>(nt));
    for (double& v : values) v = risk_rng.uniform(-10.0, 10.0);
    const auto g = random_map(risk_rng, nz, 1 + static_cast<int>(risk_rng.below(static_cast<std::uint64_t>(nz))));
    ++s.risk_cases;
    if (!risk_ordering(j, values, g).holds) ++s.risk_violations;
  }
  if (s.bound_cases == 0) s.min_slack = 0.0;
  return s;
}

}  // namespace occspot::theory
