#include "ionnode/estim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace ionnode::est {

double FitResult::at(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) throw ContractError("FitResult: no parameter '" + name + "'");
  return it->second;
}

double FitResult::error_of(const std::string& name) const {
  auto it = errors.find(name);
  if (it == errors.end()) throw ContractError("FitResult: no error for '" + name + "'");
  return it->second;
}

namespace {
void require_unit_interval(double v, double lo, const char* what) {
  if (!(v >= lo - 1e-12 && v <= 1.0 + 1e-12))
    throw ContractError(std::string(what) + " out of range");
}
}  // namespace

double bell_fidelity_correlators(double czz, double cxx, double cyy) {
  require_unit_interval(czz, -1, "<ZZ>");
  require_unit_interval(cxx, -1, "<XX>");
  require_unit_interval(cyy, -1, "<YY>");
  return (1.0 + czz + cxx - cyy) / 4.0;
}

double bell_fidelity_pop_parity(double p00_plus_p11, double contrast) {
  require_unit_interval(p00_plus_p11, 0, "population");
  require_unit_interval(contrast, -1, "contrast");
  return p00_plus_p11 / 2.0 + std::abs(contrast) / 2.0;
}

int outcome_sign(char symbol) {
  switch (symbol) {
    case '0': case 'H': case '+': return 1;
    case '1': case 'V': case '-': return -1;
    default: throw ContractError(std::string("unknown outcome symbol '") + symbol + "'");
  }
}

Estimate correlator_from_counts(const CountsTable& counts) {
  const double n = static_cast<double>(counts.total());
  if (n <= 0) throw ContractError("correlator_from_counts: empty table '" + counts.setting() + "'");
  double sum = 0.0;
  for (const auto& [o, k] : counts.outcomes()) {
    int s = 1;
    for (char ch : o) s *= outcome_sign(ch);
    sum += s * static_cast<double>(k);
  }
  const double m = sum / n;
  return {m, std::sqrt(std::max(0.0, 1.0 - m * m) / n)};
}

Estimate population(const CountsTable& counts, const std::vector<std::string>& outcomes) {
  double p = 0.0;
  for (const auto& o : outcomes) p += counts.frequency(o);
  return {p, std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(counts.total()))};
}

FitResult fit_parity(const ParityScan& scan) {
  const std::size_t n = scan.phases.size();
  if (n != scan.parities.size()) throw ContractError("fit_parity: phases and parities differ in length");
  if (n < 4) throw ContractError("fit_parity: need at least 4 phase points");
  const auto [lo, hi] = std::minmax_element(scan.phases.begin(), scan.phases.end());
  if (*hi - *lo < M_PI - 1e-12) throw ContractError("fit_parity: phases must span at least half a period");
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, 0) = std::sin(scan.phases[i]);
    a(i, 1) = std::cos(scan.phases[i]);
    y(i) = scan.parities[i];
  }
  const Eigen::Matrix2d ata = a.transpose() * a;
  if (std::abs(ata.determinant()) < 1e-10 * ata.squaredNorm())
    throw ContractError("fit_parity: degenerate design matrix");
  const Eigen::Vector2d coef = ata.ldlt().solve(a.transpose() * y);
  const double rss = (a * coef - y).squaredNorm();
  double sigma2 = 0.0;
  if (scan.shots_per_point > 0) {
    for (std::size_t i = 0; i < n; ++i)
      sigma2 += std::max(0.0, 1.0 - y(i) * y(i)) / static_cast<double>(scan.shots_per_point);
    sigma2 /= static_cast<double>(n);
  } else if (n > 2) {
    sigma2 = rss / static_cast<double>(n - 2);
  }
  const Eigen::Matrix2d cov = sigma2 * ata.inverse();
  const double c = coef.norm();
  FitResult fr;
  fr.params["C"] = c;
  fr.params["phi0"] = std::atan2(coef(1), coef(0));
  fr.residual = rss;
  double var_c = 0.0;
  if (c > 0) {
    var_c = (coef(0) * coef(0) * cov(0, 0) + coef(1) * coef(1) * cov(1, 1) + 2 * coef(0) * coef(1) * cov(0, 1)) /
            (c * c);
  } else {
    var_c = 0.5 * (cov(0, 0) + cov(1, 1));
  }
  fr.errors["C"] = std::sqrt(std::max(0.0, var_c));
  fr.errors["phi0"] = c > 0 ? fr.errors["C"] / c : M_PI;
  return fr;
}

double ghz_fidelity(double p00h, double p11v, const std::array<double, 3>& mk) {
  require_unit_interval(p00h, 0, "P00H");
  require_unit_interval(p11v, 0, "P11V");
  for (double m : mk) require_unit_interval(m, -1, "<M_k>");
  return (p00h + p11v) / 2.0 + (-mk[0] + mk[1] - mk[2]) / 6.0;
}

double ghz_fidelity(const CountsTable& populations, const std::array<double, 3>& mk) {
  return ghz_fidelity(populations.frequency("00H"), populations.frequency("11V"), mk);
}

int reinterpret_teleport_outcome(const std::string& bell, char basis, int photon_outcome) {
  if (photon_outcome != 1 && photon_outcome != -1)
    throw ContractError("reinterpret_teleport_outcome: photon outcome must be +1 or -1");
  if (basis != 'Z' && basis != 'X' && basis != 'Y')
    throw ContractError(std::string("reinterpret_teleport_outcome: unknown basis '") + basis + "'");
  char correction;
  if (bell == "00") correction = 'I';
  else if (bell == "01") correction = 'X';
  else if (bell == "10") correction = 'Z';
  else if (bell == "11") correction = 'Y';
  else throw ContractError("reinterpret_teleport_outcome: bad ion outcome '" + bell + "'");
  // A Pauli correction flips the outcomes of the two bases it anticommutes with.
  const bool flips = correction != 'I' && correction != basis;
  return flips ? -photon_outcome : photon_outcome;
}

double mub_average_fidelity(const std::vector<double>& per_state) {
  if (per_state.size() != 6) throw ContractError("mub_average_fidelity: expected six fidelities");
  for (double f : per_state) require_unit_interval(f, 0, "MUB fidelity");
  return std::accumulate(per_state.begin(), per_state.end(), 0.0) / 6.0;
}

double kolmogorov_pvalue(double d, std::size_t n) {
  if (n == 0) throw ContractError("kolmogorov_pvalue: empty sample");
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_test_exponential(std::vector<double> samples, double rate) {
  if (samples.empty()) throw ContractError("ks_test_exponential: empty sample");
  if (!(rate > 0.0)) throw ContractError("ks_test_exponential: rate must be positive");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = 1.0 - std::exp(-rate * std::max(0.0, samples[i]));
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_pvalue(d, samples.size()), samples.size()};
}

double bootstrap_stderr(const std::vector<CountsTable>& tables,
                        const std::function<double(const std::vector<CountsTable>&)>& estimator,
                        int repetitions, Rng& rng) {
  if (repetitions < 2) throw ContractError("bootstrap_stderr: need at least 2 repetitions");
  std::vector<double> values;
  values.reserve(repetitions);
  for (int r = 0; r < repetitions; ++r) {
    std::vector<CountsTable> resampled;
    for (const auto& t : tables) {
      CountsTable out(t.setting());
      std::int64_t left = t.total();
      double mass = 1.0;
      const double n = static_cast<double>(t.total());
      for (const auto& [o, k] : t.outcomes()) {
        const double p = static_cast<double>(k) / n;
        const double q = mass > 0 ? std::clamp(p / mass, 0.0, 1.0) : 0.0;
        const auto draw = std::binomial_distribution<std::int64_t>(left, q)(rng);
        out.add(o, draw);
        left -= draw;
        mass -= p;
      }
      resampled.push_back(std::move(out));
    }
    values.push_back(estimator(resampled));
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return std::sqrt(var / (values.size() - 1));
}

}  // namespace ionnode::est
