#include <cmath>
#include <set>

#include "ionnode/estim.hpp"

namespace ionnode::est {

namespace {

void require_distinct(const std::vector<double>& x, std::size_t n, const char* who) {
  if (std::set<double>(x.begin(), x.end()).size() < n)
    throw ContractError(std::string(who) + ": need at least " + std::to_string(n) + " distinct abscissae");
}

}  // namespace

FitResult fit_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& weights) {
  const std::size_t n = x.size();
  if (y.size() != n || (!weights.empty() && weights.size() != n))
    throw ContractError("fit_line: input lengths differ");
  require_distinct(x, 2, "fit_line");
  const bool weighted = !weights.empty();
  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weighted ? weights[i] : 1.0;
    if (!(w >= 0.0) || !std::isfinite(w)) throw ContractError("fit_line: weights must be finite and >= 0");
    s += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double delta = s * sxx - sx * sx;
  if (!(delta > 0.0)) throw ContractError("fit_line: degenerate design");
  FitResult fr;
  const double slope = (s * sxy - sx * sy) / delta;
  const double intercept = (sxx * sy - sx * sxy) / delta;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - intercept - slope * x[i];
    rss += (weighted ? weights[i] : 1.0) * r * r;
  }
  double scale = 1.0;
  if (!weighted) scale = n > 2 ? rss / static_cast<double>(n - 2) : 0.0;
  fr.params["slope"] = slope;
  fr.params["intercept"] = intercept;
  fr.errors["slope"] = std::sqrt(scale * s / delta);
  fr.errors["intercept"] = std::sqrt(scale * sxx / delta);
  fr.residual = rss;
  return fr;
}

FitResult fit_ramsey(const std::vector<double>& times, const std::vector<double>& contrasts,
                     const std::vector<double>& contrast_errors, bool fix_amplitude) {
  if (times.size() != contrasts.size() || (!contrast_errors.empty() && contrast_errors.size() != times.size()))
    throw ContractError("fit_ramsey: input lengths differ");
  std::vector<double> t, y, w;
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) throw ContractError("fit_ramsey: times must be positive");
    if (!(contrasts[i] > 0.0)) {
      warnings.push_back("dropped nonpositive contrast at t=" + std::to_string(times[i]));
      continue;
    }
    t.push_back(times[i]);
    y.push_back(std::log(contrasts[i]));
    if (!contrast_errors.empty()) {
      const double rel = contrast_errors[i] / contrasts[i];
      w.push_back(rel > 0 ? 1.0 / (rel * rel) : 1.0);
    }
  }
  if (t.size() < 3) throw ContractError("fit_ramsey: need at least 3 usable points");
  FitResult fr;
  double slope = 0, slope_err = 0, amp = 1, amp_err = 0, rss = 0;
  if (fix_amplitude) {
    double stt = 0, sty = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double wi = w.empty() ? 1.0 : w[i];
      stt += wi * t[i] * t[i];
      sty += wi * t[i] * y[i];
    }
    slope = sty / stt;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double r = y[i] - slope * t[i];
      rss += (w.empty() ? 1.0 : w[i]) * r * r;
    }
    const double scale = w.empty() ? rss / static_cast<double>(t.size() - 1) : 1.0;
    slope_err = std::sqrt(scale / stt);
  } else {
    const auto line = fit_line(t, y, w);
    slope = line.at("slope");
    slope_err = line.error_of("slope");
    amp = std::exp(line.at("intercept"));
    amp_err = amp * line.error_of("intercept");
    rss = line.residual;
  }
  if (!(slope < 0.0)) throw ContractError("fit_ramsey: contrast does not decay");
  fr.params["T2"] = -1.0 / slope;
  fr.errors["T2"] = slope_err / (slope * slope);
  fr.params["A"] = amp;
  fr.errors["A"] = amp_err;
  fr.residual = rss;
  fr.warnings = std::move(warnings);
  return fr;
}

FitResult fit_conversion(const std::vector<double>& n_values, const std::vector<double>& avg_fidelities,
                         const std::vector<double>& errors) {
  std::vector<double> w;
  for (double e : errors) w.push_back(e > 0 ? 1.0 / (e * e) : 1.0);
  const auto line = fit_line(n_values, avg_fidelities, w);
  FitResult fr;
  fr.params["eps0"] = 1.0 - line.at("intercept");
  fr.errors["eps0"] = line.error_of("intercept");
  fr.params["eps"] = -line.at("slope");
  fr.errors["eps"] = line.error_of("slope");
  fr.residual = line.residual;
  if (fr.params["eps"] < 0.0) fr.warnings.push_back("negative conversion error");
  return fr;
}

FitResult fit_heating(const std::vector<HeatingSample>& samples) {
  std::vector<double> x, y, w;
  bool weighted = !samples.empty();
  for (const auto& s : samples) {
    x.push_back(s.n_attempts);
    y.push_back(s.nbar);
    if (!(s.error > 0.0)) weighted = false;
  }
  if (weighted)
    for (const auto& s : samples) w.push_back(1.0 / (s.error * s.error));
  return fit_line(x, y, w);
}

}  // namespace ionnode::est
