#include "fmx/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace fmx {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool agree(Complex a, Complex b, double tol) {
  if (a == b) return true;
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

struct Point {
  int n;
  double rho;
};

// Series whose trust_order covers the (i, j) element only: the prefix of
// orders where the entry agrees with the next precision up to certify_tol.
MagnusSeries element_certified_series(const TruncatedSystem& system, int i, int j, int n_max, const ElementLimitOptions& o) {
  const Precision ref = reference_precision(o.precision);
  MagnusSeries series = magnus_series_uncertified(system, n_max, o.precision);
  const MagnusSeries reference = magnus_series_uncertified(system, n_max, ref);
  int trust = -1;
  for (int n = 0; n <= n_max; ++n) {
    const Complex lo = series.terms[static_cast<std::size_t>(n)](i, j);
    const Complex hi = reference.terms[static_cast<std::size_t>(n)](i, j);
    if (!(std::abs(lo - hi) <= o.magnus.certify_tol * std::abs(hi))) break;
    trust = n;
  }
  series.trust_order = trust;
  if (trust < n_max) {
    std::ostringstream msg;
    msg << "trust_order truncation: element (" << i << "," << j << ") at " << to_string(o.precision)
        << " precision certified against " << to_string(ref) << " up to n=" << trust << " (D=" << system.dim << ")";
    series.warnings.push_back(msg.str());
    series.terms.resize(static_cast<std::size_t>(std::max(trust, 0)) + 1);
  }
  return series;
}

MagnusSeries limit_series(const TruncatedSystem& system, int i, int j, int n_max, const ElementLimitOptions& o) {
  if (o.scope == CertifyScope::Element && o.magnus.certify && o.precision != Precision::Octuple)
    return element_certified_series(system, i, j, n_max, o);
  return magnus_series(system, n_max, o.precision, o.magnus);
}

}  // namespace

bool RatioCurve::defined(int n) const {
  return n >= 0 && n < size() && !std::isnan(values[static_cast<std::size_t>(n)]);
}

RatioCurve ratio_curve_from_magnitudes(const std::vector<double>& a, RatioKind kind, const std::vector<bool>& converged,
                                       int stride) {
  if (stride < 1) throw ParameterError("ratio curve: stride must be >= 1");
  if (!converged.empty() && converged.size() != a.size())
    throw ParameterError("ratio curve: converged flags and magnitudes differ in length");
  const int count = static_cast<int>(a.size());
  auto is_conv = [&](int n) { return converged.empty() || converged[static_cast<std::size_t>(n)]; };
  std::vector<bool> vanishing(a.size(), false);
  for (int n = 0; n < count; ++n) {
    const double v = a[static_cast<std::size_t>(n)];
    if (std::isnan(v)) continue;
    if (v <= 1e-300) {
      vanishing[static_cast<std::size_t>(n)] = true;
      continue;
    }
    const double left = n > 0 ? a[static_cast<std::size_t>(n - 1)] : kNaN;
    const double right = n + 1 < count ? a[static_cast<std::size_t>(n + 1)] : kNaN;
    const bool small_l = std::isnan(left) || v < 1e-10 * left;
    const bool small_r = std::isnan(right) || v < 1e-10 * right;
    if (small_l && small_r && !(std::isnan(left) && std::isnan(right))) vanishing[static_cast<std::size_t>(n)] = true;
  }

  RatioCurve curve;
  curve.kind = kind;
  curve.stride = stride;
  const int len = std::max(count - 1, 0);
  curve.values.assign(static_cast<std::size_t>(len), kNaN);
  curve.steps.assign(static_cast<std::size_t>(len), 0);
  curve.converged.assign(static_cast<std::size_t>(len), false);
  for (int n = 0; n < len; ++n) {
    const double an = a[static_cast<std::size_t>(n)];
    if (std::isnan(an) || vanishing[static_cast<std::size_t>(n)]) continue;
    int m = n + stride;
    while (m < count && vanishing[static_cast<std::size_t>(m)]) ++m;
    if (m >= count || std::isnan(a[static_cast<std::size_t>(m)])) continue;
    const int step = m - n;
    curve.values[static_cast<std::size_t>(n)] = std::pow(an / a[static_cast<std::size_t>(m)], 1.0 / step);
    curve.steps[static_cast<std::size_t>(n)] = step;
    curve.converged[static_cast<std::size_t>(n)] = is_conv(n) && is_conv(m);
  }
  curve.trust_order = count - 1;
  return curve;
}

RatioCurve ratio_curve(const MagnusSeries& series, RatioKind kind, int i, int j, int stride) {
  if (series.available_order() < 2 || series.trust_order < 2)
    throw ParameterError("ratio_curve needs a series certified to order >= 2");
  if (kind == RatioKind::Element && (i < 0 || j < 0 || i >= series.dim || j >= series.dim))
    throw ParameterError("ratio_curve: element index out of range");
  const int top = std::min(series.available_order(), series.trust_order);
  std::vector<double> mags(static_cast<std::size_t>(top) + 1);
  for (int n = 0; n <= top; ++n) {
    const auto& omega = series.terms[static_cast<std::size_t>(n)];
    mags[static_cast<std::size_t>(n)] = kind == RatioKind::Element ? std::abs(omega(i, j)) : omega.norm();
  }
  RatioCurve curve = ratio_curve_from_magnitudes(mags, kind, {}, stride);
  curve.i = i;
  curve.j = j;
  curve.dims_used = {series.dim};
  curve.trust_order = top;
  bool any = false;
  for (int n = 0; n < curve.size(); ++n) any = any || curve.defined(n);
  if (!any) throw AnalysisError("ratio_curve: every ratio is undefined");
  return curve;
}

ElementLimitTable element_limits(const ModelSpec& spec, int i, int j, int n_max, const ElementLimitOptions& options) {
  spec.validate();
  if (n_max < 0) throw ParameterError("element_limits: order must be >= 0");
  if (options.dims.empty()) throw ParameterError("element_limits: empty dimension schedule");
  for (std::size_t k = 1; k < options.dims.size(); ++k)
    if (options.dims[k] <= options.dims[k - 1]) throw ParameterError("element_limits: dimension schedule must increase");
  if (i < 0 || j < 0 || i >= options.dims.front() || j >= options.dims.front())
    throw ParameterError("element_limits: indices must be below the smallest dimension");

  ElementLimitTable table;
  table.spec = spec;
  table.i = i;
  table.j = j;
  table.orders.assign(static_cast<std::size_t>(n_max) + 1, ElementLimit{kNaN, Complex(kNaN, kNaN), false, 0});
  std::vector<Complex> prev;
  for (int dim : options.dims) {
    const MagnusSeries series = limit_series(build_system(spec, dim), i, j, n_max, options);
    table.dims_used.push_back(dim);
    table.trust_orders.push_back(series.trust_order);
    for (const auto& w : series.warnings) table.warnings.push_back(w);
    std::vector<Complex> cur(static_cast<std::size_t>(n_max) + 1, Complex(kNaN, kNaN));
    for (int n = 0; n <= std::min(n_max, series.available_order()); ++n)
      cur[static_cast<std::size_t>(n)] = series.terms[static_cast<std::size_t>(n)](i, j);
    bool all = true;
    for (int n = 0; n <= n_max; ++n) {
      auto& e = table.orders[static_cast<std::size_t>(n)];
      const Complex c = cur[static_cast<std::size_t>(n)];
      if (std::isnan(c.real())) {
        e.converged = false;
      } else {
        const bool ok = !prev.empty() && !std::isnan(prev[static_cast<std::size_t>(n)].real()) &&
                        agree(prev[static_cast<std::size_t>(n)], c, options.tol);
        e = ElementLimit{std::abs(c), c, ok, dim};
      }
      all = all && e.converged;
    }
    prev = std::move(cur);
    if (all && options.stop_when_converged) break;
  }
  std::vector<int> open;
  for (int n = 0; n <= n_max; ++n)
    if (!table.orders[static_cast<std::size_t>(n)].converged) open.push_back(n);
  if (!open.empty()) {
    std::ostringstream msg;
    msg << "unconverged limit: element (" << i << "," << j << ") of Omega_n did not converge over D in {";
    for (std::size_t k = 0; k < table.dims_used.size(); ++k) msg << (k ? "," : "") << table.dims_used[k];
    msg << "} at tol " << options.tol << " for n in {";
    for (std::size_t k = 0; k < open.size(); ++k) msg << (k ? "," : "") << open[k];
    msg << "}";
    table.warnings.push_back(msg.str());
  }
  return table;
}

ElementLimit element_limit(const ModelSpec& spec, int i, int j, int n, const ElementLimitOptions& options) {
  return element_limits(spec, i, j, n, options).orders.back();
}

RatioCurve ElementLimitTable::ratios(int stride) const {
  std::vector<double> mags;
  std::vector<bool> conv;
  for (const auto& e : orders) {
    mags.push_back(e.value);
    conv.push_back(e.converged);
  }
  RatioCurve curve = ratio_curve_from_magnitudes(mags, RatioKind::Element, conv, stride);
  curve.i = i;
  curve.j = j;
  curve.dims_used = dims_used;
  return curve;
}

double tail_ratio(const RatioCurve& curve, int n_lo, int n_hi) {
  double log_sum = 0.0;
  int weight = 0;
  for (int n = std::max(n_lo, 0); n <= std::min(n_hi, curve.size() - 1); ++n) {
    if (!curve.usable(n)) continue;
    const int step = curve.steps[static_cast<std::size_t>(n)];
    log_sum += step * std::log(curve.values[static_cast<std::size_t>(n)]);
    weight += step;
  }
  if (weight == 0) throw AnalysisError("tail_ratio: no usable ratio in the requested order range");
  return std::exp(log_sum / weight);
}

std::optional<Plateau> detect_plateau(const RatioCurve& curve, double rel_eps, int min_len) {
  if (min_len < 2) throw ParameterError("detect_plateau: min_len must be >= 2");
  std::optional<Plateau> best;
  std::vector<Point> run;
  auto close_run = [&]() {
    if (static_cast<int>(run.size()) >= min_len && (!best || static_cast<int>(run.size()) > best->length)) {
      std::vector<double> v;
      for (const auto& p : run) v.push_back(p.rho);
      std::sort(v.begin(), v.end());
      const std::size_t h = v.size() / 2;
      const double median = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
      best = Plateau{median, run.front().n, run.back().n, static_cast<int>(run.size())};
    }
    run.clear();
  };
  for (int n = 0; n < curve.size(); ++n) {
    if (!curve.defined(n)) continue;  // structurally vanishing order
    if (!curve.usable(n)) {
      close_run();
      continue;
    }
    const double rho = curve.values[static_cast<std::size_t>(n)];
    if (!run.empty() && !(std::abs(rho / run.back().rho - 1.0) < rel_eps)) close_run();
    run.push_back({n, rho});
  }
  close_run();
  return best;
}

namespace {

// Usable points from the first usable n, stopping at the first defined but
// unusable point.
std::vector<Point> usable_points(const RatioCurve& curve) {
  std::vector<Point> pts;
  for (int n = 0; n < curve.size(); ++n) {
    if (!curve.defined(n)) continue;
    if (!curve.usable(n)) {
      if (!pts.empty()) break;
      continue;
    }
    pts.push_back({n, curve.values[static_cast<std::size_t>(n)]});
  }
  return pts;
}

}  // namespace

std::optional<int> detect_asymptotic_start(const RatioCurve& curve, int window, double smooth_tol) {
  if (window < 2) throw ParameterError("asymptotic window must hold at least 2 points");
  const auto pts = usable_points(curve);
  for (std::size_t s = 0; s + static_cast<std::size_t>(window) <= pts.size(); ++s) {
    int sign = 0;
    bool ok = true;
    for (std::size_t k = s; k + 1 < s + static_cast<std::size_t>(window) && ok; ++k) {
      const double d = pts[k + 1].rho - pts[k].rho;
      const int sk = d > 0 ? 1 : (d < 0 ? -1 : 0);
      if (sk != 0) {
        if (sign != 0 && sk != sign) ok = false;
        sign = sk;
      }
      const double a = pts[k].n * pts[k].rho;
      const double b = pts[k + 1].n * pts[k + 1].rho;
      if (!(std::abs(b / a - 1.0) < smooth_tol)) ok = false;
    }
    if (ok) return pts[s].n;
  }
  return std::nullopt;
}

DecayFit decay_fit(const RatioCurve& curve, const DecayFitOptions& options) {
  int n_min = 0;
  if (options.n_min) {
    n_min = *options.n_min;
  } else {
    const auto start = detect_asymptotic_start(curve, options.window, options.smooth_tol);
    if (!start) throw AnalysisError("decay_fit: no asymptotic regime found within the usable orders");
    n_min = *start;
  }
  std::vector<Point> pts;
  for (const auto& p : usable_points(curve))
    if (p.n >= n_min && p.n > 0) pts.push_back(p);
  if (pts.size() < 6)
    throw AnalysisError("decay_fit: fewer than 6 usable ratios from n = " + std::to_string(n_min));
  DecayFit fit;
  fit.n_min_asymptotic = n_min;
  fit.n_last = pts.back().n;
  fit.points = static_cast<int>(pts.size());
  for (const auto& p : pts) {
    const double c = p.n * p.rho;
    if (c > fit.c_beta) {
      fit.c_beta = c;
      fit.n_at_sup = p.n;
    }
  }
  if (!(fit.c_beta > 0.0) || !std::isfinite(fit.c_beta)) throw AnalysisError("decay_fit: non-positive slope");
  return fit;
}

KappaFit fit_kappa(const std::vector<double>& betas, const std::vector<double>& c) {
  if (betas.size() != c.size()) throw ParameterError("fit_kappa: inputs differ in length");
  if (betas.size() < 4) throw ParameterError("fit_kappa: at least 4 beta values are required");
  const std::size_t k = betas.size();
  std::vector<double> x(k);
  for (std::size_t a = 0; a < k; ++a) {
    if (!(betas[a] > 0.0 && betas[a] < 1.0)) throw ParameterError("fit_kappa: beta must lie in (0, 1)");
    x[a] = -std::log(betas[a]);
  }
  double sxx = 0.0, sxy = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    sxx += x[a] * x[a];
    sxy += x[a] * c[a];
    sx += x[a];
    sy += c[a];
  }
  KappaFit fit;
  fit.points = static_cast<int>(k);
  fit.kappa = sxy / sxx;
  double rss = 0.0;
  for (std::size_t a = 0; a < k; ++a) rss += std::pow(c[a] - fit.kappa * x[a], 2);
  fit.kappa_stderr = std::sqrt(rss / static_cast<double>(k - 1) / sxx);
  const double n = static_cast<double>(k);
  const double denom = n * sxx - sx * sx;
  fit.slope_affine = (n * sxy - sx * sy) / denom;
  fit.intercept_affine = (sy - fit.slope_affine * sx) / n;
  return fit;
}

Bandwidth bandwidth_heuristic(const TruncatedSystem& system, double T) {
  if (!(T > 0.0)) throw ParameterError("period T must be > 0");
  auto width = [](const RealMatrix& h) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("bandwidth_heuristic: eigensolver failed");
    return es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
  };
  Bandwidth out;
  out.w = 0.5 * (width(system.h0 + system.h1) + width(system.h0 - system.h1));
  out.tc_estimate = out.w > 0.0 ? 1.0 / out.w : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace fmx
