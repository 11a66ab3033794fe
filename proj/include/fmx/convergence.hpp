#pragma once

// Radius-of-convergence estimators for the Floquet-Magnus series: successive
// ratios of Magnus coefficients, their D -> infinity limit, plateau reading
// and the c(beta)/n decay bound.

#include <optional>
#include <string>
#include <vector>

#include "fmx/magnus.hpp"
#include "fmx/operators.hpp"

namespace fmx {

enum class RatioKind { Element, Frobenius };

/// rho_n = (|a_n| / |a_m|)^(1/(m-n)), m the first order at or beyond n + stride
/// whose coefficient does not vanish. For a parity-odd drive the element (i, j)
/// vanishes at every other order, and stepping over those orders keeps the
/// ratio a per-order quantity (rho_n -> T_c either way). When the two parity
/// classes of orders differ in size without vanishing (the parametric drive,
/// where one class is down by a power of g) the single-step ratio alternates
/// and never settles; stride 2 compares like with like.
struct RatioCurve {
  RatioKind kind = RatioKind::Element;
  int i = 0;
  int j = 0;
  std::vector<double> values;  // NaN where undefined
  std::vector<int> steps;      // m - n, 0 where undefined
  std::vector<bool> converged; // both coefficients entering rho_n are D-converged
  std::vector<int> dims_used;
  int trust_order = -1;
  int stride = 1;

  int size() const { return static_cast<int>(values.size()); }
  bool defined(int n) const;
  /// Defined and converged.
  bool usable(int n) const { return defined(n) && converged[static_cast<std::size_t>(n)]; }
};

/// Build a ratio curve from coefficient magnitudes a_0..a_N. A coefficient is
/// treated as vanishing when it is below 1e-300 or below 1e-10 times both
/// neighbours.
RatioCurve ratio_curve_from_magnitudes(const std::vector<double>& magnitudes, RatioKind kind,
                                       const std::vector<bool>& converged = {}, int stride = 1);

RatioCurve ratio_curve(const MagnusSeries& series, RatioKind kind, int i = 0, int j = 0, int stride = 1);

/// What the cross-precision check certifies in element_limits. Series uses the
/// whole-matrix trust_order of magnus_series. Element compares only the (i, j)
/// entry between the two precisions: cancellation in the recursion hits the
/// high-lying corner of Omega_n first, so a low element stays accurate many
/// orders past the Frobenius trust order.
enum class CertifyScope { Series, Element };

struct ElementLimitOptions {
  std::vector<int> dims{16, 32, 64, 128, 256};
  double tol = 1e-8;
  Precision precision = Precision::Extended;
  MagnusOptions magnus{};
  bool stop_when_converged = true;  // skip the remaining dims once every order agrees
  CertifyScope scope = CertifyScope::Series;
};

struct ElementLimit {
  double value = 0.0;  // (Omega_n)_{ij} magnitude at the last dimension evaluated
  Complex raw{};       // the complex element itself
  bool converged = false;
  int dim = 0;         // dimension the value comes from
};

/// |(Omega_n^inf)_{ij}| for n = 0..n_max: for every order the dimension is
/// increased along the schedule until two consecutive dims agree to `tol`.
/// The n-limit is never taken first.
struct ElementLimitTable {
  ModelSpec spec;
  int i = 0;
  int j = 0;
  std::vector<ElementLimit> orders;  // index n
  std::vector<int> dims_used;
  std::vector<int> trust_orders;     // per dim used
  std::vector<std::string> warnings;

  RatioCurve ratios(int stride = 1) const;
};

ElementLimitTable element_limits(const ModelSpec& spec, int i, int j, int n_max, const ElementLimitOptions& options = {});
ElementLimit element_limit(const ModelSpec& spec, int i, int j, int n, const ElementLimitOptions& options = {});

struct Plateau {
  double tc = 0.0;   // median of rho over the run
  int first_n = 0;
  int last_n = 0;
  int length = 0;    // number of points in the run
};

/// Step-weighted geometric mean of the usable rho_n with n_lo <= n <= n_hi. Over
/// a gap-free stretch this is the root-test estimate (|a_lo| / |a_hi|)^(1/(hi-lo)),
/// which smooths the oscillation of norm ratios.
double tail_ratio(const RatioCurve& curve, int n_lo, int n_hi);

/// Longest run of consecutive usable points with |rho_next/rho - 1| < rel_eps.
std::optional<Plateau> detect_plateau(const RatioCurve& curve, double rel_eps = 0.02, int min_len = 4);

struct DecayFitOptions {
  std::optional<int> n_min;      // overrides the detector
  int window = 5;                // points in the detection window
  double smooth_tol = 0.10;      // max relative step of n*rho inside the window
};

struct DecayFit {
  double c_beta = 0.0;           // sup of n * rho_n over the asymptotic regime
  int n_min_asymptotic = 0;
  int n_at_sup = 0;
  int n_last = 0;
  int points = 0;
};

/// Tangent through the origin in the (1/n, rho_n) plane. Throws AnalysisError
/// when no asymptotic regime is found.
DecayFit decay_fit(const RatioCurve& curve, const DecayFitOptions& options = {});

/// First n at which the asymptotic regime starts: the window of `window`
/// usable points from n on has monotone rho and steps of n*rho below smooth_tol.
std::optional<int> detect_asymptotic_start(const RatioCurve& curve, int window = 5, double smooth_tol = 0.10);

struct KappaFit {
  double kappa = 0.0;            // c = kappa * (-log beta), least squares through the origin
  double kappa_stderr = 0.0;
  double slope_affine = 0.0;     // slope of the affine fit c = a + s (-log beta)
  double intercept_affine = 0.0;
  int points = 0;
};

KappaFit fit_kappa(const std::vector<double>& betas, const std::vector<double>& c_values);

struct Bandwidth {
  double w = 0.0;
  double tc_estimate = 0.0;  // 1/W
};

/// W = (1/T) int (E_max - E_min) dt, which for the step protocol is the mean
/// of the spectral widths of h0 + h1 and h0 - h1.
Bandwidth bandwidth_heuristic(const TruncatedSystem& system, double T);

}  // namespace fmx
