#include "fmx/magnus.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "fmx/detail/block_matrix.hpp"
#include "fmx/numeric/real.hpp"

namespace fmx {

using detail::BlockMatrix;

std::string_view to_string(Precision p) {
  switch (p) {
    case Precision::Double: return "double";
    case Precision::Extended: return "extended";
    case Precision::Quad: return "quad";
    case Precision::Octuple: return "octuple";
  }
  return "unknown";
}

Precision parse_precision(std::string_view name) {
  if (name == "double") return Precision::Double;
  if (name == "extended" || name == "dd") return Precision::Extended;
  if (name == "quad" || name == "qd") return Precision::Quad;
  if (name == "octuple") return Precision::Octuple;
  throw ParameterError("unknown precision '" + std::string(name) + "' (expected double, extended, quad or octuple)");
}

Precision reference_precision(Precision p) {
  switch (p) {
    case Precision::Double: return Precision::Extended;
    case Precision::Extended: return Precision::Quad;
    default: return Precision::Octuple;
  }
}

BchFactors BchFactors::step_protocol(const TruncatedSystem& system) {
  BchFactors f;
  f.x = Complex(0.0, -0.5) * (system.h0 - system.h1).cast<Complex>();
  f.y = Complex(0.0, -0.5) * (system.h0 + system.h1).cast<Complex>();
  return f;
}

void BchFactors::validate(double tol) const {
  if (x.rows() != x.cols() || y.rows() != y.cols() || x.rows() != y.rows() || x.rows() == 0)
    throw ValidationError("BCH factors must be square matrices of equal size");
  auto skew_defect = [](const ComplexMatrix& m) {
    const double n = m.norm();
    return n == 0.0 ? 0.0 : (m + m.adjoint()).norm() / n;
  };
  if (!(skew_defect(x) <= tol) || !(skew_defect(y) <= tol))
    throw ValidationError("BCH factors must be anti-Hermitian");
}

std::vector<ComplexMatrix> klarsfeld_terms(const BchFactors& f, int order) {
  if (order < 1) throw ParameterError("klarsfeld_terms: order must be >= 1");
  f.validate();
  const Eigen::Index d = f.x.rows();
  const ComplexMatrix zero = ComplexMatrix::Zero(d, d);

  // xs[k] = X^k / k!, ys[k] = Y^k / k!
  std::vector<ComplexMatrix> xs(static_cast<std::size_t>(order) + 1), ys(xs.size());
  xs[0] = ys[0] = ComplexMatrix::Identity(d, d);
  for (int k = 1; k <= order; ++k) {
    xs[k] = xs[k - 1] * f.x / static_cast<double>(k);
    ys[k] = ys[k - 1] * f.y / static_cast<double>(k);
  }

  std::vector<ComplexMatrix> r(static_cast<std::size_t>(order) + 1);
  // q[n][m] = Q_n^{(m)} for 2 <= m <= n; Q_n^{(1)} is r[n].
  std::vector<std::vector<ComplexMatrix>> q(static_cast<std::size_t>(order) + 1);
  double inv_fact = 1.0;
  std::vector<double> inv_factorial(static_cast<std::size_t>(order) + 1, 1.0);
  for (int m = 1; m <= order; ++m) inv_factorial[m] = (inv_fact /= m);

  for (int n = 1; n <= order; ++n) {
    ComplexMatrix p = zero;
    for (int k = 0; k <= n; ++k) p.noalias() += xs[n - k] * ys[k];
    q[n].resize(static_cast<std::size_t>(n) + 1);
    for (int m = 2; m <= n; ++m) {
      ComplexMatrix qm = zero;
      for (int l = 1; l <= n - m + 1; ++l) {
        const ComplexMatrix& rhs = (m - 1 == 1) ? r[n - l] : q[n - l][m - 1];
        qm.noalias() += r[l] * rhs;
      }
      p -= inv_factorial[m] * qm;
      q[n][m] = std::move(qm);
    }
    r[n] = std::move(p);
  }
  r.erase(r.begin());
  return r;
}

namespace {

// The recursion in real arithmetic. With X = -iA and Y = -iB every term is
// homogeneous, R_n = (-i)^n S_n, and S_n follows the same recursion with A, B.
// When h0 is parity-even and h1 has parity sigma, S_n has parity sigma^(n+1)
// and Q_n^{(m)} has parity sigma^(n+m); the other blocks are dropped.
template <class T>
std::vector<BlockMatrix<T>> klarsfeld_real(const BlockMatrix<T>& a, const BlockMatrix<T>& b, int order, int sigma) {
  const int d = a.dim();
  auto parity_of = [sigma](int power) { return sigma == 0 ? 0 : ((sigma < 0 && power % 2 != 0) ? -1 : 1); };

  std::vector<BlockMatrix<T>> xs(static_cast<std::size_t>(order) + 1, BlockMatrix<T>(d));
  std::vector<BlockMatrix<T>> ys(xs.size(), BlockMatrix<T>(d));
  for (int i = 0; i < d; ++i) {
    xs[0].set(i, i, T(1.0));
    ys[0].set(i, i, T(1.0));
  }
  for (int k = 1; k <= order; ++k) {
    multiply_add(xs[k], xs[k - 1], a);
    multiply_add(ys[k], ys[k - 1], b);
    scale(xs[k], T(1.0) / T(static_cast<double>(k)));
    scale(ys[k], T(1.0) / T(static_cast<double>(k)));
  }

  std::vector<T> inv_factorial(static_cast<std::size_t>(order) + 1, T(1.0));
  for (int m = 1; m <= order; ++m) inv_factorial[m] = inv_factorial[m - 1] / T(static_cast<double>(m));

  std::vector<BlockMatrix<T>> r(static_cast<std::size_t>(order) + 1, BlockMatrix<T>(d));
  std::vector<std::vector<BlockMatrix<T>>> q(static_cast<std::size_t>(order) + 1);
  for (int n = 1; n <= order; ++n) {
    const int par_n = parity_of(n + 1);
    BlockMatrix<T> s(d);
    const unsigned mask = detail::parity_mask(par_n);
    for (int k = 0; k <= n; ++k) multiply_add(s, xs[n - k], ys[k], mask);
    q[n].assign(static_cast<std::size_t>(n) + 1, BlockMatrix<T>(d));
    for (int m = 2; m <= n; ++m) {
      BlockMatrix<T>& qm = q[n][m];
      const unsigned qmask = detail::parity_mask(parity_of(n + m));
      for (int l = 1; l <= n - m + 1; ++l) {
        const BlockMatrix<T>& rhs = (m - 1 == 1) ? r[n - l] : q[n - l][m - 1];
        multiply_add(qm, r[l], rhs, qmask);
      }
      axpy(s, T(0.0) - inv_factorial[m], qm);
    }
    project_parity(s, par_n);
    r[n] = std::move(s);
  }
  r.erase(r.begin());
  return r;
}

// Parity of a real matrix in the number basis: +1 if only i+j even entries
// are non-zero, -1 if only i+j odd, 0 if mixed. The zero matrix counts as +1.
int matrix_parity(const RealMatrix& m) {
  bool even = false, odd = false;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) ((i + j) % 2 == 0 ? even : odd) = true;
  if (even && odd) return 0;
  return odd ? -1 : 1;
}

template <class T>
void fill_factors(const TruncatedSystem& system, BlockMatrix<T>& a, BlockMatrix<T>& b) {
  const int d = system.dim;
  // Rebuild the entries at working precision when the system is a plain model
  // realization; otherwise promote the double matrices as given.
  std::vector<T> h0, h1;
  bool rebuilt = false;
  if (system.spec.is_oscillator() && system.basis == BasisKind::HarmonicOscillator) {
    auto e = detail::oscillator_entries<T>(system.spec, d);
    double dev = 0.0;
    const double scale0 = std::max(1.0, system.h0.cwiseAbs().maxCoeff());
    const double scale1 = std::max(1.0, system.h1.cwiseAbs().maxCoeff());
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * d + j;
        dev = std::max(dev, std::abs(numeric::to_double(e.h0[k]) - system.h0(i, j)) / scale0);
        dev = std::max(dev, std::abs(numeric::to_double(e.h1[k]) - system.h1(i, j)) / scale1);
      }
    }
    if (dev < 1e-13) {
      h0 = std::move(e.h0);
      h1 = std::move(e.h1);
      rebuilt = true;
    }
  }
  if (!rebuilt) {
    h0.resize(static_cast<std::size_t>(d) * d);
    h1.resize(h0.size());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        h0[static_cast<std::size_t>(i) * d + j] = T(system.h0(i, j));
        h1[static_cast<std::size_t>(i) * d + j] = T(system.h1(i, j));
      }
  }
  const T half(0.5);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * d + j;
      const T av = (h0[k] - h1[k]) * half;
      const T bv = (h0[k] + h1[k]) * half;
      if (numeric::to_double(av) != 0.0 || numeric::to_double(bv) != 0.0) {
        a.set(i, j, av);
        b.set(i, j, bv);
      }
    }
  }
}

template <class T>
MagnusSeries run_engine(const TruncatedSystem& system, int order, Precision precision) {
  const int d = system.dim;
  int sigma = 0;
  if (matrix_parity(system.h0) == 1) sigma = matrix_parity(system.h1);

  BlockMatrix<T> a(d), b(d);
  fill_factors(system, a, b);
  if (sigma == 0) {
    // No usable symmetry: materialize every block so the engine runs dense.
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) {
        a.ensure(p, q);
        b.ensure(p, q);
      }
  }
  const auto s = klarsfeld_real(a, b, order + 1, sigma);

  MagnusSeries out;
  out.dim = d;
  out.order = order;
  out.precision = precision;
  out.trust_order = order;
  out.parity = sigma;
  out.terms.reserve(static_cast<std::size_t>(order) + 1);
  for (int n = 0; n <= order; ++n) {
    // Omega_n = i R_{n+1} = (-i)^n S_{n+1}
    static constexpr Complex kPhase[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    const Complex phase = kPhase[n % 4];
    const auto& sn = s[static_cast<std::size_t>(n)];
    // S_{n+1} is exactly symmetric (n even) or antisymmetric (n odd), which
    // makes Omega_n Hermitian. Rounding breaks this at high orders, so the
    // matching part is kept, in working precision, before conversion.
    const T half(0.5);
    const bool odd = n % 2 != 0;
    ComplexMatrix omega(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const T v = odd ? (sn.at(i, j) - sn.at(j, i)) * half : (sn.at(i, j) + sn.at(j, i)) * half;
        omega(i, j) = phase * numeric::to_double(v);
      }
    out.terms.push_back(std::move(omega));
  }
  return out;
}


}  // namespace

MagnusSeries magnus_series_uncertified(const TruncatedSystem& system, int order, Precision precision) {
  if (order < 0) throw ParameterError("Magnus order must be >= 0");
  if (system.basis == BasisKind::Momentum || !system.spec.is_oscillator())
    throw ParameterError("Magnus series is defined for the step-driven oscillators only");
  if (system.dim < 2) throw ParameterError("dimension must be >= 2");
  switch (precision) {
    case Precision::Double: return run_engine<double>(system, order, precision);
    case Precision::Extended: return run_engine<numeric::DoubleDouble>(system, order, precision);
    case Precision::Quad: return run_engine<numeric::QuadDouble>(system, order, precision);
    case Precision::Octuple: return run_engine<numeric::Octuple>(system, order, precision);
  }
  throw ParameterError("unknown precision");
}

std::vector<double> precision_deviation(const MagnusSeries& lower, const MagnusSeries& higher) {
  if (lower.dim != higher.dim) throw ParameterError("precision comparison needs series of equal dimension");
  const std::size_t n = std::min(lower.terms.size(), higher.terms.size());
  std::vector<double> dev(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double ref = higher.terms[k].norm();
    const double diff = (lower.terms[k] - higher.terms[k]).norm();
    dev[k] = ref == 0.0 ? (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()) : diff / ref;
  }
  return dev;
}

int certify_precision(const MagnusSeries& lower, const MagnusSeries& higher, double tol) {
  const auto dev = precision_deviation(lower, higher);
  int trust = -1;
  for (std::size_t k = 0; k < dev.size(); ++k) {
    if (!(dev[k] < tol)) break;
    trust = static_cast<int>(k);
  }
  return trust;
}

MagnusSeries magnus_series(const TruncatedSystem& system, int order, Precision precision, const MagnusOptions& options) {
  MagnusSeries series = magnus_series_uncertified(system, order, precision);
  if (!options.certify) {
    series.warnings.push_back("Magnus series at " + std::string(to_string(precision)) +
                              " precision was not cross-checked; trust_order is nominal");
    return series;
  }
  if (precision == Precision::Octuple) {
    series.warnings.push_back("octuple precision has no higher reference; trust_order is nominal");
    return series;
  }
  const Precision ref = reference_precision(precision);
  const MagnusSeries reference = magnus_series_uncertified(system, order, ref);
  series.trust_order = certify_precision(series, reference, options.certify_tol);
  if (series.trust_order < order) {
    std::ostringstream msg;
    msg << "trust_order truncation: requested order " << order << ", " << to_string(precision)
        << " precision certified against " << to_string(ref) << " up to n=" << series.trust_order << " (D=" << system.dim
        << ", tol " << options.certify_tol << ")";
    series.warnings.push_back(msg.str());
    series.terms.resize(static_cast<std::size_t>(std::max(series.trust_order, 0)) + 1);
  }
  return series;
}

ComplexMatrix truncated_floquet_hamiltonian(const MagnusSeries& series, double T, int max_order) {
  if (max_order < 0 || max_order > series.available_order())
    throw ParameterError("truncated_floquet_hamiltonian: order beyond the available terms");
  ComplexMatrix h = ComplexMatrix::Zero(series.dim, series.dim);
  double tn = 1.0;
  for (int n = 0; n <= max_order; ++n) {
    h += tn * series.terms[static_cast<std::size_t>(n)];
    tn *= T;
  }
  return h;
}

}  // namespace fmx
