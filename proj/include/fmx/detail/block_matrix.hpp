#pragma once

// Dense real matrices stored in a parity-sorted basis: even basis indices
// first, then odd. Each of the four parity blocks is either materialized or
// structurally zero, and products skip the zero blocks. When the Hamiltonian
// has a definite parity every BCH term lives in only two of the four blocks.

#include <array>
#include <cstddef>
#include <type_traits>
#include <vector>

#include "fmx/numeric/real.hpp"

namespace fmx::detail {

template <class T>
class BlockMatrix {
 public:
  BlockMatrix() = default;
  explicit BlockMatrix(int dim) : dim_(dim), size_{(dim + 1) / 2, dim / 2} {}

  int dim() const { return dim_; }
  int sector_size(int p) const { return size_[p]; }
  bool has(int p, int q) const { return !blocks_[index(p, q)].empty(); }

  const std::vector<T>& block(int p, int q) const { return blocks_[index(p, q)]; }
  std::vector<T>& ensure(int p, int q) {
    auto& b = blocks_[index(p, q)];
    if (b.empty()) b.assign(static_cast<std::size_t>(size_[p]) * static_cast<std::size_t>(size_[q]), T(0.0));
    return b;
  }
  void drop(int p, int q) { std::vector<T>().swap(blocks_[index(p, q)]); }

  /// Entry in the original basis ordering.
  T at(int i, int j) const {
    const int p = i % 2;
    const int q = j % 2;
    if (!has(p, q)) return T(0.0);
    return block(p, q)[static_cast<std::size_t>(i / 2) * static_cast<std::size_t>(size_[q]) + static_cast<std::size_t>(j / 2)];
  }
  void set(int i, int j, const T& v) {
    const int p = i % 2;
    const int q = j % 2;
    ensure(p, q)[static_cast<std::size_t>(i / 2) * static_cast<std::size_t>(size_[q]) + static_cast<std::size_t>(j / 2)] = v;
  }

 private:
  static int index(int p, int q) { return 2 * p + q; }

  int dim_ = 0;
  std::array<int, 2> size_{0, 0};
  std::array<std::vector<T>, 4> blocks_;
};

// ci[0..p) += aik * bk[0..p). The extended types are read and written through
// their double components: with the class accessors GCC does not vectorize
// the loop, with plain double loads it does (about 3x faster).
template <class T>
inline void row_update(T* __restrict ci, const T* __restrict bk, const T& aik, int p) {
  if constexpr (std::is_same_v<T, numeric::DoubleDouble>) {
    static_assert(sizeof(T) == 2 * sizeof(double) && std::is_standard_layout_v<T>);
    double* c = reinterpret_cast<double*>(ci);
    const double* b = reinterpret_cast<const double*>(bk);
    for (int j = 0; j < p; ++j) {
      T v = T(c[2 * j], c[2 * j + 1]) + aik * T(b[2 * j], b[2 * j + 1]);
      c[2 * j] = v.hi();
      c[2 * j + 1] = v.lo();
    }
  } else if constexpr (std::is_same_v<T, numeric::QuadDouble>) {
    static_assert(sizeof(T) == 4 * sizeof(double) && std::is_standard_layout_v<T>);
    double* c = reinterpret_cast<double*>(ci);
    const double* b = reinterpret_cast<const double*>(bk);
    for (int j = 0; j < p; ++j) {
      const double* bj = b + 4 * j;
      double* cj = c + 4 * j;
      T v = T(cj[0], cj[1], cj[2], cj[3]) + aik * T(bj[0], bj[1], bj[2], bj[3]);
      for (int r = 0; r < 4; ++r) cj[r] = v[r];
    }
  } else if constexpr (std::is_same_v<T, numeric::Octuple>) {
    for (int j = 0; j < p; ++j) numeric::fma_into(ci[j], aik, bk[j]);
  } else {
    for (int j = 0; j < p; ++j) ci[j] += aik * bk[j];
  }
}

/// c (n x p) += a (n x k) * b (k x p), row-major.
template <class T>
void gemm_acc(T* __restrict c, const T* __restrict a, const T* __restrict b, int n, int k, int p) {
  for (int i = 0; i < n; ++i) {
    T* ci = c + static_cast<std::size_t>(i) * p;
    for (int kk = 0; kk < k; ++kk)
      row_update(ci, b + static_cast<std::size_t>(kk) * p, a[static_cast<std::size_t>(i) * k + kk], p);
  }
}

/// c += a * b. Only output blocks allowed by `mask` (bit 2p+q) are formed.
template <class T>
void multiply_add(BlockMatrix<T>& c, const BlockMatrix<T>& a, const BlockMatrix<T>& b, unsigned mask = 0xF) {
  for (int p = 0; p < 2; ++p) {
    for (int q = 0; q < 2; ++q) {
      if (!(mask & (1u << (2 * p + q)))) continue;
      for (int r = 0; r < 2; ++r) {
        if (!a.has(p, r) || !b.has(r, q)) continue;
        if (a.sector_size(r) == 0) continue;
        auto& out = c.ensure(p, q);
        gemm_acc(out.data(), a.block(p, r).data(), b.block(r, q).data(), a.sector_size(p), a.sector_size(r),
                 b.sector_size(q));
      }
    }
  }
}

/// y += alpha * x.
template <class T>
void axpy(BlockMatrix<T>& y, const T& alpha, const BlockMatrix<T>& x) {
  for (int p = 0; p < 2; ++p) {
    for (int q = 0; q < 2; ++q) {
      if (!x.has(p, q)) continue;
      auto& out = y.ensure(p, q);
      const auto& in = x.block(p, q);
      for (std::size_t e = 0; e < in.size(); ++e) out[e] += alpha * in[e];
    }
  }
}

template <class T>
void scale(BlockMatrix<T>& y, const T& alpha) {
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q)
      if (y.has(p, q))
        for (auto& v : y.ensure(p, q)) v = v * alpha;
}

/// Keep only the blocks of parity `parity` (+1: diagonal blocks, -1: off-diagonal).
template <class T>
void project_parity(BlockMatrix<T>& y, int parity) {
  if (parity > 0) {
    y.drop(0, 1);
    y.drop(1, 0);
  } else if (parity < 0) {
    y.drop(0, 0);
    y.drop(1, 1);
  }
}

inline unsigned parity_mask(int parity) {
  if (parity > 0) return 0b1001;  // (0,0) and (1,1)
  if (parity < 0) return 0b0110;  // (0,1) and (1,0)
  return 0xF;
}

}  // namespace fmx::detail
