#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "subspace_uq/dilation.hpp"

namespace subspace_uq {

// One index tuple of the order-k perturbation term: k+1 non-negative parts
// summing to k. tau counts the positive parts; the term enters the series
// with sign (-1)^(1+tau).
struct Composition {
  std::vector<int> s;
  int tau = 0;
  int sign = 0;
};

// Number of weak compositions of k into k+1 parts, C(2k, k).
std::uint64_t composition_count(int k);

// All compositions of order k in lexicographic order. Guarded to k <= 30;
// the count grows as C(2k, k), so materializing beyond k ~ 12 is impractical.
std::vector<Composition> enumerate_compositions(int k);

// Streams the same sequence without materializing it. f receives the parts
// and tau.
void for_each_composition(int k,
                          const std::function<void(const std::vector<int>&,
                                                   int tau)>& f);

// Largest k accepted by the series evaluators below. C(2k,k) terms are
// evaluated per order, which is still tractable at k = 12 for small d.
inline constexpr int kMaxSeriesOrder = 12;

// Verifies ||X|| = ||Z|| < lambda_r / 2 and returns ||Z||.
// Throws SnrGateError otherwise.
double check_snr_gate(const SymmetricDilation& dilation, const Matrix& z);

// The order-k term of the spectral-projector perturbation series, as a dense
// (d1+d2)^2 matrix: the signed sum over compositions of
// P^{-s1} X P^{-s2} X ... X P^{-s_{k+1}} with X the dilated noise.
//
// Terms are evaluated right-to-left on tall-thin blocks (each term has rank
// at most 2r) and summed in lexicographic order over a fixed chunk grid, so
// the result is bitwise independent of the number of threads.
Matrix series_term(const SymmetricDilation& dilation, const Matrix& z, int k);

// A single composition's product P^{-s1} X ... X P^{-s_{k+1}}, sign included.
// Its operator norm is bounded by (||X|| / lambda_r)^k.
Matrix series_single_term(const SymmetricDilation& dilation, const Matrix& z,
                          const Composition& composition);

// <Theta Theta^T, series_term(k)>. Compositions whose first or last part is
// zero contribute exactly zero and are skipped.
double series_term_signal_inner(const SymmetricDilation& dilation,
                                const Matrix& z, int k);

// Sum of the series terms for k = 1..max_order: the truncated approximation
// of hatTheta hatTheta^T - Theta Theta^T, with tail bounded by
// sum_{k>K} (4 ||X|| / lambda_r)^k in operator norm.
Matrix truncated_projector_delta(const SymmetricDilation& dilation,
                                 const Matrix& z, int max_order);

// dist^2 split into the quadratic leading term and the higher-order tail:
//   leading = 2 ||P_perp X P^{-1}||_F^2
//   tail    = -2 sum_{k=3}^{K} <Theta Theta^T, series_term(k)>
// leading + tail approximates dist^2[(hatU, hatV), (U, V)] with tail bound
// 4r sum_{k>K} (4||X||/lambda_r)^k.
struct Dist2Decomposition {
  double leading = 0.0;
  double tail = 0.0;
  // <Theta Theta^T, series_term(k)> for k = 3..max_order.
  std::vector<double> signal_inner_products;

  double total() const { return leading + tail; }
};

Dist2Decomposition dist2_series_decomposition(const SymmetricDilation& dilation,
                                              const Matrix& z, int max_order);

// Recommended truncation depth, ceil(log d_max).
int default_series_order(const Dims& dims);

}  // namespace subspace_uq
