#pragma once

#include <string>
#include <vector>

namespace subspace_uq {

// Exact integer verification of the two alternating binomial identities the
// bias ladder rests on, and of the closed-form reconstruction of the order-k0
// expansion coefficients. All arithmetic is arbitrary precision.
//
// For each k0:
//   (A) sum_{t=0}^{k0-1} (-1)^t C(k0+t, t+1) C(k0-1, t)      == (-1)^(k0-1)
//   (B) sum_{t=1}^{k0-1} (-1)^t C(k0+t-2, t-1) C(k0-1, t)    == (-1)^(k0-1)
//   (E) sum_t E_{2k0,t}(d1m, d2m) == (-1)^k0 d1m^(k0-1) (d1m - d2m), where
//       E_{2k0,t} = (-1)^t C(k0+t-1, t) [ d1m^k0 C(k0-1, t-1)
//                                         - d1m^(k0-1) d2m C(k0-1, t+1) ].
// (A) holds from k0 = 1; (B) and (E) hold from k0 = 2 (at k0 = 1 the
// expansion collapses to the single term -d1m and the closed form does not
// apply).
struct IdentityRow {
  int k0 = 0;
  bool identity_a = false;
  bool identity_b = false;
  bool e2k_reconstruction = false;
};

struct IdentityReport {
  int k0_max = 0;
  std::vector<IdentityRow> rows;
  bool all_passed = false;
  std::string first_failure;  // empty when all_passed
};

// Verifies all identities for k0 up to k0_max (1 <= k0_max <= 25).
// Throws ConsistencyError on any failure.
IdentityReport identity_checks(int k0_max);

}  // namespace subspace_uq
