#include "subspace_uq/identities.hpp"

#include <gmpxx.h>

#include <stdexcept>

#include "subspace_uq/errors.hpp"

namespace subspace_uq {

namespace {

mpz_class binom(long n, long k) {
  if (k < 0 || k > n) return 0;
  mpz_class out;
  mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n),
               static_cast<unsigned long>(k));
  return out;
}

mpz_class sign_pow(long e) { return (e % 2 == 0) ? 1 : -1; }

// sum_{t=0}^{k0-1} (-1)^t C(k0+t, t+1) C(k0-1, t)
mpz_class identity_a_sum(long k0) {
  mpz_class sum = 0;
  for (long t = 0; t <= k0 - 1; ++t)
    sum += sign_pow(t) * binom(k0 + t, t + 1) * binom(k0 - 1, t);
  return sum;
}

// sum_{t=1}^{k0-1} (-1)^t C(k0+t-2, t-1) C(k0-1, t)
mpz_class identity_b_sum(long k0) {
  mpz_class sum = 0;
  for (long t = 1; t <= k0 - 1; ++t)
    sum += sign_pow(t) * binom(k0 + t - 2, t - 1) * binom(k0 - 1, t);
  return sum;
}

mpz_class ipow(const mpz_class& base, long e) {
  mpz_class out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), static_cast<unsigned long>(e));
  return out;
}

// E_{2k0,t} = (-1)^t C(k0+t-1, t) [ d1m^k0 C(k0-1, t-1)
//                                   - d1m^(k0-1) d2m C(k0-1, t+1) ].
mpz_class e2k0_term(long k0, long t, const mpz_class& d1m,
                    const mpz_class& d2m) {
  const mpz_class lead = binom(k0 + t - 1, t);
  return sign_pow(t) * lead *
         (ipow(d1m, k0) * binom(k0 - 1, t - 1) -
          ipow(d1m, k0 - 1) * d2m * binom(k0 - 1, t + 1));
}

mpz_class e2k0_expansion(long k0, const mpz_class& d1m, const mpz_class& d2m) {
  mpz_class sum = 0;
  for (long t = 0; t <= k0; ++t) sum += e2k0_term(k0, t, d1m, d2m);
  return sum;
}

mpz_class e2k0_closed_form(long k0, const mpz_class& d1m,
                           const mpz_class& d2m) {
  return sign_pow(k0) * ipow(d1m, k0 - 1) * (d1m - d2m);
}

}  // namespace

IdentityReport identity_checks(int k0_max) {
  if (k0_max < 1 || k0_max > 25)
    throw std::invalid_argument("identity_checks: need 1 <= k0_max <= 25");

  // Dimension pairs for the reconstruction check, covering unbalanced,
  // balanced, and degenerate (zero) complements.
  const std::pair<long, long> dim_pairs[] = {
      {94, 594}, {49, 149}, {7, 3}, {100, 100}, {0, 37}, {1, 1}};

  IdentityReport report;
  report.k0_max = k0_max;
  report.all_passed = true;

  for (int k0 = 1; k0 <= k0_max; ++k0) {
    IdentityRow row;
    row.k0 = k0;
    row.identity_a = identity_a_sum(k0) == sign_pow(k0 - 1);
    // Identity B and the closed-form reconstruction hold from k0 = 2.
    if (k0 >= 2) {
      row.identity_b = identity_b_sum(k0) == sign_pow(k0 - 1);
      row.e2k_reconstruction = true;
      for (const auto& [a, b] : dim_pairs) {
        if (e2k0_expansion(k0, a, b) != e2k0_closed_form(k0, a, b)) {
          row.e2k_reconstruction = false;
          break;
        }
      }
    } else {
      // Base case: the expansion collapses to its single t = 1 term, -d1m.
      row.identity_b = true;
      row.e2k_reconstruction = true;
      for (const auto& [a, b] : dim_pairs) {
        if (e2k0_expansion(1, a, b) != -mpz_class(a))
          row.e2k_reconstruction = false;
      }
    }
    if (!(row.identity_a && row.identity_b && row.e2k_reconstruction)) {
      report.all_passed = false;
      if (report.first_failure.empty())
        report.first_failure =
            "identity failure at k0 = " + std::to_string(k0) +
            (row.identity_a ? "" : " [A]") + (row.identity_b ? "" : " [B]") +
            (row.e2k_reconstruction ? "" : " [E]");
    }
    report.rows.push_back(row);
  }

  if (!report.all_passed) throw ConsistencyError(report.first_failure);
  return report;
}

}  // namespace subspace_uq
