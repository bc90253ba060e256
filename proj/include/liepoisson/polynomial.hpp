#pragma once

#include <vector>

#include "connection.hpp"
#include "expression.hpp"
#include "random.hpp"

namespace lp {

/// Random polynomial in (q, fiber) of total degree ≤ max_degree with
/// `terms` monomials and coefficients uniform in [-1, 1].
inline Expr random_polynomial(Rng& rng, int base_dim, int fiber_dim, int max_degree, int terms,
                              char fiber_letter = 'p') {
  const int nvars = base_dim + fiber_dim;
  Expr sum = Expr::constant(0.0);
  for (int t = 0; t < terms; ++t) {
    Expr mono = Expr::constant(rng.uniform(-1.0, 1.0));
    const int degree = nvars == 0 ? 0 : rng.uniform_int(0, max_degree);
    for (int d = 0; d < degree; ++d) {
      const int v = rng.uniform_int(0, nvars - 1);
      mono = mono * (v < base_dim ? Expr::variable(base_var(v))
                                  : Expr::variable(fiber_var(v - base_dim, fiber_letter)));
    }
    sum = sum + mono;
  }
  return sum;
}

/// Random polynomial of q only.
inline Expr random_base_polynomial(Rng& rng, int base_dim, int max_degree, int terms) {
  return random_polynomial(rng, base_dim, 0, max_degree, terms);
}

/// TQ-connection whose Christoffel symbols are independent random
/// polynomials in q (degree ≤ max_degree, `terms` monomials each).
inline TQConnection random_connection(Rng& rng, int base_dim, int fiber_dim, int max_degree = 2, int terms = 3) {
  if (base_dim == 0) return TQConnection::zero(0, fiber_dim);
  std::vector<Expr> entries;
  entries.reserve(static_cast<std::size_t>(fiber_dim * base_dim * fiber_dim));
  for (int k = 0; k < fiber_dim * base_dim * fiber_dim; ++k)
    entries.push_back(random_base_polynomial(rng, base_dim, max_degree, terms));
  return TQConnection::from_expressions(base_dim, fiber_dim, std::move(entries));
}

}  // namespace lp
