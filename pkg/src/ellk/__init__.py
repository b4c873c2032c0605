"""Arbitrary-precision toolkit for moments of complete elliptic integrals.

Subpackages by capability:

    numerics   -- big-float arithmetic with error tracking: AGM, K(m),
                  Gamma, zeta, Dirichlet L, tanh-sinh quadrature,
                  Legendre polynomials, hypergeometric partial sums
    qseries    -- exact arithmetic over Q(sqrt(2)), Kronecker characters,
                  Gauss sums, Bernoulli numbers, and truncated q-expansions
                  (theta series, eta products, Eisenstein series, CM forms)
    spaces     -- modular-form spaces on the three groups of interest,
                  the polynomial picture of weight-k forms, Eisenstein
                  bases and the Fricke involution
    lvalues    -- numeric evaluation of forms on the imaginary axis and
                  critical L-values by two independent routes
    moments    -- the three integral families and their evaluation
    relations  -- PSLQ integer-relation detection over Z and Z[sqrt(2)],
                  numeric rank, basis expression, dimension bounds
    appendix   -- Fourier-Legendre coefficients, the 9F8 series route,
                  and the mod-p^6 supercongruence check
    verify     -- registry of named checks driving the `ellk verify` CLI
"""

__version__ = "0.1.0"
