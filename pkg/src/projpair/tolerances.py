"""Tolerance ledger.

Two tiers: exact-arithmetic claims (projection validity, admissibility,
unitarity) sit at 1e-9..1e-12; spectral claims that accumulate eigensolver
error snap at 1e-6.  Every module reads these names instead of inlining
numbers; the CLI flags --tol-rank / --tol-int override the two knobs that
make sense to override.
"""

HERMITIAN_TOL = 1e-12   # entrywise |a_ij - conj(a_ji)| bound on inputs
RANK_TOL = 1e-8         # eigenvalue clustering, relative to the matrix norm
PROJECTION_TOL = 1e-10  # ||p*-p||, ||p^2-p|| for a valid projection
UNITARY_TOL = 1e-10     # ||u*u - 1|| for constructed unitaries/isometries
RECONSTRUCT_TOL = 1e-8  # canonical-form and conjugation reconstruction error
ADMISSIBILITY_TOL = 1e-9  # |a-b - round(a-b)| for diagonal admissibility
INT_SNAP_TOL = 1e-6     # cross-route integer agreement after eigensolves
