# Randomized convergence scanning across two-sex operators.
#
# Convergence to the absorbing vertex is proved when the males are
# exactly {1} (any m).  Whether EVERY two-sex operator converges the same
# way is open for other partitions; the scanner samples random operators
# and starts there and reports what it sees.  Evidence, never proof.

from qsodyn import conjecture_scan

# Certified regime: single female, single male (m = 2).
report = conjecture_scan(m=2, trials=200, iterations=30, tol=1e-8, seed=11, females={2})
print(f"m=2, F={{2}} (proved regime):   converged {report.converged}/{report.trials}")

# Certified regime: males {1}, females {2..5}.
report = conjecture_scan(m=5, trials=200, iterations=30, tol=1e-8, seed=12, females={2, 3, 4, 5})
print(f"m=5, F={{2..5}} (proved regime): converged {report.converged}/{report.trials}")

# Open regime: a genuinely mixed partition.
report = conjecture_scan(m=4, trials=500, iterations=50, tol=1e-8, seed=13, females={2, 3})
print(f"m=4, F={{2,3}} (open regime):   converged {report.converged}/{report.trials}")
print(f"  worst trial: seed={report.worst_case.seed} final_dist={report.worst_case.final_dist:.2e}")
print(f"  {report.note}")

# Sweep every partition of m=4 round-robin.
report = conjecture_scan(m=4, trials=280, iterations=50, tol=1e-8, seed=14, f_policy="all")
print(f"m=4, all partitions:           converged {report.converged}/{report.trials}")

# Determinism: the same seed reproduces every trial bit for bit, and each
# trial depends only on (seed, trial index), so runs can be sliced or
# parallelized without changing the outcome.
again = conjecture_scan(m=4, trials=280, iterations=50, tol=1e-8, seed=14, f_policy="all")
print(f"same seed, same report: {[r.final_dist for r in report.results] == [r.final_dist for r in again.results]}")
