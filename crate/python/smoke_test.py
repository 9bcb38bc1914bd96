#!/usr/bin/env python3
"""Smoke test for the psdsense extension module.

Build the module first (see build.sh in this directory), then run:

    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import psdsense as ps  # noqa: E402


def check(label, ok, detail=""):
    status = "ok" if ok else "FAIL"
    print(f"[{status}] {label}{': ' + str(detail) if detail else ''}")
    if not ok:
        sys.exit(1)


def main():
    # --- linalg kernels -----------------------------------------------------
    m = ps.HermitianMatrix([[2.0, 1.0], [1.0, 3.0]])
    check("real matrix construction", m.field == "real" and m.n == 2)

    values, _vectors = m.eig()
    disc = math.sqrt(1.25)
    expected = [2.5 + disc, 2.5 - disc]
    check(
        "eigenvalues of [[2,1],[1,3]]",
        all(abs(a - b) < 1e-12 for a, b in zip(values, expected)),
        f"{values}",
    )

    c = ps.HermitianMatrix([[1.0, 1j], [-1j, -1.0]])
    check("complex matrix construction", c.field == "complex")
    proj = c.psd_project()
    twice = proj.psd_project()
    check("psd_project idempotent", proj.fro_dist(twice) < 1e-12)
    check("psd_project nonnegative", proj.min_eigenvalue() >= -1e-10)

    # --- real sensing: generate, solve, compare solvers ---------------------
    n, meas, seed = 8, 80, 7
    mp = ps.SensingMap.wishart(n, meas, seed=seed)
    truth = ps.ground_truth(n, 1, seed=seed + 1)
    b = mp.apply(truth.matrix)
    check("wishart map", mp.family == "wishart" and mp.m == meas)

    reports = {
        name: ps.solve(mp, b, name, truth=truth)
        for name in ("pgd_psd", "nuclear_psd", "min_fro_norm")
    }
    for name, rep in reports.items():
        check(
            f"{name} recovers planted matrix",
            rep.converged and rep.dist_full < 1e-4,
            f"iters={rep.iters} dist={rep.dist_full:.3e}",
        )

    scale = 1.0 + truth.matrix.fro_norm()
    pairs = [("pgd_psd", "nuclear_psd"), ("pgd_psd", "min_fro_norm")]
    for a, bname in pairs:
        d = reports[a].x_hat.fro_dist(reports[bname].x_hat)
        check(f"{a} and {bname} agree", d < 1e-2 * scale, f"fro_dist={d:.3e}")

    # --- whitening and the trace certificate --------------------------------
    w = ps.whiten(mp, b)
    check("identity residual after whitening", w.identity_residual() < 1e-8)
    tc = w.verify_trace_invariance(truth.matrix)
    check("trace certificate on the planted matrix", tc.passed, repr(tc))
    tc2 = w.verify_trace_invariance(reports["nuclear_psd"].x_hat)
    check("trace certificate on a solver output", tc2.passed, repr(tc2))

    # --- restricted-isometry estimate ---------------------------------------
    est = ps.estimate_rip(w.whitened_map(), 1, samples=200, seed=11)
    check("rank-1 RIP estimate below 1", est.delta_hat < 1.0, repr(est))
    sc = ps.check_rip_scaling(w.whitened_map(), 1, gamma=3, samples=200, seed=12)
    check("RIP scaling comparison ran", sc.rank_hi == 3, repr(sc))

    # --- complex sensing: Pauli measurements --------------------------------
    pauli = ps.SensingMap.pauli(3, 40, seed=5)
    ptruth = ps.ground_truth(8, 1, seed=6, normalized=True, field="complex")
    pb = pauli.apply(ptruth.matrix)
    prep = ps.solve(pauli, pb, "pgd_psd", truth=ptruth, max_iters=30000)
    check(
        "pauli recovery (complex field)",
        prep.converged and prep.dist_full < 1e-4,
        f"iters={prep.iters} dist={prep.dist_full:.3e}",
    )

    print("smoke test passed")


if __name__ == "__main__":
    main()
