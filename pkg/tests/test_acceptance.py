"""Acceptance battery. Each test records one PASS/FAIL line in the session summary."""
import time

import numpy as np

from bipartite.classify import MARGINAL_HIGH, MARGINAL_LOW, classify
from bipartite.criteria import is_cq, is_ppt, is_qc, is_zero_min_a
from bipartite.linalg import herm_eig, hs_norm, offdiag_norm, pseudo_inverse, simultaneous_diagonalize
from bipartite.measures import discord_a, gmqd_a, min_a
from bipartite.sppt import extract_separable_ensemble, find_ssppt_basis, is_ssppt
from bipartite.states import (
    bell_state,
    make_circulant,
    make_cq,
    make_example3,
    make_pure_schmidt,
    make_qc,
    new_bipartite,
    random_density,
    random_state,
    random_unitary,
    ssppt_random,
    werner,
)
from fixtures import cq_not_zero_min, separable_mixture, ssppt_not_qc, zero_min_not_product

SSPPT_TOL = 1e-8
MODULUS_TOL = 1e-9


def in_band(residual, tol):
    return MARGINAL_LOW <= residual / tol <= MARGINAL_HIGH


# -- 1 ------------------------------------------------------------------------


def circulant_sample(rng, mode):
    a11, a22, b11, b22 = rng.dirichlet(np.ones(4))
    if mode == 2:
        a11 = b11 = (a11 + b11) / 2
        a22 = b22 = (a22 + b22) / 2
    cap_a, cap_b = np.sqrt(a11 * a22), np.sqrt(b11 * b22)
    ra = cap_a * rng.uniform(0.05, 0.98)
    rb = cap_b * rng.uniform(0.05, 0.98)
    if mode in (1, 2):
        ra = rb = min(cap_a, cap_b) * rng.uniform(0.05, 0.98)
    a12 = ra * np.exp(2j * np.pi * rng.random())
    b12 = rb * np.exp(2j * np.pi * rng.random())
    return a11, a22, b11, b22, a12, b12


def test_circulant_iff_conditions(acceptance):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    bad_ssppt, bad_qc, skipped = [], [], 0
    for i in range(2000):
        a11, a22, b11, b22, a12, b12 = circulant_sample(rng, i % 3)
        s = make_circulant(a11, a22, b11, b22, a12, b12)
        at = np.array([[a11, np.conj(b12)], [b12, a22]])
        bt = np.array([[b11, np.conj(a12)], [a12, b22]])
        psd = np.linalg.eigvalsh(at)[0] >= -1e-12 and np.linalg.eigvalsh(bt)[0] >= -1e-12
        expect_ssppt = psd and abs(abs(a12) - abs(b12)) <= MODULUS_TOL
        expect_qc = np.isclose(a11, b11, atol=1e-12) and np.isclose(a22, b22, atol=1e-12) and abs(abs(a12) - abs(b12)) <= MODULUS_TOL
        rep = is_ssppt(s, "b", SSPPT_TOL)
        qc = is_qc(s, SSPPT_TOL)
        if in_band(rep.residual, SSPPT_TOL) or in_band(qc.max_violation, SSPPT_TOL):
            skipped += 1
            continue
        if bool(rep) != expect_ssppt:
            bad_ssppt.append(i)
        if bool(qc) != expect_qc:
            bad_qc.append(i)
    elapsed = time.perf_counter() - t0
    ok = not bad_ssppt and not bad_qc and elapsed < 30
    acceptance(1, "circulant iff-conditions", ok,
               f"ssppt disagreements {len(bad_ssppt)}, qc disagreements {len(bad_qc)}, marginal {skipped}, {elapsed:.1f}s")
    assert ok, (bad_ssppt[:10], bad_qc[:10], elapsed)


# -- 2 ------------------------------------------------------------------------


def example3_sample(rng, kind):
    """kind 0: zero-MiN point; 1: a != b; 2: a == b but the off-diagonals differ."""
    a, b = rng.uniform(0.02, 0.31, 2)
    if kind != 1:
        b = a
    c, d = 1 / 3 - a, 1 / 3 - b

    def coupling(x, y):
        return np.sqrt(x * y) * rng.uniform(0.05, 0.95) * np.exp(2j * np.pi * rng.random())

    e = coupling(a, c)
    if kind == 0:
        return a, b, c, d, e, e, e
    return a, b, c, d, e, coupling(a, c), coupling(b, d)


def test_example3_zero_min_boundary(acceptance):
    rng = np.random.default_rng(33)
    wrong, small = [], []
    for i in range(100):
        p = example3_sample(rng, 0)
        if not is_zero_min_a(make_example3(*p)).holds:
            wrong.append(("zero", i))
    for i in range(100):
        p = example3_sample(rng, 1 + i % 2)
        s = make_example3(*p)
        if is_zero_min_a(s).holds:
            wrong.append(("violating", i))
        m = min_a(s).value
        if not m > 1e-6:
            small.append((i, m))
    ok = not wrong and not small
    acceptance(2, "example3 zero-MiN boundary", ok, f"verdict errors {len(wrong)}, violating samples with MiN <= 1e-6: {len(small)}")
    assert ok, (wrong, small)


# -- 3 ------------------------------------------------------------------------


def test_pure_state_min(acceptance):
    rng = np.random.default_rng(3)
    worst, used = 0.0, 0
    while used < 200:
        n = int(rng.integers(2, 7))
        lam = rng.random(n) + 0.01
        lam /= np.linalg.norm(lam)
        if np.min(np.diff(np.sort(lam ** 2))) < 1e-6:
            continue
        p, s = make_pure_schmidt(lam)
        worst = max(worst, abs(min_a(s).value - (1 - np.sum(lam ** 4))))
        used += 1
    ok = worst <= 1e-8
    acceptance(3, "pure-state MiN", ok, f"200 samples, max deviation {worst:.2e}")
    assert ok


# -- 4 ------------------------------------------------------------------------


def test_constructive_separability(acceptance):
    worst, npt, n = 0.0, 0, 0
    for seed in range(100):
        da, db = 2 + seed % 2, 2 + (seed // 2) % 3
        side = "ab"[seed % 2]
        s = ssppt_random(da, db, seed, side)
        ens = extract_separable_ensemble(s, side)
        worst = max(worst, ens.residual)
        if not is_ppt(new_bipartite(ens.reconstruct(), da, db)):
            npt += 1
        n += 1
    ok = worst <= 1e-8 and npt == 0
    acceptance(4, "SSPPT ensembles", ok, f"{n} states, max residual {worst:.2e}, rebuilt NPT {npt}")
    assert ok


# -- 5 ------------------------------------------------------------------------


def test_qc_and_cq_are_ssppt(acceptance):
    rng = np.random.default_rng(5)
    qc_fail = cq_fail = 0
    for _ in range(200):
        da, db = rng.integers(2, 5, 2)
        qc = make_qc(rng.dirichlet(np.ones(db)), random_unitary(db, rng), [random_density(da, rng) for _ in range(db)])
        cq = make_cq(rng.dirichlet(np.ones(da)), random_unitary(da, rng), [random_density(db, rng) for _ in range(da)])
        qc_fail += not is_ssppt(qc, "b")
        cq_fail += not is_ssppt(cq, "a")
    ok = qc_fail == 0 and cq_fail == 0
    acceptance(5, "QC => SSPPT up to B, CQ => up to A", ok, f"QC failures {qc_fail}/200, CQ failures {cq_fail}/200")
    assert ok


# -- 6 ------------------------------------------------------------------------


def test_zero_discord_equivalence(acceptance):
    rng = np.random.default_rng(6)
    cq_bad, non_bad, non_n = [], [], 0
    for i in range(100):
        db = 2 + i % 2
        s = make_cq(rng.dirichlet(np.ones(2)), random_unitary(2, rng), [random_density(db, rng) for _ in range(2)])
        d, g = discord_a(s).value, gmqd_a(s).value
        if d > 1e-6 or g > 1e-7:
            cq_bad.append((i, d, g))
    seed = 0
    while non_n < 100:
        s = random_state(2, 2 + seed % 2, seed=seed)
        seed += 1
        if is_cq(s).max_violation <= 1e-3:
            continue
        non_n += 1
        g = gmqd_a(s).value
        if g < 1e-6:
            non_bad.append((seed, g))
    ok = not cq_bad and not non_bad
    acceptance(6, "zero discord iff CQ", ok, f"CQ exceeding bounds {len(cq_bad)}/100, non-CQ with GMQD < 1e-6 {len(non_bad)}/100")
    assert ok, (cq_bad[:5], non_bad[:5])


# -- 7 ------------------------------------------------------------------------


def pt_min_eig_oracle(rho, da, db):
    r = rho.reshape(da, db, da, db).transpose(2, 1, 0, 3).reshape(da * db, da * db)
    return np.linalg.eigvalsh(r)[0]


def grid_oracle(rho, n=181):
    """Dense Bloch-sphere scan of qubit-A measurements; returns (discord, GMQD)."""

    def ent(m):
        lam = np.linalg.eigvalsh(m)
        lam = lam[lam > 1e-15]
        return -np.sum(lam * np.log2(lam))

    r = rho.reshape(2, 2, 2, 2)
    rho_a = np.einsum("aibi->ab", r)
    base = ent(rho_a) - ent(rho)
    total = np.sum(np.abs(rho) ** 2)
    best_d, best_g = np.inf, np.inf
    for theta in np.linspace(0, np.pi, n):
        for phi in np.linspace(0, 2 * np.pi, 2 * n, endpoint=False):
            u0 = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
            u1 = np.array([-np.exp(-1j * phi) * np.sin(theta / 2), np.cos(theta / 2)])
            cond, kept = 0.0, 0.0
            for u in (u0, u1):
                blk = np.einsum("a,aibj,b->ij", u.conj(), r, u)
                p = np.trace(blk).real
                kept += np.sum(np.abs(blk) ** 2)
                if p > 1e-12:
                    cond += p * ent(blk / p)
            best_d = min(best_d, base + cond)
            best_g = min(best_g, total - kept)
    return best_d, best_g


def test_ppt_threshold_and_bell_values(acceptance):
    ps = np.round(np.arange(0, 1001) * 1e-3, 12)
    first_npt = next(p for p in ps if not is_ppt(werner(p)))
    oracle_first = next(p for p in ps if pt_min_eig_oracle(werner(p).rho, 2, 2) < -1e-9)
    b = bell_state()
    d_oracle, g_oracle = grid_oracle(b.rho)
    d, g = discord_a(b).value, gmqd_a(b).value
    ok = (
        abs(first_npt - 1 / 3) <= 1e-3
        and first_npt == oracle_first
        and abs(d - 1) <= 1e-4
        and abs(g - 0.5) <= 1e-4
        and abs(d_oracle - 1) <= 1e-4
        and abs(g_oracle - 0.5) <= 1e-4
    )
    acceptance(7, "Werner PPT boundary and Bell values", ok,
               f"boundary {first_npt:.3f} (oracle {oracle_first:.3f}), discord {d:.8f} (grid {d_oracle:.8f}), GMQD {g:.8f} (grid {g_oracle:.8f})")
    assert ok


# -- 8 ------------------------------------------------------------------------


def battery_state(i, rng):
    da, db = int(rng.integers(2, 5)), int(rng.integers(2, 4))
    kind = i % 6
    if kind == 0:
        return random_state(da, db, int(rng.integers(1, da * db + 1)), seed=i)
    if kind == 1:
        return ssppt_random(da, db, i, "ab"[i % 2])
    if kind == 2:
        return make_cq(rng.dirichlet(np.ones(da)), random_unitary(da, rng), [random_density(db, rng) for _ in range(da)])
    if kind == 3:
        return make_qc(rng.dirichlet(np.ones(db)), random_unitary(db, rng), [random_density(da, rng) for _ in range(db)])
    if kind == 4:
        a11, a22, b11, b22, a12, b12 = circulant_sample(rng, i % 3)
        return make_circulant(a11, a22, b11, b22, a12, b12)
    a, b, c, d, e, f, g = example3_sample(rng, i % 3)
    return make_example3(a, b, c, d, e, f, g)


def test_chain_consistency(acceptance):
    rng = np.random.default_rng(8)
    hard, downgrades = [], 0
    for i in range(500):
        rep = classify(battery_state(i, rng))
        hard.extend((i, v) for v in rep.hard_violations)
        downgrades += len(rep.warnings)

    zm, cq, circ, mix = zero_min_not_product(), cq_not_zero_min(), ssppt_not_qc(), separable_mixture()
    r_zm, r_cq, r_circ, r_mix = classify(zm), classify(cq), classify(circ), classify(mix)
    proper = {
        "product < zero-MiN": r_zm.flags["zero_min_a"] == "yes" and r_zm.flags["product"] == "no",
        "zero-MiN < CQ": r_cq.flags["cq"] == "yes" and r_cq.flags["zero_min_a"] == "no",
        "CQ/QC < SSPPT": r_circ.flags["ssppt_b"] == "yes" and r_circ.flags["qc"] == "no" and r_circ.flags["cq"] == "no",
        "SSPPT < separable": r_mix.flags["ssppt_a"] == "no" and r_mix.flags["ssppt_b"] == "no"
        and not find_ssppt_basis(mix, "a")[1].holds and not find_ssppt_basis(mix, "b")[1].holds,
    }
    ok = not hard and all(proper.values())
    missing = [k for k, v in proper.items() if not v]
    acceptance(8, "inclusion chain", ok, f"500 states, hard violations {len(hard)}, marginal downgrades {downgrades}, missing properness witnesses {missing}")
    assert ok, (hard[:5], missing)


# -- 9 ------------------------------------------------------------------------


def test_kernel_numerics(acceptance):
    rng = np.random.default_rng(9)
    eig_worst = mp_worst = sd_worst = 0.0
    for n in range(1, 13):
        for _ in range(5):
            m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            h = m + m.conj().T
            e = herm_eig(h)
            eig_worst = max(eig_worst, hs_norm(e.reconstruct() - h) / hs_norm(h))

            r = int(rng.integers(1, n + 1))
            a = (rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))) @ (
                rng.standard_normal((r, n + 1)) + 1j * rng.standard_normal((r, n + 1))
            )
            p = pseudo_inverse(a)
            scale = max(1.0, hs_norm(a), hs_norm(p))
            for resid in (a @ p @ a - a, p @ a @ p - p, (a @ p) - (a @ p).conj().T, (p @ a) - (p @ a).conj().T):
                mp_worst = max(mp_worst, hs_norm(resid) / scale)

            w = random_unitary(n, rng)
            levels = rng.integers(0, max(1, n // 2), size=(3, n)).astype(float)
            fam = [(w * lv) @ w.conj().T for lv in levels]
            fam.append((w * np.exp(1j * rng.random(n))) @ w.conj().T)
            u = simultaneous_diagonalize(fam)
            for f in fam:
                sd_worst = max(sd_worst, offdiag_norm(u.conj().T @ f @ u))
    ok = eig_worst <= 1e-10 and mp_worst <= 1e-9 and sd_worst <= 1e-9
    acceptance(9, "kernel numerics", ok,
               f"eig reconstruction {eig_worst:.1e}, Moore-Penrose {mp_worst:.1e}, simdiag off-diagonal {sd_worst:.1e}")
    assert ok
