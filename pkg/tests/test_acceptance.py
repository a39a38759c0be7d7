"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v -s`` (or execute this file directly)
to see the summary lines.
"""
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from proctheory.audit import AuditConfig, reconstruction_roundtrip, run_audit, split_into_kernel_states
from proctheory.backends import MatCategory, MatMorphism, RelCategory, spek_closure, spek_pure_exclusion_witness
from proctheory.catcore import check_laws
from proctheory.cpm import (
    CpmCategory,
    choi_distance,
    cp_axiom_check,
    dbl,
    essential_uniqueness_witness,
    marginal,
    purify,
    random_channel,
    stinespring,
)
from proctheory.kernels import (
    KernelSpace,
    check_atomicity,
    check_covering_law,
    check_image_meet_lemma,
    check_orthomodular,
)
from proctheory.phased import (
    check_phase_centrality,
    check_phase_generator,
    check_phased_coproducts,
    check_positive_freeness_and_cancellation,
    check_quotient_soundness,
    positive_freeness_witness,
)
from proctheory.scalars import get_backend
from proctheory.subcausal import (
    TestMorphism,
    check_test_category,
    coarse_grain,
    is_causal_mat,
    random_substochastic,
    total_rep_equal,
    totalise_pcm,
    unit_interval_pcm,
)

C = get_backend("float_complex")
QN = get_backend("rat_nonneg")


def _line(number: int, title: str, ok: bool, detail: str) -> str:
    return f"criterion {number} {title}: {'PASS' if ok else 'FAIL'} ({detail})"


def _emit(capsys, line: str):
    if capsys is None:
        print(line)
        return
    with capsys.disabled():
        print("\n" + line)


# ---------------------------------------------------------------------------


def criterion_1():
    cats = [
        (MatCategory("bool"), 4),
        (MatCategory("nat"), 4),
        (MatCategory("rat"), 4),
        (MatCategory("gauss_rat"), 4),
        (RelCategory(), 5),
        (MatCategory("float_complex"), 4),
        (CpmCategory("float_complex"), 4),
    ]
    t0 = time.perf_counter()
    bad = []
    families = 0
    for cat, max_dim in cats:
        tol = None if cat.exact else 1e-8
        for name, rep in check_laws(cat, "all", seed=42, budget=200, max_dim=max_dim, tol=tol).items():
            families += 1
            if not rep.passed or rep.samples != 200:
                bad.append(f"{cat.name}:{name}")
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 60
    return ok, f"{families} law families x 200 samples in {elapsed:.1f} s; failing: {bad or 'none'}"


def criterion_2():
    bad = []
    for space in (KernelSpace("float_complex", 4), KernelSpace("bool", 5)):
        tol = 1e-8 if space.route == "float" else None
        for check in (check_orthomodular, check_atomicity, check_covering_law, check_image_meet_lemma):
            rep = check(space, samples=200, tol=tol)
            if not rep.passed or rep.samples < 200:
                bad.append(f"{space}:{rep.check}")
    return not bad, f"orthocomplement, orthomodularity, atomicity, covering, image lemma; failing: {bad or 'none'}"


def criterion_3():
    rng = np.random.default_rng(2024)
    worst_marg, worst_eu = 0.0, 0.0
    for _ in range(100):
        n, m = (int(x) for x in rng.integers(1, 4, size=2))
        f = random_channel(C, rng, n, m)
        p = purify(f)
        k = p.n_out // m
        worst_marg = max(worst_marg, choi_distance(marginal(p, m, k), f))
        # an independent purification into a larger environment
        w = np.linalg.qr(C.random_array(rng, k + 1, k))[0]
        v, _ = stinespring(f)
        q = dbl(MatMorphism(C, np.kron(np.eye(m), w) @ v.data))
        _, res = essential_uniqueness_witness(p, q, m)
        worst_eu = max(worst_eu, res)
    agree = 0
    for i in range(100):
        f = MatMorphism(C, C.random_array(rng, 3, 2))
        if i % 2:
            u = np.linalg.qr(C.random_array(rng, 3, 3))[0]
            g = MatMorphism(C, u @ f.data)
        else:
            g = MatMorphism(C, C.random_array(rng, 3, 2))
        lhs, rhs = cp_axiom_check(f, g)
        agree += lhs == rhs
    ok = worst_marg <= 1e-8 and worst_eu <= 1e-6 and agree == 100
    return ok, f"marginal {worst_marg:.1e}, uniqueness residual {worst_eu:.1e}, CP axiom {agree}/100"


def criterion_4():
    parts = []
    ok = True
    for theory in ("cpmC", "cpmR"):
        rep = run_audit(AuditConfig(backend=theory, dims=(1, 2, 3), samples=200))
        ok &= rep.passed
        parts.append(f"{theory} {'pass' if rep.passed else 'fail'}")
    for mutant in ("non_isometric_kernels", "non_central_phases"):
        rep = run_audit(AuditConfig(backend="cpmC", dims=(1, 2, 3), samples=50, mutant=mutant))
        caught = [e for e in rep.entries if e.status == "fail" and e.witnesses]
        ok &= bool(caught)
        parts.append(f"{mutant} caught by {len(caught)} check(s)")
    return ok, "; ".join(parts)


def criterion_5():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        n, m = (int(x) for x in rng.integers(1, 4, size=2))
        _, dev = reconstruction_roundtrip(random_channel(C, rng, n, m))
        worst = max(worst, dev)
    dims = [len(split_into_kernel_states(C, n)) for n in range(5)]
    ok = worst <= 1e-7 and dims == [0, 1, 2, 3, 4]
    return ok, f"worst Choi distance {worst:.1e}; recovered dims {dims}"


def criterion_6():
    t0 = time.perf_counter()
    spek = spek_closure(1, budget=100_000)
    states = [s for s in spek.states(1) if not s.is_zero()]
    cards = {s.cardinality() for s in states}
    excl = all(spek_pure_exclusion_witness(s, spek) is not None for s in states)
    mspek = spek_closure(1, mixed=True, budget=100_000)
    mcards = {s.cardinality() for s in mspek.states(1) if not s.is_zero()}
    elapsed = time.perf_counter() - t0
    # n = 2 is budgeted: every state generated within the budget must have cardinality 4
    big = spek_closure(2, budget=5_000)
    cards2 = {s.cardinality() for s in big.states(2) if not s.is_zero()}
    ok = (spek.saturated and mspek.saturated and cards == {2} and min(mcards) >= 2 and excl
          and elapsed < 30 and cards2 == {4})
    return ok, (f"saturated {spek.saturated}/{mspek.saturated}, Spek cards {sorted(cards)}, MSpek cards "
                f"{sorted(mcards)}, exclusion {excl}, {elapsed:.1f} s; n=2 cards {sorted(cards2)}")


def criterion_7():
    half, one = Fraction(1, 2), Fraction(1)
    t = totalise_pcm(unit_interval_pcm(2), max_word=6)
    elems = (Fraction(0), half, one)
    distinct = all(not t.same([x], [y]) for i, x in enumerate(elems) for y in elems[i + 1:])
    down = t.verify_downset() == []
    fact = t.verify_totalisation_fact() == []
    rng = np.random.default_rng(7)
    hits = 0
    for _ in range(50):
        f = random_substochastic(QN, rng, 2, 2)
        q = Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 9)))
        r = Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 9)))
        # r·(q·f) = (r·q)·f, and perturbing the weight breaks the equivalence
        same = total_rep_equal((f.scale(q), r), (f, r * q))
        differ = not np.any(f.data != 0) or not total_rep_equal((f.scale(q), r), (f, r * q + 1))
        hits += same and differ
    ok = distinct and down and fact and hits == 50
    return ok, f"distinct {distinct}, downset {down}, totalisation fact {fact}, pair equivalences {hits}/50"


def criterion_8():
    bad = []
    for kind in ("finset", "stochastic"):
        rep = check_test_category(kind, max_dim=4, samples=200)
        if not rep.passed:
            bad.append(kind)
    rng = np.random.default_rng(8)
    causal = 0
    for _ in range(200):
        n, m, k = (int(x) for x in rng.integers(1, 5, size=3))
        # k sub-causal events scaled by 1/k leave room for a completing event
        events = [random_substochastic(QN, rng, n, m).scale(Fraction(1, k)) for _ in range(k)]
        used = [sum((sum(ev.data[:, j], Fraction(0)) for ev in events), Fraction(0)) for j in range(n)]
        rest = QN.zeros(m, n)
        rest[0, :] = [1 - u for u in used]
        events.append(MatMorphism(QN, rest))
        t = TestMorphism.from_events(events)
        causal += t.is_test() and is_causal_mat(coarse_grain(t))
    ok = not bad and causal == 200
    return ok, f"finset/stochastic failing: {bad or 'none'}; causal coarse-grainings {causal}/200"


def criterion_9():
    reps = [
        check_quotient_soundness(samples=200, max_dim=4),
        check_phased_coproducts(samples=200, max_dim=4),
        check_phase_generator("circle", samples=200, max_dim=4),
        check_phase_centrality("circle", samples=200),
        check_positive_freeness_and_cancellation("float_complex", samples=200, max_dim=4),
    ]
    bad = [r.check for r in reps if not r.passed]
    counter = check_positive_freeness_and_cancellation("gauss_rat_trivial", samples=50, max_dim=4)
    w = positive_freeness_witness("gauss_rat_trivial")
    b = get_backend("gauss_rat_trivial")
    witness_ok = w is not None and w.equal(MatMorphism(b, b.array([[1, 0], [0, -1]])))
    ok = not bad and not counter.passed and witness_ok
    return ok, f"failing: {bad or 'none'}; trivial involution fails with diag(1, -1): {witness_ok}"


CRITERIA = [
    (1, "law suites", criterion_1),
    (2, "kernel lattices", criterion_2),
    (3, "CPM purification", criterion_3),
    (4, "principle audits", criterion_4),
    (5, "reconstruction", criterion_5),
    (6, "Spekkens closure", criterion_6),
    (7, "totalisation", criterion_7),
    (8, "test categories", criterion_8),
    (9, "phased machinery", criterion_9),
]


@pytest.mark.parametrize("number,title,fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, fn, capsys):
    ok, detail = fn()
    _emit(capsys, _line(number, title, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for number, title, fn in CRITERIA:
        ok, detail = fn()
        _emit(None, _line(number, title, ok, detail))
        results.append(ok)
    sys.exit(0 if all(results) else 1)
