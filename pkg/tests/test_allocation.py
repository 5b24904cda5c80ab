import itertools
import json
from collections import Counter
from math import ceil

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rmpa.allocation import (IupaSchedule, ProjectionAllocator, assignment_from_groups, build_ilp,
                             build_redundancy_matrix, derive_schedule, duplicate_stats, export_lp,
                             first_column, ideal_schedule, lp_text, solve_ilp, verify_assignment)
from rmpa.allocation.schedule import GROUP_KEYS, SCHEDULE_KEYS
from rmpa.gf2_spaces import compose_projection_chain, two_binomial


@pytest.mark.parametrize("m", [4, 5, 6, 7])
def test_redundancy_invariants(m):
    Dm = build_redundancy_matrix(m)
    h = (1 << (m - 1)) - 1
    assert Dm.R.shape == (h, h)
    assert len(np.unique(Dm.R)) == two_binomial(m, 2)
    right = Dm.R[:, Dm.n_d_cols:]
    assert len(np.unique(right)) == right.size
    assert not set(np.unique(right)) & set(np.unique(Dm.D))
    counts = Counter(Dm.D.ravel().tolist())
    assert set(counts.values()) == {3}


def test_rm53_sizes():
    Dm = build_redundancy_matrix(5)
    assert Dm.R.shape == (15, 15) and Dm.D.shape == (15, 7)
    assert len(np.unique(Dm.D)) == 35 and Dm.right_cols == list(range(8, 16))


def test_labels_follow_chain():
    Dm = build_redundancy_matrix(5)
    subs = Dm.subspaces
    for j in (1, 6, 15):
        for k in (2, 9):
            assert subs[Dm.R[j - 1, k - 1] - 1] == compose_projection_chain(5, j, k)
    with pytest.raises(ValueError):
        build_redundancy_matrix(3)


def test_ilp_shapes():
    model = build_ilp(build_redundancy_matrix(5), 2, 2)
    assert model.row_sizes == [7, 8]
    assert model.n_x == 2 * 105
    assert model.extra_pus == 4
    with pytest.raises(ValueError):
        build_ilp(build_redundancy_matrix(5), 3, 2)
    with pytest.raises(ValueError):
        build_ilp(build_redundancy_matrix(5), 2, 6)


def test_trivial_single_group():
    model = build_ilp(build_redundancy_matrix(5), 1, 8)
    a = solve_ilp(model, 30)
    assert a.p == [ceil(7 / 8)] == [1] and a.proven
    assert verify_assignment(model, a) == []


def test_degenerate_all_unique():
    D = np.arange(1, 13).reshape(4, 3)
    model = build_ilp(D, 2, 2)
    a = solve_ilp(model, 5)
    assert a.objective == 0 and a.proven and verify_assignment(model, a) == []
    assert "Binaries" not in lp_text(model)


def brute_optimum(D, G, lam):
    """Exhaustive minimum of sum ceil(|cols_g|/lam) over row partitions and column sets."""
    nr, nc = D.shape
    base, rem = divmod(nr, G)
    sizes = [base + (g >= G - rem) for g in range(G)]
    labels = {lab: [(j, k) for j in range(nr) for k in range(nc) if D[j, k] == lab]
              for lab in np.unique(D)}
    labels = {lab: cells for lab, cells in labels.items() if len(cells) > 1}
    best = None
    for perm in itertools.permutations(range(nr)):
        groups, s = [], 0
        for sz in sizes:
            groups.append(set(perm[s:s + sz]))
            s += sz
        if any(sorted(groups[i]) != sorted(perm[sum(sizes[:i]):sum(sizes[:i + 1])]) for i in range(G)):
            continue
        for cols in itertools.product(range(1 << nc), repeat=G):
            ok = all(any((cols[g] >> k) & 1 for j, k in cells for g in range(G) if j in groups[g])
                     for cells in labels.values())
            if ok:
                v = sum(ceil(bin(c).count("1") / lam) for c in cols)
                best = v if best is None else min(best, v)
    return best


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([(2, 1), (2, 2), (1, 2)]))
def test_solver_matches_brute_force(seed, glam):
    G, lam = glam
    rng = np.random.default_rng(seed)
    D = rng.integers(1, 7, size=(4, 3))
    model = build_ilp(D, G, lam)
    a = solve_ilp(model, 20)
    assert verify_assignment(model, a) == []
    assert a.proven and a.objective == brute_optimum(D, G, lam)


def test_verifier_catches_violations():
    model = build_ilp(build_redundancy_matrix(5), 2, 4)
    a = solve_ilp(model, 30)
    assert verify_assignment(model, a) == []
    bad = assignment_from_groups(model, a.rows, a.cols)
    bad.p = [0, 0]
    assert any("exceed" in e for e in verify_assignment(model, bad))
    lab = next(iter(bad.x))
    g, j, k = bad.x.pop(lab)
    assert any(f"label {lab}" in e for e in verify_assignment(model, bad))
    swapped = assignment_from_groups(model, a.rows, a.cols)
    swapped.rows = [swapped.rows[1], swapped.rows[0]]
    assert verify_assignment(model, swapped)


def test_rm53_g2_lam4():
    alloc = ProjectionAllocator(m=5, G=2, lam=4, time_limit=60).fit()
    assert alloc.assignment_.objective == 2 and alloc.assignment_.proven
    assert alloc.violations_ == [] and alloc.get_params()["lam"] == 4


def test_lp_text_deterministic(tmp_path):
    model = build_ilp(build_redundancy_matrix(5), 2, 2)
    a, b = export_lp(model, tmp_path / "a.lp"), export_lp(model, tmp_path / "b.lp")
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    order = [text.index(s) for s in ("Minimize", "Subject To", "Bounds", "Generals", "Binaries", "End")]
    assert order == sorted(order)


@pytest.mark.parametrize("G,lam,expected", [(2, 4, 2), (2, 2, 4)])
def test_external_solver_round_trip(tmp_path, G, lam, expected):
    highspy = pytest.importorskip("highspy")
    model = build_ilp(build_redundancy_matrix(5), G, lam)
    path = export_lp(model, tmp_path / "m.lp")
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.readModel(str(path))
    h.run()
    assert round(h.getInfo().objective_function_value) == expected
    ours = solve_ilp(model, 120)
    assert ours.proven and ours.objective == expected


def test_derive_schedule_and_json(tmp_path):
    Dm = build_redundancy_matrix(5)
    alloc = ProjectionAllocator(m=5, G=2, lam=4, time_limit=60).fit()
    s = alloc.schedule_
    assert len(s.coverage()) == two_binomial(5, 2)
    for g, grp in enumerate(s.groups):
        assert set(Dm.right_cols) <= set(grp.cols)
        assert grp.p == ceil(len(alloc.assignment_.cols[g]) / 4) + 2
    assert s.groups[0].dummy and len(s.groups[0].rows) == 7
    s.save(tmp_path / "s.json")
    d = json.loads((tmp_path / "s.json").read_text())
    assert tuple(d) == SCHEDULE_KEYS and tuple(d["groups"][0]) == GROUP_KEYS
    assert IupaSchedule.load(tmp_path / "s.json") == s
    (tmp_path / "bad.json").write_text("{nope")
    with pytest.raises(ValueError):
        IupaSchedule.load(tmp_path / "bad.json")
    with pytest.raises(ValueError):
        IupaSchedule.from_dict({k: d[k] for k in SCHEDULE_KEYS if k != "groups"})


def test_first_column_examples():
    assert first_column(5) == 4 and first_column(1) == 1 and first_column(15) == 8
    with pytest.raises(ValueError):
        first_column(0)


@pytest.mark.parametrize("m", [4, 5, 6, 7])
def test_ideal_schedule_is_duplicate_free(m):
    s = ideal_schedule(m)
    cov = s.coverage()
    assert len(cov) == two_binomial(m, 2) and set(cov.values()) == {1}
    assert s.fod_count == two_binomial(m, 2) and duplicate_stats(s) == (0, 0)
    assert s.groups[4].cols[0] == 4 and s.groups[-1].cols[-1] == (1 << (m - 1)) - 1


def test_duplicates_extra_decodings():
    Dm = build_redundancy_matrix(5)
    rows = [list(range(1, 8)), list(range(8, 16))]
    cols = [list(range(1, 8))] * 2
    model = build_ilp(Dm, 2, 8)
    s = derive_schedule(assignment_from_groups(model, rows, cols), Dm)
    extra, multi = duplicate_stats(s)
    assert extra == s.fod_count - 155 and multi <= extra
