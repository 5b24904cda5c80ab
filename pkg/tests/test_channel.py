import numpy as np
import pytest

from rmpa import IUPADecoder
from rmpa.channel import (BLOCK, CSV_FIELDS, JSON_FIELDS, FerRecord, block_frames, modulate_and_llr,
                          noise_variance, records_to_csv, records_to_jsonl, run_fer, run_point)
from rmpa.rm_code import RmCode, is_codeword


def test_noise_variance_formula():
    assert noise_variance(0.0, 0.5) == pytest.approx(1.0)
    assert noise_variance(10.0, 1.0) == pytest.approx(0.05)
    s2 = noise_variance(4.0, 42 / 64)
    assert s2 == pytest.approx(1 / (2 * 42 / 64 * 10 ** 0.4))
    with pytest.raises(ValueError):
        noise_variance(1.0, 0.0)


def test_llr_statistics():
    rng = np.random.default_rng(0)
    s2 = noise_variance(2.0, 0.5)
    llr = modulate_and_llr(np.zeros(200_000, dtype=np.uint8), 2.0, 0.5, rng)
    y = llr * s2 / 2
    assert np.var(y) == pytest.approx(s2, rel=0.01)
    assert np.mean(llr) == pytest.approx(2 / s2, rel=0.01)
    neg = modulate_and_llr(np.ones(10, dtype=np.uint8), 60.0, 0.5, rng)
    assert (neg < 0).all()


def test_blocks_are_codewords_and_reproducible():
    code = RmCode(5, 3)
    c1, l1 = block_frames(code, 3.0, 9, 4)
    c2, l2 = block_frames(code, 3.0, 9, 4)
    assert np.array_equal(c1, c2) and np.array_equal(l1, l2)
    assert c1.shape == (BLOCK, 32) and all(is_codeword(code, c) for c in c1[:20])
    assert c1.any()
    c3, _ = block_frames(code, 3.0, 9, 5)
    assert not np.array_equal(c1, c3)


def test_noiseless_channel_has_no_errors():
    d = IUPADecoder(m=5, n_max=2).fit()
    rec = run_point(d, 30.0, seed=1, min_frames=10_000, min_errors=1, max_frames=10_240)[-1]
    assert rec.frames == 10_240 and rec.errors == 0


def test_stop_rules():
    d = IUPADecoder(m=5, n_max=2).fit()
    rec = run_point(d, 0.0, seed=1, min_frames=1, min_errors=1, max_errors=50)[-1]
    assert rec.frames == BLOCK and rec.errors >= 1
    rec = run_point(d, 0.0, seed=1, min_frames=10**9, max_errors=300)[-1]
    assert rec.errors >= 300 and rec.errors - 300 < BLOCK
    rec = run_point(d, 6.0, seed=1, min_frames=10**9, max_frames=2 * BLOCK)[-1]
    assert rec.frames == 2 * BLOCK


def test_workers_do_not_change_results():
    d = IUPADecoder(m=5, n_max=2).fit()
    kw = dict(seed=5, min_frames=4 * BLOCK, min_errors=20)
    a = run_point(d, 2.0, workers=1, **kw)
    b = run_point(d, 2.0, workers=3, **kw)
    assert [(r.frames, r.errors) for r in a] == [(r.frames, r.errors) for r in b]


def test_iteration_records_and_monotone():
    d = IUPADecoder(m=5, n_max=3).fit()
    recs = run_fer(d, [2.0], all_iterations=True, seed=2, min_frames=2 * BLOCK, min_errors=1)
    assert [r.nmax for r in recs] == [1, 2, 3]
    assert recs[0].errors >= recs[1].errors >= recs[2].errors


def test_csv_and_jsonl_schema():
    rec = FerRecord(6, 3, "iupa", "ideal", "float", 3, 4.0, 1000, 3, 7, 1.5)
    csv_text = records_to_csv([rec])
    assert csv_text.splitlines()[0] == "m,r,decoder,schedule,quant,nmax,ebn0_db,frames,errors,fer,seed"
    assert csv_text.splitlines()[1] == "6,3,iupa,ideal,float,3,4.0,1000,3,0.003,7"
    line = records_to_jsonl([rec])
    import json
    assert tuple(json.loads(line)) == JSON_FIELDS and JSON_FIELDS[:len(CSV_FIELDS)] == CSV_FIELDS


def test_wilson_interval():
    rec = FerRecord(6, 3, "x", "-", "float", 1, 1.0, 10_000, 100, 0)
    lo, hi = rec.ci95()
    assert lo < 0.01 < hi and hi - lo == pytest.approx(2 * 1.96 * np.sqrt(0.01 * 0.99 / 10_000), rel=0.05)
    with pytest.raises(ValueError):
        FerRecord(6, 3, "x", "-", "float", 1, 1.0, 0, 0, 0)
