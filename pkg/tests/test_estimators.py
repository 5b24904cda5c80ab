import numpy as np
import pytest
from sklearn.base import clone

from rmpa import CPADecoder, IPADecoder, IUPADecoder
from rmpa.channel import block_frames
from rmpa.estimators import describe
from rmpa.rm_code import RmCode, encode


@pytest.mark.parametrize("cls", [IPADecoder, IUPADecoder, CPADecoder])
def test_params_round_trip(cls):
    d = cls(m=5, n_max=2, qformat="Q(3:2)")
    params = d.get_params()
    assert params["m"] == 5 and params["qformat"] == "Q(3:2)" and params["llr_scale"] == 0.5
    c = clone(d).set_params(n_max=3)
    assert c.get_params()["n_max"] == 3 and d.n_max == 2


@pytest.mark.parametrize("cls", [IPADecoder, IUPADecoder, CPADecoder])
def test_noiseless_predict(cls, rng):
    code = RmCode(5, 3)
    c = encode(code, rng.integers(0, 2, (6, code.k)))
    X = 3.0 * (1 - 2.0 * c)
    for q in (None, "Q(3:2)"):
        d = cls(m=5, n_max=2, qformat=q).fit()
        assert np.array_equal(d.predict(X), c)
        assert np.array_equal(d.predict(X[0]), c[0])
        assert d.score(X, c) == 1.0
        assert d.n_features_in_ == 32


def test_transform_units(rng):
    code = RmCode(5, 3)
    c = encode(code, rng.integers(0, 2, (3, code.k)))
    X = 3.0 * (1 - 2.0 * c)
    t = IUPADecoder(m=5, qformat="Q(3:2)").fit().transform(X)
    assert t.dtype == np.float64 and np.all(np.abs(t) <= 4.0)
    assert np.array_equal(t < 0, c.astype(bool))
    f = IUPADecoder(m=5).fit().transform(X)
    assert np.array_equal(f < 0, c.astype(bool))


def test_decode_result_fields():
    code = RmCode(5, 3)
    _, X = block_frames(code, 2.0, 1, 0, size=8)
    res = CPADecoder(m=5, n_max=3).fit().decode(X)
    assert res.history.shape == (8, 3, 32) and res.codewords.shape == (8, 32)
    assert np.array_equal(res.history[:, -1], res.codewords)
    assert ((res.iterations >= 1) & (res.iterations <= 3)).all()


def test_history_equals_capped_decoder():
    code = RmCode(5, 3)
    _, X = block_frames(code, 1.5, 2, 0, size=16)
    full = IUPADecoder(m=5, n_max=3).fit().decode(X).history
    for t in (1, 2):
        capped = IUPADecoder(m=5, n_max=t).fit().predict(X)
        assert np.array_equal(full[:, t - 1], capped)


@pytest.mark.parametrize("bad", [
    dict(m=1), dict(r=4), dict(n_max=0), dict(engine="gpu"), dict(qformat="Q(x)"),
    dict(llr_scale=0), dict(llr_rounding="up"),
])
def test_validation(bad):
    with pytest.raises((ValueError, TypeError)):
        IPADecoder(**{"m": 5, **bad}).fit()


def test_input_validation():
    d = IPADecoder(m=5).fit()
    with pytest.raises(ValueError):
        d.predict(np.ones((2, 16)))
    with pytest.raises(ValueError):
        d.predict(np.full(32, np.nan))
    with pytest.raises(ValueError):
        d.score(np.ones((1, 32)), np.full((1, 32), 2))
    with pytest.raises(Exception):
        IPADecoder(m=5).predict(np.ones(32))


def test_cpa_and_iupa_specific_validation(tmp_path):
    with pytest.raises(ValueError):
        CPADecoder(m=5, adder_tree="wide").fit()
    with pytest.raises(FileNotFoundError):
        IUPADecoder(m=5, schedule=str(tmp_path / "missing.json")).fit()
    with pytest.raises(TypeError):
        IUPADecoder(m=5, schedule=3).fit()
    with pytest.raises(ValueError):
        IUPADecoder(m=3).fit()


def test_describe_labels():
    assert describe(IUPADecoder(m=5).fit()) == {"decoder": "iupa", "schedule": "ideal", "quant": "float"}
    lab = describe(CPADecoder(m=5, qformat="Q(3:2)", adder_tree="sat").fit())
    assert lab["quant"] == "Q(3:2):AT-sat,Acc-sat,p7"
    assert describe(IPADecoder(m=5, qformat="Q(3:2)").fit())["quant"] == "Q(3:2):fp"
