import numpy as np
import pytest

import deploysentinel as ds


def test_keccak_and_selector():
    # empty-input keccak256 and the ERC-20 transfer selector are well known
    assert ds.keccak256(b"").hex() == "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"
    assert ds.selector("transfer(address,uint256)") == "0xa9059cbb"


def test_keccak_matches_pycryptodome():
    keccak = pytest.importorskip("Crypto.Hash.keccak")
    rng = np.random.default_rng(3)
    for n in (0, 1, 135, 136, 137, 500):
        data = rng.integers(0, 256, n, dtype=np.uint8).tobytes()
        assert ds.keccak256(data) == keccak.new(digest_bits=256, data=data).digest()


def test_assemble_disassemble_round_trip():
    code = ds.assemble("PUSH1 0x80 PUSH1 0x40 MSTORE CALLVALUE ISZERO PUSH @end JUMPI STOP end: JUMPDEST STOP")
    listing = ds.disassemble(code)
    assert [ins[1] for ins in listing][:3] == ["PUSH1", "PUSH1", "MSTORE"]
    assert listing[0][2] == "0x80"
    assert sum(1 + (len(ins[2]) - 2) // 2 if ins[2] else 1 for ins in listing) == len(code)


def test_reported_f1_values():
    assert ds.f1_score(0.9286, 0.8667) == pytest.approx(0.8966, abs=1e-4)
    assert ds.f1_score(0.8333, 0.8784) == pytest.approx(0.8553, abs=1e-4)


def test_evaluate_counts():
    r = ds.evaluate([0.9, 0.2, 0.7, 0.4], [1, 0, 0, 1])
    assert (r["tp"], r["fp"], r["tn"], r["fn"]) == (1, 1, 1, 1)
    assert r["fpr"] == pytest.approx(0.5)


def test_chrono_split_has_no_leakage():
    rng = np.random.default_rng(5)
    ts = rng.integers(0, 10_000, 200).tolist()
    base, meta, test = ds.chrono_split(ts, [f"c{i}" for i in range(200)])
    assert len(base) + len(meta) + len(test) == 200
    assert max(ts[i] for i in base + meta) <= min(ts[i] for i in test)
    assert len(test) == 40 and len(meta) == 40


def test_adasyn_points_lie_on_minority_segments():
    rng = np.random.default_rng(1)
    X = np.vstack([rng.normal(0, 1, (40, 2)), rng.normal(2, 0.5, (8, 2))])
    y = [0] * 40 + [1] * 8
    Xa, ya, g = ds.adasyn(X, y, 1.0, 3, 7)
    assert np.allclose(Xa[:48], X)
    assert len(ya) - 48 == sum(g)
    minority = X[40:]
    for s in Xa[48:]:
        # some pair of minority points has s on its segment
        ok = False
        for a in minority:
            for b in minority:
                d = b - a
                if np.allclose(d, 0):
                    continue
                lam = np.dot(s - a, d) / np.dot(d, d)
                if -1e-9 <= lam <= 1 + 1e-9 and np.allclose(a + lam * d, s, atol=1e-9):
                    ok = True
        assert ok


def test_fund_trace():
    a = "0x" + "11" * 20
    b = "0x" + "22" * 20
    ex = "0x" + "ee" * 20
    graph = f"{b} -> {a} block=10 index=0 value=1\n{ex} -> {b} block=5 index=0 value=1\n"
    labels = f"{ex},Binance,Safe\n"
    assert ds.trace_fund_source(graph, labels, a) == ("Safe", 2, "label")
    assert ds.trace_fund_source(graph, labels, a, max_depth=1)[0] == "Unknown"


def test_analyze_bytecode_reports():
    code = ds.assemble(
        "PUSH1 0x80 PUSH1 0x40 MSTORE PUSH1 0x00 CALLDATALOAD PUSH1 0xe0 SHR "
        "DUP1 PUSH4 0xa9059cbb EQ PUSH @t JUMPI STOP t: JUMPDEST STOP"
    )
    report = ds.analyze_bytecode(code)
    assert report["status"] == "ok"
    assert report["exit_code"] == 0
    assert report["prediction"] is None
    assert report["implementation"]["public_func_count"] == 1
    assert all(v >= 0 for v in report["timings"].values())
    assert ds.analyze_bytecode(b"")["exit_code"] == 2


def test_pscft_is_deterministic():
    code = ds.assemble("PUSH1 0x00 CALLDATALOAD PUSH1 0xe0 SHR DUP1 PUSH4 0x12345678 EQ PUSH @f JUMPI STOP f: JUMPDEST STOP")
    texts = {ds.pscft(code) for _ in range(5)}
    assert len(texts) == 1
    assert "function" in ds.tokenize(texts.pop())


def test_synthetic_dataset_statistics():
    rows = ds.synthetic_dataset(2000, seed=2)
    adv = [r for r in rows if r["label"] == 1]
    ben = [r for r in rows if r["label"] == 0]
    anon = sum(r["deployment"]["fund_source"] == "Anonymous" for r in adv) / len(adv)
    verified = sum(r["deployment"]["verified"] for r in ben) / len(ben)
    assert anon > 0.7
    assert verified > 0.85
    ts = [r["deploy_timestamp"] for r in rows]
    assert ts == sorted(ts)
