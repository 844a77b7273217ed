"""Smoke test for the stratdef Python bindings.

Build and install first:
    pip install maturin
    cd crates/py && maturin develop --release
"""
import stratdef_py as sd

f = sd.Formula("(and (<= x0 1) (>= (* a0 x0) a1))")
assert f.evaluate(x=["1/2"], a=["2", "1"])
assert not f.evaluate(x=["2"], a=["2", "1"])
print("formula:", f, f.complexity())

t = sd.transform("halfspace:l=2", "lp:l=2,p=2,r=1")
print("transform: F_out =", t["F_out"], "D_out =", t["D_out"])
assert t["F_out"] >= 1 and t["D_out"] >= 1

print("fm_elim:", sd.fm_elim("(exists (w0) (and (<= x0 w0) (<= w0 (+ x1 1))))", ["w0"]))

inst = sd.verify_blowup("fixed", 3)
assert len(inst["candidates"]) == 3
print("blowup n=3: candidates", inst["candidates"])

assert sd.label("threshold", ["0"], ["1"]) is True
assert sd.sauer_bound(10, 2)[0] == 56
assert sd.erm_threshold("1", 1, "1/2", "1/2") == 17
assert sd.sign_patterns([["-1", "0", "1"]]) == sorted(sd.sign_patterns([["-1", "0", "1"]]))
assert len(sd.sign_patterns([["-1", "0", "1"]])) == 3
assert sd.emd(["1", "0", "0"], ["0", "0", "1"]) == "2"
print("ok")
