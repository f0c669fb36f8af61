"""Smoke test for the tinylinks extension module.

Build and install first:

    maturin build --release -m crates/py/Cargo.toml -o dist
    pip install dist/tinylinks-*.whl
"""

import pathlib
import sys

import tinylinks

SAMPLES = pathlib.Path(__file__).resolve().parent.parent / "samples"


def sample(name):
    return (SAMPLES / name).read_text()


def main():
    p = tinylinks.parse(sample("buy_ok.tl"))
    assert tinylinks.parse(p.pretty()) == p
    assert p.size() > 0

    r = tinylinks.run(p)
    assert r.verdict == "wrong-free", r
    assert r.events == {"PriceIs": (5, "EA")}, r.events

    bad = tinylinks.run(sample("buy_full.tl"))
    assert bad.is_wrong, bad

    a = tinylinks.analyze(p)
    assert a.is_safe, a
    assert a.type.startswith("Xml("), a.type
    u = tinylinks.analyze(sample("buy_full.tl"))
    assert not u.is_safe and u.reason is not None, u

    s = tinylinks.Analyzer()
    first = s.analyze("Text(\"Hello!\")")
    assert first.is_safe

    # xml conflates links and forms, so the legacy rules accept a program
    # that goes wrong
    leaky = 'get(Text("Hello!"))'
    assert tinylinks.legacy_check(leaky).accepted
    assert tinylinks.run(leaky).is_wrong
    assert not tinylinks.analyze(leaky).is_safe

    rej = tinylinks.legacy_check('var _ = assert p(1); Text("Hello!")')
    assert not rej.accepted

    try:
        tinylinks.parse("fun (")
    except tinylinks.ParseError as e:
        assert "1:6" in str(e)
    else:
        raise AssertionError("expected ParseError")

    f = tinylinks.fuzz(depth=2)
    assert f.sound, f
    assert f.counts["programs"] == 95
    t = tinylinks.fuzz(depth=6, random=500, typed=True, seed=7)
    assert t.sound and t.counts["safe"] > 0, t.counts

    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
