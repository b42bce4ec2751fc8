"""Smoke test for the fml extension. Run python/build.sh first."""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import fml

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..")


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    cantor = fml.Ifs.load(os.path.join(ROOT, "configs", "cantor3.toml"))
    assert close(cantor.dimension, math.log(2) / math.log(3)), cantor
    assert cantor.arity == 2
    assert cantor.cube_measure("01") == 0.25

    biased = fml.Ifs([0.5, 0.5], [0.25, 0.75], name="biased")
    assert biased.cube_measure("1") == 0.75

    # two quarters form a half, covered by the single cube 0
    value, cubes = fml.cover(cantor, ["00", "01"], 0.5)
    assert close(value, math.sqrt(0.5)) and cubes == ["0"], (value, cubes)
    assert fml.content(cantor, ["0", "1"], 0.5) == 1.0
    assert close(fml.content(biased, ["0", "10"], 1.0), 0.25 + 0.1875)

    f = fml.Function(2, 2, {"00": 1.0})
    assert fml.choquet(cantor, f, 1.0) == 0.25
    mf = fml.maximal(cantor, f)
    assert mf.to_dense() == [1.0, 0.5, 0.25, 0.25], mf.to_dense()
    assert fml.indicator_maximal(cantor, "00", 2).to_dense() == mf.to_dense()
    assert fml.maximal(cantor, f, max_level=0).to_dense() == [0.25] * 4
    assert fml.level_cells(mf, 0.3) == ["0"]

    selected, margins = fml.select(cantor, ["00", "01", "10", "11"], 0.25)
    assert selected == ["00", "01"], selected
    assert all(m >= 0 for m in margins.values()), margins

    for suite in ["strong", "weak", "pp", "wiener", "stein", "equiv", "lebesgue"]:
        rows = fml.verify(biased, suite, trials=20, depth=5, seed=1)
        assert rows, suite
        assert not any(r.violated for r in rows), suite
        print(f"{suite}: {len(rows)} rows, worst ratio {rows[-1].worst_ratio:.4f}")

    # nested cells describe their union
    assert fml.content(cantor, ["0", "01"], 0.5) == fml.content(cantor, ["0"], 0.5)
    try:
        fml.content(cantor, ["02"], 0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("symbol outside the alphabet accepted")

    print("ok")


if __name__ == "__main__":
    main()
