import pytest

from sympobs import catalog
from sympobs.ringspec import RingSpecError, load_ring_spec, parse_ring_spec

BLOWUP = """\
# one-point blow-up of CP^3
[ring]
name = blowup-cp3
n = 3
h1_zero = true

[generators]
a = 2
b = 2

[relations]
a*b = 0
b^3 = a^3

[classes]
chern = 1 + 4a + 6a^2 + 6a^3 - 2b
c1 = 4a - 2b
"""


def test_parse_matches_catalog():
    spec = parse_ring_spec(BLOWUP, "blowup.ring")
    M = spec.manifold
    ref = catalog.blowup_cp3_point()
    assert M.name == "blowup-cp3" and M.n == 3 and M.h1_zero
    assert M.ring.same_presentation(ref.ring)
    assert M.chern.coefficients == ref.chern.coefficients
    assert spec.classes["c1"].format() == "4*a - 2*b"


def test_load_from_file(tmp_path):
    path = tmp_path / "m.ring"
    path.write_text(BLOWUP)
    assert load_ring_spec(path).manifold.n == 3


def test_h1_flag_and_top_degree():
    text = "[ring]\ntop_degree = 4\nh1_zero = false\n[generators]\na = 2\n[classes]\nchern = 1 + 3a + 3a^2\n"
    M = parse_ring_spec(text).manifold
    assert M.n == 2 and not M.h1_zero


def test_above_top_zero_relation_skipped():
    text = "[ring]\nn = 2\n[generators]\na = 2\n[relations]\na^3 = 0\n[classes]\nchern = 1 + 3a + 3a^2\n"
    assert parse_ring_spec(text).manifold.ring.relations == ()


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("[ring]\nn = 2\n[generators]\na = 2\n[classes]\nchern = 1 + $a\n", 6, "unexpected character"),
        ("[ring]\nn = 2\n[generators]\na = 3\n[classes]\nchern = 1\n", 4, "degree"),
        ("[ring]\nn = 2\n[generators]\na = 2\n", None, "classes"),
        ("[ring]\nn = 2\n[generators]\na = 2\n[classes]\nc1 = 3a\n", None, "chern"),
        ("[ring]\nn = 2\n[bogus]\n", 3, "section"),
        ("[ring]\nn = 2\n[lattice]\nx = 1\n", 3, "lattice"),
        ("[ring]\nn = 2\n[generators]\na = 2\n[classes]\nchern = 2 + a\n", 6, "constant term"),
        ("n = 2\n", 1, "section"),
    ],
)
def test_errors_carry_location(text, line, fragment):
    with pytest.raises(RingSpecError) as exc:
        parse_ring_spec(text, "bad.ring")
    err = exc.value
    assert fragment in str(err)
    assert str(err).startswith("bad.ring:")
    if line is not None:
        assert err.line == line
