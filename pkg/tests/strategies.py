"""Hypothesis strategies for cube objects."""

from hypothesis import strategies as st

from cantorduality.bitcube import CubeSet, Word


@st.composite
def words(draw, width=None, max_width=8):
    n = draw(st.integers(1, max_width)) if width is None else width
    return Word(n, draw(st.integers(0, (1 << n) - 1)))


@st.composite
def cubesets(draw, width=None, max_width=6):
    n = draw(st.integers(1, max_width)) if width is None else width
    mask = draw(st.integers(0, (1 << (1 << n)) - 1))
    return CubeSet.from_indices(n, [i for i in range(1 << n) if mask >> i & 1])


@st.composite
def cube_with_words(draw, k=1, max_width=6):
    J = draw(cubesets(max_width=max_width))
    return (J, *[draw(words(J.width)) for _ in range(k)])
