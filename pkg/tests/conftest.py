import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "exact",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("exact")


def scalars(lo=-9, hi=9):
    """Mixed integer and small-denominator rational scalars."""
    ints = st.integers(lo, hi)
    fracs = st.builds(Fraction, st.integers(lo, hi), st.integers(1, 9))
    return ints | fracs


def matrices(max_rows=6, max_cols=6, lo=-9, hi=9):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(
                st.lists(scalars(lo, hi), min_size=c, max_size=c),
                min_size=r,
                max_size=r,
            )
        )
    )


@pytest.fixture
def rng():
    return random.Random(20240811)
