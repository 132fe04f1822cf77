import numpy as np
import pytest

from cdgrmhd.eos import EosKind
from cdgrmhd.state import prim_to_cons_batch

ALL_EOS_KEYS = ("ideal:1.6666666666666667", "ip", "tm", "rc")


def sample_valid_primitives(rng, n, vmax=0.98, logrho=(-3, 3), logp=(-3, 3),
                            bscale=10.0):
    """Random physically valid primitive states (rho>0, p>0, |v|<vmax)."""
    W = np.empty((n, 8))
    W[:, 0] = 10 ** rng.uniform(*logrho, n)
    r = vmax * rng.uniform(0, 1, n) ** (1 / 3)
    d = rng.standard_normal((n, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    W[:, 1:4] = r[:, None] * d
    W[:, 4:7] = rng.standard_normal((n, 3)) * 10 ** rng.uniform(-2, np.log10(bscale), n)[:, None]
    W[:, 7] = 10 ** rng.uniform(*logp, n)
    return W


def sample_admissible_states(rng, n, eos_key="tm", **kw):
    eos = EosKind.from_key(eos_key)
    return prim_to_cons_batch(sample_valid_primitives(rng, n, **kw), eos)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: desk-scale production runs")
