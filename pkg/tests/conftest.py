import numpy as np
import pytest

from trunctail import HeavyTailSpec, ResidualSpec, TailModelConfig, TruncationRule


def make_config(alpha, rho, c=1.0, scale=1.0, residual=None, spectral=None):
    heavy = HeavyTailSpec(alpha=alpha, scale=scale, **({"spectral": spectral} if spectral else {}))
    return TailModelConfig(
        heavy=heavy,
        truncation=TruncationRule(coefficient=c, exponent=rho),
        residual=residual or ResidualSpec.zero(),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
