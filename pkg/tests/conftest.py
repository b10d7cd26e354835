"""
Shared fixtures for the rcfinsler test suite
"""

import os

os.environ.setdefault("RCF_ENV", "testing")

import pytest  # noqa: E402

from src.processors.metric_model import (  # noqa: E402
    EvaluationPoint,
    c3_example,
    flat_real,
    random_seeded,
)


@pytest.fixture
def app():
    """Flask application configured for testing (consumed by pytest-flask's client)"""
    from app import app as flask_app

    flask_app.config.update(TESTING=True)
    return flask_app


@pytest.fixture
def flat_metric():
    """flat-real with b = (2, 0)"""
    return flat_real()


@pytest.fixture
def flat3_metric():
    """flat-real with b = (3, 0)"""
    return flat_real([3.0, 0.0])


@pytest.fixture
def c3_metric():
    return c3_example()


@pytest.fixture
def random_metric():
    return random_seeded(42)


def make_point(eta, z=None):
    """Evaluation point with z at the origin unless given"""
    eta = list(eta)
    return EvaluationPoint.make(z if z is not None else [0j] * len(eta), eta)
