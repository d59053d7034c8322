import math

import numpy as np
import pytest

from flatbergman.geometry import ConeStream, ModelDomain


@pytest.fixture
def model():
    return ModelDomain(n=1)


@pytest.fixture
def normal_stream():
    return ConeStream()


@pytest.fixture
def tilted_stream():
    return ConeStream(alpha=1.0, N=4.0, kind="tilted", c=1.0, Nprime=6.0)


def rel(a, b):
    return abs(a - b) / abs(b)
