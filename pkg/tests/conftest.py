import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from eit5.model import AtomParams, FieldParams

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=1000, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

small_rate = st.floats(0.0, 1e-2)
# below ~1e-3 with zero ground dephasing the systems are too ill-conditioned to compare
rabi = st.one_of(st.just(0.0), st.floats(1e-3, 3.0))
detuning = st.floats(-1.0, 1.0)


@st.composite
def atoms(draw, bb_min=0.0):
    return AtomParams(gamma_ab_tilde=draw(small_rate), gamma_C=draw(small_rate),
                      gamma_Cprime=draw(small_rate), gamma_bb_tilde=draw(st.floats(bb_min, 1e-2)))


@st.composite
def resonant_fields(draw):
    return FieldParams(omega_mu=draw(rabi), omega_b_rf=draw(rabi), omega_c_rf=draw(rabi),
                       delta_mu=draw(detuning), delta_p=draw(st.floats(-3.0, 3.0)))


@st.composite
def general_fields(draw):
    return FieldParams(omega_mu=draw(rabi), omega_b_rf=draw(rabi), omega_c_rf=draw(rabi),
                       delta_mu=draw(detuning), delta_b=draw(detuning), delta_c=draw(detuning),
                       delta_p=draw(st.floats(-3.0, 3.0)))


@pytest.fixture
def fig2():
    return AtomParams(), FieldParams(omega_mu=2.0, omega_b_rf=0.1, omega_c_rf=0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
