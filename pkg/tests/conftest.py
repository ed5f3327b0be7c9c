import os

import pytest

from kerramp import pipeline
from kerramp.config import load_device_config

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


def config_path(name):
    return os.path.abspath(os.path.join(CONFIG_DIR, name))


@pytest.fixture(scope="session")
def device_a_spec():
    return pipeline.spec_from_config(
        load_device_config(config_path("device_a_like.cfg"))
    )


@pytest.fixture(scope="session")
def device_a_sis_spec():
    return pipeline.spec_from_config(
        load_device_config(config_path("device_a_sis_twin.cfg"))
    )


@pytest.fixture(scope="session")
def device_b_spec():
    return pipeline.spec_from_config(
        load_device_config(config_path("device_b_like.cfg"))
    )


@pytest.fixture(scope="session")
def device_a_poly(device_a_spec):
    return device_a_spec.hb_polynomial()


@pytest.fixture(scope="session")
def device_a_net(device_a_spec):
    return device_a_spec.resolved_netlist()
