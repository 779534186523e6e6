import logging

import pytest

from geosolve.geometry import (
    GeometricInstance,
    GeometricObject,
    generate_random_instance,
)


@pytest.fixture(autouse=True)
def single_thread(monkeypatch):
    monkeypatch.delenv("GEOSOLVE_THREADS", raising=False)


@pytest.fixture(autouse=True)
def reset_logger():
    logger = logging.getLogger("geosolve")
    handlers, level = list(logger.handlers), logger.level
    yield
    logger.handlers[:] = handlers
    logger.setLevel(level)


@pytest.fixture
def instance():
    return generate_random_instance(10, 2, 0.3, seed=7)


@pytest.fixture
def single_disk():
    return GeometricInstance(2, [GeometricObject("ball", (0.0, 0.0), 1.0)])


@pytest.fixture
def instance_file(tmp_path, instance):
    path = tmp_path / "instance.json"
    instance.save(path)
    return path
