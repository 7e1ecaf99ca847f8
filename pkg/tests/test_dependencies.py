"""
Dependency check for exdyn.
Fails with the pip package name when a required module is missing.
"""

import importlib

import pytest

REQUIRED_MODULES = [
    ('numpy', 'numpy'),
    ('pandas', 'pandas'),
    ('networkx', 'networkx'),
    ('PIL', 'Pillow'),
    ('hypothesis', 'hypothesis'),
]


@pytest.mark.parametrize("module_name,package_name", REQUIRED_MODULES)
def test_module_installed(module_name, package_name):
    try:
        importlib.import_module(module_name)
    except ImportError:
        pytest.fail(f"{package_name} is NOT installed - run: pip install -r requirements.txt")


def test_entry_point_present():
    exdyn = importlib.import_module('exdyn')
    assert callable(exdyn.main)
