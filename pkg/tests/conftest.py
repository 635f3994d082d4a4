import pytest

from evidencegraph.datasets import build_workspace


@pytest.fixture(scope="session")
def workspace(tmp_path_factory):
    """One fully recorded offline workspace shared across the session."""
    root = tmp_path_factory.mktemp("workspace")
    build_workspace(root)
    return root
