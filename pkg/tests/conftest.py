import pytest

import minlag


@pytest.fixture(scope="session")
def mesh2():
    return minlag.build_bolza_mesh(2)


@pytest.fixture(scope="session")
def mesh3():
    return minlag.build_bolza_mesh(3)
