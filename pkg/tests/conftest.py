import math

import pytest

from feastube import ipc, problem as pb, trajectory as tj

# Session-scoped heavy artifacts shared across test modules.


@pytest.fixture(scope="session")
def moving_wall():
    return pb.get_problem("moving-wall-1d")


@pytest.fixture(scope="session")
def corridor():
    return pb.get_problem("corridor-2d")


@pytest.fixture(scope="session")
def hover():
    return pb.get_problem("hover-1d")


@pytest.fixture(scope="session")
def quadratic():
    return pb.get_problem("quadratic-cost-1d")


@pytest.fixture(scope="session")
def mw_cert(moving_wall):
    ver = ipc.verify_ipc(
        moving_wall, (0.0, 2 * math.pi), r_min=0.9, delta=0.5, n_time=50, n_dirs=2
    )
    assert ver.ok
    return ver.certificate


@pytest.fixture(scope="session")
def corridor_cert(corridor):
    ver = ipc.verify_ipc(
        corridor, (0.0, 2 * math.pi), r_min=0.9, delta=0.5, n_time=24, n_dirs=16
    )
    assert ver.ok
    return ver.certificate


@pytest.fixture(scope="session")
def hover_cert(hover):
    ver = ipc.verify_ipc(
        hover, (0.0, 2 * math.pi), r_min=0.9, delta=0.5, n_time=8, n_dirs=2
    )
    assert ver.ok
    return ver.certificate


@pytest.fixture(scope="session")
def quadratic_cert(quadratic):
    ver = ipc.verify_ipc(
        quadratic, (0.0, 2 * math.pi), r_min=0.9, delta=0.5, n_time=8, n_dirs=2
    )
    assert ver.ok
    return ver.certificate


@pytest.fixture(scope="session")
def mw_nft_constants(moving_wall, mw_cert):
    return tj.derive_nft_constants(moving_wall, mw_cert, 1.0)


@pytest.fixture(scope="session")
def mw_tracking_constants(moving_wall, mw_nft_constants):
    return tj.derive_tracking_constants(moving_wall, mw_nft_constants.beta, 5.0)
