import pytest

from haulpath.energy import RobotConfig
from haulpath.pathdb import build_pcpd
from haulpath.terrain import gen_synthetic

# Mid-size outdoor ground robot; the payload regime of all derived-value
# tests (limits in degrees: climb 26.565 unloaded, 3.31 at 70 kg).
HUSKY = RobotConfig(mass_kg=80.0, velocity_mps=1.0, p_max_w=819.2, mu=0.5, mu_s=1.0)

BUCKETS = (0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0)


@pytest.fixture(scope="session")
def cfg():
    return HUSKY


@pytest.fixture(scope="session")
def flat16():
    return gen_synthetic(16, 0, "flat")


@pytest.fixture(scope="session")
def fbm24():
    return gen_synthetic(24, 42, "fbm")


@pytest.fixture(scope="session")
def fbm64():
    return gen_synthetic(64, 7, "fbm")


@pytest.fixture(scope="session")
def pcpd_flat16(flat16, cfg):
    return build_pcpd(flat16, cfg, buckets=BUCKETS, threads=2)


@pytest.fixture(scope="session")
def pcpd24(fbm24, cfg):
    return build_pcpd(fbm24, cfg, buckets=BUCKETS, threads=2)
