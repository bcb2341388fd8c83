import numpy as np
import pytest

import cohobs as ch
from cohobs import experiments
from cohobs.config import parse_config


@pytest.fixture(scope="session")
def ex1_config():
    return parse_config(experiments.builtin_config("ex1"))


@pytest.fixture(scope="session")
def ex1_plant(ex1_config):
    return ex1_config.plant


@pytest.fixture(scope="session")
def ex2_config():
    return parse_config(experiments.builtin_config("ex2"))


@pytest.fixture(scope="session")
def ex3_plant():
    return parse_config(experiments.builtin_config("ex3")).plant


@pytest.fixture(scope="session")
def ex1_cmt(ex1_plant):
    obs, report = ch.synthesize_covariance_tracking(ex1_plant, np.eye(2))
    assert report.feasible
    return obs, report


@pytest.fixture(scope="session")
def ex1_init():
    return ch.MomentState(
        t=0.0,
        mu_p=[1.0, 1.0],
        mu_o=[0.0, 0.0],
        sigma_p=1.1 * np.eye(2),
        sigma_po=np.zeros((2, 2)),
        sigma_o=2.0 * np.eye(2),
    )


@pytest.fixture(scope="session")
def ex1_cmt_states(ex1_plant, ex1_cmt, ex1_init):
    joint = ch.build_joint_system(ex1_plant, ex1_cmt[0])
    return ch.integrate_joint_moments(joint, ex1_init, 6.0, 1e-3, 10)


@pytest.fixture(scope="session")
def ex1_mt_observer(ex1_plant):
    K = 3.0 * np.eye(2)
    B_o = np.array([[1.0, 0.0], [0.0, -2.0]])
    C_o, D_o = ch.derive_observer_output(K, B_o, 2)
    obs = ch.ObserverModel(K=K, B_o=B_o, C_o=C_o, D_o=D_o)
    assert ch.observer_realizability(ex1_plant, obs).passed
    return obs


@pytest.fixture(scope="session")
def ex1_mt_states(ex1_plant, ex1_mt_observer, ex1_init):
    joint = ch.build_joint_system(ex1_plant, ex1_mt_observer)
    return ch.integrate_joint_moments(joint, ex1_init, 6.0, 1e-3, 10)


@pytest.fixture(scope="session")
def ex2_cmt(ex2_config):
    obs, report = ch.synthesize_covariance_tracking(
        ex2_config.plant, ex2_config.observer.K
    )
    assert report.feasible
    return obs, report


@pytest.fixture(scope="session")
def ex2_states(ex2_config, ex2_cmt):
    sim = ex2_config.simulation
    joint = ch.build_joint_system(ex2_config.plant, ex2_cmt[0])
    init = ch.MomentState(
        t=0.0,
        mu_p=sim.mu_p0,
        mu_o=sim.mu_o0,
        sigma_p=sim.sigma_p0,
        sigma_po=sim.sigma_po0,
        sigma_o=sim.sigma_o0,
    )
    return ch.integrate_joint_moments(joint, init, sim.t_final, sim.dt, sim.sample_stride)
