import numpy as np
import pytest

import gcmkit as gk


def make_chain_graph():
    return gk.CausalGraph(["X", "Y", "Z"], [("X", "Y"), ("Y", "Z")])


def make_ground_truth_chain(coef_y=1.0, coef_z=1.0, noise_std=1.0):
    """Chain X -> Y -> Z with linear mechanisms and unit-variance noises."""
    graph = make_chain_graph()
    model = gk.GcmModel(graph)
    model = gk.assign(model, "X", gk.Gaussian(0.0, noise_std), ground_truth=True)
    model = gk.assign(
        model,
        "Y",
        gk.AdditiveNoiseModel(
            gk.LinearModel([coef_y], 0.0),
            gk.Gaussian(0.0, noise_std),
            gk.InputEncoder.continuous(1),
        ),
        ground_truth=True,
    )
    model = gk.assign(
        model,
        "Z",
        gk.AdditiveNoiseModel(
            gk.LinearModel([coef_z], 0.0),
            gk.Gaussian(0.0, noise_std),
            gk.InputEncoder.continuous(1),
        ),
        ground_truth=True,
    )
    return model


def sample_chain_data(n, seed, coef_y=1.0, coef_z=1.0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    y = coef_y * x + rng.standard_normal(n)
    z = coef_z * y + rng.standard_normal(n)
    return gk.Dataset(["X", "Y", "Z"], [x, y, z])


@pytest.fixture
def chain_graph():
    return make_chain_graph()


@pytest.fixture
def fitted_chain():
    data = sample_chain_data(2000, seed=42)
    graph = make_chain_graph()
    return gk.fit(gk.auto_assign(graph, data), data), data
