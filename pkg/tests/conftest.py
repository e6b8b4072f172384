import numpy as np
import pytest
import torch

from iterdraw.gan.config import ABLATIONS, ModelDims
from iterdraw.gan.model import DrawerModel
from iterdraw.iclevr.config import GenConfig
from iterdraw.iclevr.generate import sample_scene_sequence, sequence_rng
from iterdraw.text.embeddings import random_table

TINY_VOCAB = [
    "add", "a", "the", "at", "center", "it", "on", "and", "of", "in", "front",
    "behind", "left", "right", "cube", "sphere", "cylinder",
    "cyan", "red", "purple", "yellow", "blue", "green", "gray", "brown",
]


@pytest.fixture(scope="session")
def tiny_table():
    return random_table(TINY_VOCAB, dim=32, seed=7)


@pytest.fixture(scope="session")
def tiny_dims():
    return ModelDims.scaled(image_side=32, num_classes=24, n_c=64,
                            gen_width=8, disc_width=8, n_g=32, n_d=32,
                            n_z=16, embed_dim=32)


@pytest.fixture
def tiny_model(tiny_dims, tiny_table):
    torch.manual_seed(0)
    return DrawerModel(tiny_dims, ABLATIONS["dsubtract"], tiny_table)


def make_tiny_model(tiny_dims, tiny_table, ablation_name, seed=0):
    torch.manual_seed(seed)
    return DrawerModel(tiny_dims, ABLATIONS[ablation_name], tiny_table)


@pytest.fixture(scope="session")
def tiny_gen_config():
    return GenConfig(canvas_side=32, min_distance=6.0, margin=3.0, seed=0,
                     split_sizes=(4, 1, 1))


@pytest.fixture(scope="session")
def tiny_sequences(tiny_gen_config):
    return [
        sample_scene_sequence(tiny_gen_config, sequence_rng(0, 0, i),
                              seq_id=f"train_{i:05d}", split="train")
        for i in range(4)
    ]


@pytest.fixture(scope="session")
def default_gen_config():
    return GenConfig(seed=0)


def assert_images_equal(a: np.ndarray, b: np.ndarray):
    assert a.shape == b.shape
    assert np.array_equal(a, b)


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    outcome = "PASS" if report.passed else "FAIL"
    print(f"\nACCEPTANCE {name}: {outcome} ({report.duration:.1f}s)")
