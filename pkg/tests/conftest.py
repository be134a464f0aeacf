"""Session fixtures: the two scorers trained once with the frozen recipe.

The wall-clock seconds captured here include dataset synthesis, the split and
the training run itself; the acceptance suite asserts the combined budget.
"""

import time
from dataclasses import dataclass

import pytest

from refexp.datagen import (SceneGenSpec, rin_training_pairs, rpn_training_pairs,
                            synth_rin_dataset, synth_rpn_dataset)
from refexp.mlp import MlpModel, TrainConfig, accuracy, train
from refexp.networks import rin_layer_specs, rpn_layer_specs

from helpers import split_pairs

TRAIN_CFG = TrainConfig(seed=0, max_epochs=600, patience=30)


@dataclass(frozen=True)
class TrainedSetup:
    model: MlpModel
    test_accuracy: float
    seconds: float


@pytest.fixture(scope="session")
def rpn_setup() -> TrainedSetup:
    started = time.perf_counter()
    pairs = rpn_training_pairs(synth_rpn_dataset(SceneGenSpec(seed=0), 6000))
    rest, test = split_pairs(pairs)
    # dropout 0 keeps every dominant-rule relation above the 0.5 threshold;
    # the noisy-objective ceiling of rate 0.2 sits below the accuracy bar
    model, _ = train(rest, rpn_layer_specs(), TRAIN_CFG, dropout_rate=0.0)
    return TrainedSetup(model, accuracy(model, test), time.perf_counter() - started)


@pytest.fixture(scope="session")
def rin_setup() -> TrainedSetup:
    started = time.perf_counter()
    pairs = rin_training_pairs(synth_rin_dataset(SceneGenSpec(seed=0), 8000))
    rest, test = split_pairs(pairs)
    model, _ = train(rest, rin_layer_specs(), TRAIN_CFG)
    return TrainedSetup(model, accuracy(model, test), time.perf_counter() - started)


@pytest.fixture(scope="session")
def rpn_model(rpn_setup) -> MlpModel:
    return rpn_setup.model


@pytest.fixture(scope="session")
def rin_model(rin_setup) -> MlpModel:
    return rin_setup.model
