import numpy as np
import pytest

from lsqmm.data import split_xy, synth_lowrank
from lsqmm.model_io import MAGIC, ModelFormatError, dumps, load_model, loads, save_model
from lsqmm.trainer import TrainConfig, decision_values, train


@pytest.fixture(scope="module")
def model():
    X, y = split_xy(synth_lowrank(6, 5, 4, 2, 0.3, 8))
    return train(X, y, TrainConfig(C=3.0, lam=0.05)), X


def test_round_trip_bit_exact(model, tmp_path):
    m, X = model
    save_model(m, tmp_path / "m.bin")
    back = load_model(tmp_path / "m.bin")
    assert back.W.planes.tobytes() == m.W.planes.tobytes()
    assert np.array(back.b).tobytes() == np.array(m.b).tobytes()
    assert back.alpha.tobytes() == m.alpha.tobytes()
    assert np.array_equal(back.support_indices, m.support_indices)
    assert back.trace == m.trace and back.config == m.config
    assert (back.converged, back.iterations) == (m.converged, m.iterations)
    assert decision_values(back, X).tobytes() == decision_values(m, X).tobytes()
    assert dumps(back) == dumps(m)


def test_header_layout(model):
    blob = dumps(model[0])
    assert blob[:8] == MAGIC
    assert int.from_bytes(blob[8:12], "little") == 1


def test_bad_files(model):
    blob = dumps(model[0])
    with pytest.raises(ModelFormatError):
        loads(b"XXXXXXXX" + blob[8:])
    with pytest.raises(ModelFormatError):
        loads(blob[:8] + (2).to_bytes(4, "little") + blob[12:])
    with pytest.raises(ModelFormatError):
        loads(blob[:-5])
    with pytest.raises(ModelFormatError):
        loads(blob + b"\x00")
