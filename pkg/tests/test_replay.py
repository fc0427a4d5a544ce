import numpy as np
import pytest

from app.rl.replay import Batch, ReplayBuffer, Transition


def transition(value, done=False):
    return Transition(np.full(2, value), int(value) % 2, float(value), np.full(2, value + 1), done)


def test_ring_buffer_overwrites_oldest():
    buffer = ReplayBuffer(3, 2, rng=np.random.default_rng(0))
    for value in range(5):
        buffer.add(transition(value))
    assert len(buffer) == 3
    assert sorted(buffer.rewards) == [2.0, 3.0, 4.0]


def test_sampling():
    buffer = ReplayBuffer(10, 2, rng=np.random.default_rng(0))
    with pytest.raises(ValueError):
        buffer.sample(4)
    buffer.add(transition(1.0, done=True))
    batch = buffer.sample(4)
    assert len(batch) == 4
    assert batch.states.shape == (4, 2)
    np.testing.assert_array_equal(batch.dones, np.ones(4))


def test_shape_validation():
    buffer = ReplayBuffer(4, 3)
    with pytest.raises(ValueError):
        buffer.add(transition(1.0))
    with pytest.raises(ValueError):
        ReplayBuffer(0, 3)


def test_batch_from_transitions():
    batch = Batch.from_transitions([transition(1.0), transition(2.0, done=True)])
    assert len(batch) == 2
    np.testing.assert_array_equal(batch.actions, [1, 0])
    np.testing.assert_array_equal(batch.dones, [0.0, 1.0])
