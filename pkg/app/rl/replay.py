from dataclasses import dataclass

import numpy as np


@dataclass
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool


@dataclass
class Batch:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    dones: np.ndarray

    def __len__(self):
        return len(self.actions)

    @classmethod
    def from_transitions(cls, transitions):
        return cls(
            states=np.array([t.state for t in transitions], dtype=float),
            actions=np.array([t.action for t in transitions], dtype=int),
            rewards=np.array([t.reward for t in transitions], dtype=float),
            next_states=np.array([t.next_state for t in transitions], dtype=float),
            dones=np.array([t.done for t in transitions], dtype=float),
        )


class ReplayBuffer:
    """Fixed-capacity ring buffer with uniform sampling"""

    def __init__(self, capacity, state_dim, rng=None):
        if capacity < 1:
            raise ValueError("Replay capacity must be positive")
        self.capacity = capacity
        self.state_dim = state_dim
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros(capacity, dtype=int)
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))
        self.dones = np.zeros(capacity)
        self.cursor = 0
        self.size = 0

    def __len__(self):
        return self.size

    def add(self, transition: Transition):
        state = np.asarray(transition.state, dtype=float)
        next_state = np.asarray(transition.next_state, dtype=float)
        if state.shape != (self.state_dim,) or next_state.shape != (self.state_dim,):
            raise ValueError(f"Transition state length must be {self.state_dim}")
        idx = self.cursor
        self.states[idx] = state
        self.actions[idx] = int(transition.action)
        self.rewards[idx] = transition.reward
        self.next_states[idx] = next_state
        self.dones[idx] = float(transition.done)
        self.cursor = (self.cursor + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size) -> Batch:
        if self.size == 0:
            raise ValueError("Cannot sample from an empty replay buffer")
        idx = self.rng.integers(0, self.size, size=batch_size)
        return Batch(self.states[idx], self.actions[idx], self.rewards[idx], self.next_states[idx], self.dones[idx])
