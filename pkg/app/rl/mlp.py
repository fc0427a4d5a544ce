"""Dense tanh network with analytic backpropagation, loss heads and a momentum optimizer."""
import numpy as np

from app.utils.logger import logger


def softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exps = np.exp(shifted)
    return exps / exps.sum(axis=-1, keepdims=True)


class Mlp:
    """Fully connected network: tanh hidden layers, linear or softmax output.

    Weights are stored as (fan_in, fan_out) matrices so a batch ``x`` of shape
    (n, fan_in) maps through ``x @ W + b``.
    """

    def __init__(self, sizes, output="linear", rng=None, output_scale=1.0):
        if len(sizes) < 2:
            raise ValueError("An Mlp needs at least input and output sizes")
        if output not in ("linear", "softmax"):
            raise ValueError(f"Unknown output activation: {output}")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.sizes = [int(s) for s in sizes]
        self.output = output
        self.weights = []
        self.biases = []
        for idx, (fan_in, fan_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            if idx == len(self.sizes) - 2:
                limit *= output_scale
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    @property
    def input_size(self):
        return self.sizes[0]

    @property
    def output_size(self):
        return self.sizes[-1]

    @property
    def params(self):
        """Live parameter arrays in the order W0, b0, W1, b1, ..."""
        out = []
        for weight, bias in zip(self.weights, self.biases):
            out.extend([weight, bias])
        return out

    def forward(self, x):
        """Deterministic forward pass

        Args:
            x: Input of shape (input_size,) or (n, input_size)

        Returns:
            tuple: (output, cache) with output shaped like the input batch
        """
        x = np.asarray(x, dtype=float)
        squeeze = x.ndim == 1
        batch = x[None, :] if squeeze else x
        if batch.ndim != 2 or batch.shape[1] != self.input_size:
            logger.error(f"Mlp input shape {x.shape} does not match input size {self.input_size}")
            raise ValueError(f"Expected input size {self.input_size}, got shape {x.shape}")

        activations = [batch]
        hidden = batch
        for weight, bias in zip(self.weights[:-1], self.biases[:-1]):
            hidden = np.tanh(hidden @ weight + bias)
            activations.append(hidden)
        logits = hidden @ self.weights[-1] + self.biases[-1]
        output = softmax(logits) if self.output == "softmax" else logits
        cache = {"activations": activations, "logits": logits, "output": output}
        return (output[0] if squeeze else output), cache

    def predict(self, x):
        return self.forward(x)[0]

    def backward(self, cache, grad_logits):
        """Gradients of a scalar loss given its gradient w.r.t. the output logits

        Returns:
            list: Arrays matching ``params`` order
        """
        grad = np.asarray(grad_logits, dtype=float)
        if grad.ndim == 1:
            grad = grad[None, :]
        activations = cache["activations"]
        grads = [None] * (2 * len(self.weights))
        for layer in range(len(self.weights) - 1, -1, -1):
            layer_input = activations[layer]
            grads[2 * layer] = layer_input.T @ grad
            grads[2 * layer + 1] = grad.sum(axis=0)
            if layer > 0:
                grad = (grad @ self.weights[layer].T) * (1.0 - layer_input ** 2)
        return grads

    def gradient(self, x, loss_head, *targets):
        """Loss value and parameter gradients for one batch

        Args:
            x: Input batch
            loss_head: Callable (output, *targets) -> (loss, grad wrt logits)
            *targets: Extra arguments for the loss head

        Returns:
            tuple: (loss, grads)
        """
        output, cache = self.forward(x)
        if output.ndim == 1:
            output = output[None, :]
        loss, grad_logits = loss_head(output, *targets)
        grads = self.backward(cache, grad_logits)
        check_finite(grads, "Mlp gradient")
        return float(loss), grads

    def copy(self):
        clone = Mlp.__new__(Mlp)
        clone.sizes = list(self.sizes)
        clone.output = self.output
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        return clone

    def copy_from(self, other):
        for mine, theirs in zip(self.params, other.params):
            mine[...] = theirs

    def to_arrays(self, prefix):
        arrays = {f"{prefix}.sizes": np.array(self.sizes), f"{prefix}.output": np.array(self.output)}
        for idx, (weight, bias) in enumerate(zip(self.weights, self.biases)):
            arrays[f"{prefix}.W{idx}"] = weight
            arrays[f"{prefix}.b{idx}"] = bias
        return arrays

    @classmethod
    def from_arrays(cls, arrays, prefix):
        net = cls.__new__(cls)
        net.sizes = [int(s) for s in arrays[f"{prefix}.sizes"]]
        net.output = str(arrays[f"{prefix}.output"])
        net.weights = [np.array(arrays[f"{prefix}.W{idx}"], dtype=float) for idx in range(len(net.sizes) - 1)]
        net.biases = [np.array(arrays[f"{prefix}.b{idx}"], dtype=float) for idx in range(len(net.sizes) - 1)]
        for idx, weight in enumerate(net.weights):
            if weight.shape != (net.sizes[idx], net.sizes[idx + 1]):
                raise ValueError(f"Layer {idx} of '{prefix}' has shape {weight.shape}")
        return net


def check_finite(arrays, label):
    for idx, array in enumerate(arrays):
        if not np.all(np.isfinite(array)):
            logger.error(f"{label}: non-finite values in parameter block {idx}")
            raise FloatingPointError(f"{label}: non-finite values in parameter block {idx}")


def mse_loss(prediction, target):
    """Mean squared error over every entry"""
    diff = prediction - np.asarray(target, dtype=float).reshape(prediction.shape)
    return float(np.mean(diff ** 2)), 2.0 * diff / diff.size


def softmax_nll_loss(probabilities, labels):
    """Mean negative log-likelihood of integer labels under softmax outputs"""
    labels = np.asarray(labels, dtype=int)
    n = probabilities.shape[0]
    picked = probabilities[np.arange(n), labels]
    loss = -np.mean(np.log(np.clip(picked, 1e-12, None)))
    grad = probabilities.copy()
    grad[np.arange(n), labels] -= 1.0
    return float(loss), grad / n


def mlp_forward(net: Mlp, x):
    return net.forward(x)


def mlp_gradient(net: Mlp, loss_head, x, *targets):
    return net.gradient(x, loss_head, *targets)


class MomentumSGD:
    """Heavy-ball gradient descent: v <- mu*v + g, p <- p - lr*v"""

    def __init__(self, params, lr, momentum=0.9, max_grad_norm=None):
        self.params = list(params)
        self.lr = lr
        self.momentum = momentum
        self.max_grad_norm = max_grad_norm
        self.velocity = [np.zeros_like(p) for p in self.params]

    def step(self, grads):
        if len(grads) != len(self.params):
            raise ValueError("Gradient list does not match the parameter list")
        if self.max_grad_norm is not None:
            norm = np.sqrt(sum(float(np.sum(g * g)) for g in grads))
            if norm > self.max_grad_norm:
                grads = [g * (self.max_grad_norm / norm) for g in grads]
        for param, velocity, grad in zip(self.params, self.velocity, grads):
            velocity *= self.momentum
            velocity += grad
            param -= self.lr * velocity

    def reset(self):
        for velocity in self.velocity:
            velocity[...] = 0.0
