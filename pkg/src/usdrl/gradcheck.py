"""Finite-difference gradient verification for the custom forward operators.

Each component is instantiated at tiny dimensions in float64; the analytic
gradient of a scalar loss (sum of outputs) is compared entry by entry against
central differences with step 1e-5.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import torch

from .config import ModelConfig
from .dste import AttentionBlock, CaBranch, DsteLayer, dense_shift, dsa_hidden
from .fdloss import total_loss
from .projection import Projector

COMPONENTS = ("dsa_hidden", "dense_shift", "self_attention", "ca_forward",
              "layer_forward", "projector", "total_loss")
DEFAULT_TOLERANCE = 1e-4
_STEP = 1e-5


@dataclass
class TensorReport:
    name: str
    shape: tuple
    max_rel_error: float
    worst_index: int
    status: str  # "pass", "fail", or "no gradient expected"


@dataclass
class GradCheckReport:
    component: str
    tolerance: float
    entries: list[TensorReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.status != "fail" for e in self.entries)

    @property
    def max_rel_error(self) -> float:
        errors = [e.max_rel_error for e in self.entries if e.status != "no gradient expected"]
        return max(errors, default=0.0)

    def lines(self) -> list[str]:
        out = [f"component={self.component} tolerance={self.tolerance:g} "
               f"passed={self.passed}"]
        for e in self.entries:
            out.append(f"  {e.name} shape={list(e.shape)} "
                       f"max_rel_error={e.max_rel_error:.3e} "
                       f"worst_index={e.worst_index} status={e.status}")
        return out


def _finite_difference(fn: Callable[[], torch.Tensor], tensor: torch.Tensor,
                       index: int, step: float) -> float:
    flat = tensor.view(-1)
    original = flat[index].item()
    with torch.no_grad():
        flat[index] = original + step
        hi = fn().item()
        flat[index] = original - step
        lo = fn().item()
        flat[index] = original
    return (hi - lo) / (2.0 * step)


def check_tensors(fn: Callable[[], torch.Tensor],
                  tensors: dict[str, torch.Tensor],
                  tolerance: float = DEFAULT_TOLERANCE,
                  step: float = _STEP) -> list[TensorReport]:
    """Compare autograd gradients of ``fn()`` against central differences for
    every entry of every named tensor. Near-zero gradients are compared with a
    floored denominator so finite-difference noise does not dominate.
    """
    for t in tensors.values():
        if t.grad is not None:
            t.grad = None
    loss = fn()
    loss.backward()
    reports = []
    for name, tensor in tensors.items():
        if not tensor.requires_grad:
            reports.append(TensorReport(name, tuple(tensor.shape), 0.0, -1,
                                        "no gradient expected"))
            continue
        grad = tensor.grad
        if grad is None:
            grad = torch.zeros_like(tensor)
        flat_grad = grad.view(-1)
        worst_err, worst_idx = 0.0, -1
        for i in range(tensor.numel()):
            numeric = _finite_difference(fn, tensor, i, step)
            analytic = flat_grad[i].item()
            denom = max(abs(analytic), abs(numeric), 1e-3)
            err = abs(analytic - numeric) / denom
            if err > worst_err:
                worst_err, worst_idx = err, i
        status = "pass" if worst_err < tolerance else "fail"
        reports.append(TensorReport(name, tuple(tensor.shape), worst_err,
                                    worst_idx, status))
    return reports


def _tiny_cfg(**overrides) -> ModelConfig:
    base = dict(c_in=3, c_e=4, c_r=4, c_p=3, num_layers=1, num_heads=2, gap=2,
                conv_kernel=3, alpha=0.5, K=2, seed=0)
    base.update(overrides)
    return ModelConfig(**base)


def _named_params(module: torch.nn.Module, prefix: str = "") -> dict[str, torch.Tensor]:
    return {f"{prefix}{n}": p for n, p in module.named_parameters()}


def check_component(component: str, tolerance: float = DEFAULT_TOLERANCE,
                    seed: int = 0) -> GradCheckReport:
    """Gradient-check one named component at tiny dimensions in float64."""
    if component not in COMPONENTS:
        raise ValueError(f"unknown component {component!r}; choose from {COMPONENTS}")
    g = torch.Generator().manual_seed(seed)
    report = GradCheckReport(component=component, tolerance=tolerance)

    def rand(*shape, grad=True):
        t = torch.randn(*shape, generator=g, dtype=torch.float64)
        return t.requires_grad_(grad)

    if component == "dsa_hidden":
        f = rand(3, 2)
        w1, w2 = rand(3, 3), rand(3, 3)
        report.entries = check_tensors(
            lambda: dsa_hidden(f, w1, w2).sum(),
            {"input": f, "w1": w1, "w2": w2}, tolerance)
    elif component == "dense_shift":
        f_h, f = rand(5, 3), rand(5, 3)
        frozen = rand(5, 3, grad=False)  # weighting tensor; exercises the detached path
        report.entries = check_tensors(
            lambda: (dense_shift(f_h, f, 2) * frozen).sum(),
            {"f_h": f_h, "f": f, "frozen": frozen}, tolerance)
    elif component == "self_attention":
        block = AttentionBlock(dim=4, num_heads=2).double()
        f = rand(4, 4)
        tensors = {"input": f} | _named_params(block)
        report.entries = check_tensors(lambda: block(f).sum(), tensors, tolerance)
    elif component == "ca_forward":
        branch = CaBranch(dim=4, out_dim=3, num_heads=2, kernel_size=3).double()
        f = rand(5, 4)
        tensors = {"input": f} | _named_params(branch)
        report.entries = check_tensors(lambda: branch(f).sum(), tensors, tolerance)
    elif component == "layer_forward":
        layer = DsteLayer(tokens=4, dim=4, out_dim=4, num_heads=2, gap=2,
                          kernel_size=3, alpha=0.5, beta=0.5).double()
        f = rand(4, 4)
        tensors = {"input": f} | _named_params(layer)
        report.entries = check_tensors(lambda: layer(f).sum(), tensors, tolerance)
    elif component == "projector":
        proj = Projector(3, 5).double().train()
        x = rand(4, 3)
        tensors = {"input": x} | _named_params(proj)
        report.entries = check_tensors(lambda: proj(x).sum(), tensors, tolerance)
    else:  # total_loss
        cfg = _tiny_cfg(c_p=6)
        views = {name: [rand(8, 6) for _ in range(2)]
                 for name in ("instance", "spatial", "temporal")}
        tensors = {f"{name}_view{i}": v for name, vs in views.items()
                   for i, v in enumerate(vs)}

        def loss_fn():
            return total_loss(views["instance"], views["spatial"],
                              views["temporal"], cfg)[0]

        report.entries = check_tensors(loss_fn, tensors, tolerance)
    return report


def run_suite(components: list[str] | None = None,
              tolerance: float = DEFAULT_TOLERANCE, seed: int = 0
              ) -> list[GradCheckReport]:
    return [check_component(c, tolerance, seed)
            for c in (components or COMPONENTS)]
