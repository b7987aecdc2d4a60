"""Rectangular MZI-mesh factorization of unitaries and the SVD device.

``clements_decompose`` implements the rectangular-mesh factorization of
Clements et al. (Optica 3, 1460, 2016) adapted to this library's cell
convention: a unitary is eliminated to a diagonal by alternating column
(right-inverse) and row (left) cell operations, and the left factors are
then commuted through the residual phase screen so that all cells end up
between the inputs and a single output phase screen.

The full device cascades a mesh for ``v_dagger``, one attenuator cell per
port for the singular values, and a mesh for ``u``.  With lossy cells every
cell contributes the scalar field factor ``T_node``, so signal paths that
traverse different numbers of cells pick up unequal attenuation; that
imbalance is the device's loss-induced infidelity mechanism.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionError, DomainError
from .linalg import ensure_square, svd_factorize, unitarity_residual
from .nodes import LossModel, NodeSettings, mzi_matrix, voa_transfer, voa_transfer_at


@dataclass(frozen=True)
class MeshNode:
    """One MZI cell coupling ports (row, row + 1), 0-based, at a 1-based layer."""

    row: int
    layer: int
    settings: NodeSettings


@dataclass(frozen=True, eq=False)
class ClementsMesh:
    """A rectangular mesh: cells in propagation order plus output phases."""

    n: int
    nodes: tuple[MeshNode, ...]
    output_phases: np.ndarray

    @property
    def depth(self) -> int:
        return max((node.layer for node in self.nodes), default=0)


def _right_null_angles(a: complex, b: complex) -> tuple[float, float]:
    # Zero `a` by mixing its column with the right neighbour holding `b`.
    # An exactly-zero target keeps the cell at bar so identity-like inputs
    # decompose to all-bar meshes.
    if abs(a) == 0.0:
        return math.pi, 0.0
    if abs(b) == 0.0:
        return 0.0, 0.0
    theta = 2.0 * math.atan2(abs(b), abs(a))
    phi = cmath.phase(a) - cmath.phase(b) - math.pi
    return theta, phi


def _left_null_angles(p: complex, a: complex) -> tuple[float, float]:
    # Zero `a` by mixing its row with the row above holding `p`.
    if abs(a) == 0.0:
        return math.pi, 0.0
    if abs(p) == 0.0:
        return 0.0, 0.0
    theta = 2.0 * math.atan2(abs(p), abs(a))
    phi = cmath.phase(a) - cmath.phase(p)
    return theta, phi


def _apply_right_inverse(work: np.ndarray, c: int, theta: float, phi: float) -> None:
    m = mzi_matrix(theta, phi).conj().T
    col_c = work[:, c].copy()
    col_d = work[:, c + 1].copy()
    work[:, c] = col_c * m[0, 0] + col_d * m[1, 0]
    work[:, c + 1] = col_c * m[0, 1] + col_d * m[1, 1]


def _apply_left(work: np.ndarray, r: int, theta: float, phi: float) -> None:
    m = mzi_matrix(theta, phi)
    row_r = work[r, :].copy()
    row_s = work[r + 1, :].copy()
    work[r, :] = m[0, 0] * row_r + m[0, 1] * row_s
    work[r + 1, :] = m[1, 0] * row_r + m[1, 1] * row_s


def _assign_layers(sequence: list[tuple[int, float, float]], n: int) -> list[MeshNode]:
    # Earliest-possible layer per cell; for the elimination ordering this
    # reproduces the rectangular tiling with depth <= n.
    next_free = [1] * n
    nodes = []
    for row, theta, phi in sequence:
        layer = max(next_free[row], next_free[row + 1])
        next_free[row] = next_free[row + 1] = layer + 1
        nodes.append(MeshNode(row=row, layer=layer, settings=NodeSettings(theta, phi)))
    return nodes


def clements_decompose(u, *, atol: float = 1e-8) -> ClementsMesh:
    """Factor a unitary into a rectangular mesh of MZI cells.

    Parameters
    ----------
    u : array_like
        Square matrix, unitary within ``atol`` (max entry deviation of
        ``u^dagger u`` from the identity).

    Returns
    -------
    ClementsMesh
        ``n(n-1)/2`` cells in propagation order with layer assignments of
        depth at most n, plus n output phases.  The lossless mesh transfer
        reproduces ``u`` to close to machine precision.
    """
    u = ensure_square(u, name="u")
    residual = unitarity_residual(u)
    if residual > atol:
        raise DomainError(
            f"input is not unitary within {atol:g}: residual {residual:.3e}"
        )
    n = u.shape[0]
    work = u.astype(np.complex128, copy=True)

    rights: list[tuple[int, float, float]] = []
    lefts: list[tuple[int, float, float]] = []
    for i in range(1, n):
        if i % 2 == 1:
            for j in range(i):
                r, c = n - 1 - j, i - 1 - j
                theta, phi = _right_null_angles(work[r, c], work[r, c + 1])
                _apply_right_inverse(work, c, theta, phi)
                rights.append((c, theta, phi))
        else:
            for j in range(1, i + 1):
                r, c = n - 1 + j - i, j - 1
                theta, phi = _left_null_angles(work[r - 1, c], work[r, c])
                _apply_left(work, r - 1, theta, phi)
                lefts.append((r - 1, theta, phi))

    diag = np.diag(work).copy()
    off = work - np.diag(diag)
    if n > 1 and np.max(np.abs(off)) > 1e-6:
        raise DomainError(
            f"elimination failed to diagonalize (residual {np.max(np.abs(off)):.3e}); "
            "input is too far from unitary"
        )

    # Commute each left factor through the phase screen:
    # M(theta, phi)^dagger diag(e^{ia}, e^{ib})
    #   = diag(e^{ia'}, e^{ib'}) M(theta, a - b)
    # with a' = b - theta - phi + pi and b' = b - theta + pi.
    phases = np.angle(diag)
    sequence = list(rights)
    for row, theta, phi in reversed(lefts):
        a, b = phases[row], phases[row + 1]
        sequence.append((row, theta, a - b))
        phases[row] = b - theta - phi + math.pi
        phases[row + 1] = b - theta + math.pi
    phases = np.mod(phases, 2.0 * math.pi)

    nodes = _assign_layers(sequence, n)
    return ClementsMesh(n=n, nodes=tuple(nodes), output_phases=phases)


def _layer_groups(mesh: ClementsMesh, settings=None):
    """Group cells by layer as (rows, thetas, phis) arrays, inputs first."""
    if settings is None:
        settings = [node.settings for node in mesh.nodes]
    grouped: dict[int, list[tuple[int, float, float]]] = {}
    for node, s in zip(mesh.nodes, settings):
        grouped.setdefault(node.layer, []).append((node.row, s.theta, s.phi))
    for layer in sorted(grouped):
        entries = grouped[layer]
        rows = np.array([e[0] for e in entries], dtype=np.intp)
        thetas = np.array([e[1] for e in entries])
        phis = np.array([e[2] for e in entries])
        yield rows, thetas, phis


def apply_mesh(y: np.ndarray, mesh: ClementsMesh, *, node_field: float = 1.0, settings=None) -> np.ndarray:
    """Left-multiply ``y`` by the mesh transfer, cell losses included.

    ``node_field`` is the per-cell scalar field factor (``T_node``); ports
    that skip a layer pass unattenuated.  ``settings`` optionally overrides
    the programmed cell settings (same ordering as ``mesh.nodes``).
    """
    y = np.array(y, dtype=np.complex128, copy=True)
    if y.shape[0] != mesh.n:
        raise DimensionError(f"operand has {y.shape[0]} rows, mesh has {mesh.n} ports")
    for rows, thetas, phis in _layer_groups(mesh, settings):
        half = 0.5 * thetas
        common = node_field * 1j * np.exp(1j * half)
        s, c = np.sin(half), np.cos(half)
        ephi = np.exp(1j * phis)
        m11 = common * ephi * s
        m12 = common * c
        m21 = common * ephi * c
        m22 = -common * s
        top = y[rows, :]
        bot = y[rows + 1, :]
        y[rows, :] = m11[:, None] * top + m12[:, None] * bot
        y[rows + 1, :] = m21[:, None] * top + m22[:, None] * bot
    return np.exp(1j * mesh.output_phases)[:, None] * y


def mesh_transfer(mesh: ClementsMesh, *, node_field: float = 1.0, settings=None) -> np.ndarray:
    """Full transfer matrix of a mesh (identity propagated through it)."""
    return apply_mesh(np.eye(mesh.n, dtype=np.complex128), mesh, node_field=node_field, settings=settings)


@dataclass(frozen=True, eq=False)
class ClementsDevice:
    """A programmed SVD device: v_dagger mesh, attenuator column, u mesh."""

    v_dagger_mesh: ClementsMesh
    sigma_settings: tuple[NodeSettings, ...]
    u_mesh: ClementsMesh
    loss: LossModel
    programming_steps: int

    @property
    def n(self) -> int:
        return self.v_dagger_mesh.n

    @property
    def node_count(self) -> int:
        return len(self.v_dagger_mesh.nodes) + len(self.sigma_settings) + len(self.u_mesh.nodes)


def build_svd_clements(d, loss: LossModel) -> ClementsDevice:
    """Compile an arbitrary square matrix onto the SVD mesh architecture.

    The target is SVD-factorized, singular values are normalized by the
    largest one so every attenuator amplitude lies in [0, 1], and the two
    unitary factors are compiled to rectangular meshes.  The attenuator
    cells carry an inherent phase ``-i e^{i theta/2}`` on their through
    port; those phases are folded into the u-side unitary before its mesh
    is computed, so the lossless device reproduces the target up to one
    positive scalar.

    Phases are always computed from the lossless factors; ``loss`` only
    scales the cells at evaluation time.
    """
    d = ensure_square(d, name="d")
    n = d.shape[0]
    factors = svd_factorize(d)
    sigma_max = float(factors.sigma[0])
    if sigma_max == 0.0:
        raise DomainError("cannot compile the zero matrix")
    amplitudes = factors.sigma / sigma_max

    transfers = []
    settings = []
    for a in amplitudes:
        transfer, s = voa_transfer(float(a))
        transfers.append(transfer)
        settings.append(s)

    # Fold the attenuators' inherent unit-modulus phases into u.
    inherent = np.array([t / a if a > 0.0 else -1j for t, a in zip(transfers, amplitudes)])
    u_adjusted = factors.u * inherent.conj()[None, :]

    v_mesh = clements_decompose(factors.v_dagger)
    u_mesh = clements_decompose(u_adjusted)
    return ClementsDevice(
        v_dagger_mesh=v_mesh,
        sigma_settings=tuple(settings),
        u_mesh=u_mesh,
        loss=loss,
        programming_steps=n * (n - 1) // 2,
    )


def evaluate_svd_clements(
    device: ClementsDevice,
    *,
    v_settings=None,
    sigma_settings=None,
    u_settings=None,
) -> np.ndarray:
    """Effective transfer matrix of the device, losses included.

    Propagates the uniform 1:N input split (scalar ``1/sqrt(N)``), the
    v_dagger mesh, the attenuator column, and the u mesh.  The optional
    settings arguments substitute perturbed cell settings without
    recompiling.
    """
    n = device.n
    t_field = device.loss.t_node
    y = np.eye(n, dtype=np.complex128) / math.sqrt(n)
    y = apply_mesh(y, device.v_dagger_mesh, node_field=t_field, settings=v_settings)
    sig = sigma_settings if sigma_settings is not None else device.sigma_settings
    column = np.array([voa_transfer_at(s, device.loss) for s in sig])
    y = column[:, None] * y
    return apply_mesh(y, device.u_mesh, node_field=t_field, settings=u_settings)


def perturb_device(device: ClementsDevice, sigma: float, rng: np.random.Generator) -> ClementsDevice:
    """Gaussian-perturb every MZI cell's (theta, phi) pair.

    Draw order is fixed: v_dagger cells in propagation order, then the
    attenuator column by port, then u cells, two draws per cell (theta
    first).  Output phase screens are plain shifters, not MZI cells, and
    stay untouched.  The total draw count is 2 N^2 per call.
    """
    if sigma < 0.0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0.0:
        return device

    def shift(settings_list, deltas):
        return tuple(
            NodeSettings(s.theta + d[0], s.phi + d[1]) for s, d in zip(settings_list, deltas)
        )

    n_v = len(device.v_dagger_mesh.nodes)
    n_s = len(device.sigma_settings)
    n_u = len(device.u_mesh.nodes)
    draws = rng.normal(0.0, sigma, size=(n_v + n_s + n_u, 2))

    v_new = shift([nd.settings for nd in device.v_dagger_mesh.nodes], draws[:n_v])
    s_new = shift(device.sigma_settings, draws[n_v : n_v + n_s])
    u_new = shift([nd.settings for nd in device.u_mesh.nodes], draws[n_v + n_s :])

    def remesh(mesh: ClementsMesh, new_settings) -> ClementsMesh:
        nodes = tuple(
            replace(node, settings=s) for node, s in zip(mesh.nodes, new_settings)
        )
        return ClementsMesh(n=mesh.n, nodes=nodes, output_phases=mesh.output_phases)

    return ClementsDevice(
        v_dagger_mesh=remesh(device.v_dagger_mesh, v_new),
        sigma_settings=s_new,
        u_mesh=remesh(device.u_mesh, u_new),
        loss=device.loss,
        programming_steps=device.programming_steps,
    )


def apply_common_deviation(device: ClementsDevice, dtheta: float, dphi: float) -> ClementsDevice:
    """Shift every MZI cell's (theta, phi) by one shared deviation pair.

    This is the figure-experiment error model: a phase-error trial consists
    of a single two-element deviation set applied to all cells of the
    device.  Output phase screens are plain shifters, not MZI cells, and
    stay untouched.
    """
    if dtheta == 0.0 and dphi == 0.0:
        return device

    def remesh(mesh: ClementsMesh) -> ClementsMesh:
        nodes = tuple(
            replace(nd, settings=NodeSettings(nd.settings.theta + dtheta, nd.settings.phi + dphi))
            for nd in mesh.nodes
        )
        return ClementsMesh(n=mesh.n, nodes=nodes, output_phases=mesh.output_phases)

    return replace(
        device,
        v_dagger_mesh=remesh(device.v_dagger_mesh),
        sigma_settings=tuple(
            NodeSettings(s.theta + dtheta, s.phi + dphi) for s in device.sigma_settings
        ),
        u_mesh=remesh(device.u_mesh),
    )


def with_loss(device: ClementsDevice, loss: LossModel) -> ClementsDevice:
    """Same programmed phases, different component losses."""
    return replace(device, loss=loss)


def svd_insertion_loss(n: int, il_node_db: float, case: str) -> float:
    """Closed-form device insertion loss along the extreme signal paths.

    best:  10 log10(N) + (2 floor(N/2) + 1) IL_node
    worst: 10 log10(N) + (2 N + 1) IL_node
    """
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if il_node_db < 0.0:
        raise DomainError(f"il_node_db must be >= 0, got {il_node_db}")
    if case == "best":
        depth = 2 * (n // 2) + 1
    elif case == "worst":
        depth = 2 * n + 1
    else:
        raise DomainError(f"case must be 'best' or 'worst', got {case!r}")
    return 10.0 * math.log10(n) + depth * il_node_db


def svd_architecture_stats(n: int) -> dict:
    """Cell count, extreme path depths, and programming step count."""
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    return {
        "nodes": n * n,
        "best_depth": 2 * (n // 2) + 1,
        "worst_depth": 2 * n + 1,
        "programming_steps": n * (n - 1) // 2,
    }


def _mesh_to_json(mesh: ClementsMesh) -> tuple[list, list]:
    nodes = [
        {"row": nd.row, "layer": nd.layer, "theta": nd.settings.theta, "phi": nd.settings.phi}
        for nd in mesh.nodes
    ]
    return nodes, mesh.output_phases.tolist()


def _mesh_from_json(n: int, nodes_obj, phases_obj) -> ClementsMesh:
    nodes = tuple(
        MeshNode(
            row=int(o["row"]),
            layer=int(o["layer"]),
            settings=NodeSettings(float(o["theta"]), float(o["phi"])),
        )
        for o in nodes_obj
    )
    phases = np.asarray(phases_obj, dtype=np.float64)
    if phases.shape != (n,):
        raise DimensionError(f"output phase vector must have length {n}")
    return ClementsMesh(n=n, nodes=nodes, output_phases=phases)


def device_to_json(device: ClementsDevice) -> dict:
    v_nodes, v_phases = _mesh_to_json(device.v_dagger_mesh)
    u_nodes, u_phases = _mesh_to_json(device.u_mesh)
    return {
        "arch": "svd-clements",
        "n": device.n,
        "v_dagger": v_nodes,
        "v_dagger_output_phases": v_phases,
        "sigma": [{"theta": s.theta, "phi": s.phi} for s in device.sigma_settings],
        "u": u_nodes,
        "u_output_phases": u_phases,
        "loss": device.loss.to_json(),
        "programming_steps": device.programming_steps,
    }


def device_from_json(obj: dict) -> ClementsDevice:
    if obj.get("arch") != "svd-clements":
        raise DomainError(f"not an svd-clements device dump: arch={obj.get('arch')!r}")
    n = int(obj["n"])
    return ClementsDevice(
        v_dagger_mesh=_mesh_from_json(n, obj["v_dagger"], obj["v_dagger_output_phases"]),
        sigma_settings=tuple(
            NodeSettings(float(s["theta"]), float(s["phi"])) for s in obj["sigma"]
        ),
        u_mesh=_mesh_from_json(n, obj["u"], obj["u_output_phases"]),
        loss=LossModel.from_json(obj["loss"]),
        programming_steps=int(obj["programming_steps"]),
    )
