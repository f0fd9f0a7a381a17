"""Fast internal consistency checks behind the diagnostics verb.

Each check cross-validates one piece of the pipeline against an
independent computation (closed forms, brute-force enumeration, finite
differences, or the second solver route).  Everything here must stay
cheap enough to run on every install.
"""

from __future__ import annotations

import numpy as np

from .budget import speedup_analysis
from .dataset import (
    decode_canvas,
    decode_flat,
    decode_line,
    decode_sequence,
    encode_canvas,
    encode_flat,
    encode_line,
    encode_sequence,
)
from .nn import Network, fcnn_spec, lstm_spec, mse_loss, train
from .spectrum import (
    SweepHamiltonian,
    classical_gap,
    dense_two_lowest,
    lanczos_two_lowest,
    satisfying_sector,
    sector_energies,
)
from .spinmodel import Family, lhz_encode, sample_instance


def _logical_energies(instance) -> np.ndarray:
    """Brute-force energies of every configuration of a sampled instance."""
    m = instance.size
    configs = 1 - 2 * ((np.arange(1 << m)[:, None] >> np.arange(m)[None, :]) & 1)
    energies = np.zeros(1 << m)
    for i, j, v in instance.couplings:
        energies += v * configs[:, i] * configs[:, j]
    for i, k in enumerate(instance.fields):
        energies += k * configs[:, i]
    return np.sort(energies)


def _check_endpoints() -> tuple[bool, str]:
    worst = 0.0
    for family in (Family.NEAREST_NEIGHBOR_1D, Family.ALL_TO_ALL):
        for size in (4, 5, 6):
            inst = sample_instance(family, size, (97, size))
            e0, e1 = dense_two_lowest(inst, 0.0)
            worst = max(worst, abs((e1 - e0) - 2.0))
            e0, e1 = dense_two_lowest(inst, 1.0)
            worst = max(worst, abs((e1 - e0) - classical_gap(inst)))
    return worst < 1e-9, f"worst endpoint error {worst:.2e}"


def _check_solver_agreement() -> tuple[bool, str]:
    worst = 0.0
    rng = np.random.default_rng(5)
    for size in (4, 5):
        inst = sample_instance(Family.ALL_TO_ALL, size, (11, size))
        ham = SweepHamiltonian(inst)
        for lam in (0.3, 0.7):
            ground, excited = lanczos_two_lowest(ham.matvec(lam), ham.dim, tol=1e-10, rng=rng)
            d0, d1 = dense_two_lowest(inst, lam)
            worst = max(worst, abs(ground.value - d0), abs(excited.value - d1))
    return worst < 1e-8, f"worst route disagreement {worst:.2e}"


def _check_parity_sector() -> tuple[bool, str]:
    for size in (3, 4):
        logical = sample_instance(Family.ALL_TO_ALL, size, (23, size))
        physical, _ = lhz_encode(logical)
        n_satisfying = int(np.sum(satisfying_sector(physical)))
        if n_satisfying != 1 << size:
            return False, f"size {size}: {n_satisfying} satisfying configs, wanted {1 << size}"
        err = float(np.max(np.abs(sector_energies(physical) - _logical_energies(logical))))
        if err > 1e-9:
            return False, f"size {size}: sector energies off by {err:.2e}"
    return True, "sector counts and energies match enumeration"


def _grad_rel_err(net: Network, x: np.ndarray, y: np.ndarray, probes: int = 8) -> float:
    """Worst relative mismatch against Richardson-extrapolated central differences.

    Entries whose absolute mismatch is below 1e-10 count as exact: at that
    scale the difference quotient itself is dominated by f64 roundoff.
    """
    net.zero_grads()
    pred = net.forward(x)
    _, grad = mse_loss(pred, y)
    net.backward(grad)
    analytic = net.gradients()
    rng = np.random.default_rng(3)
    worst = 0.0
    for name, p in net.parameters().items():
        flat = p.reshape(-1)
        for idx in rng.choice(flat.size, size=min(probes, flat.size), replace=False):
            def quotient(h: float) -> float:
                keep = flat[idx]
                flat[idx] = keep + h
                up, _ = mse_loss(net.forward(x), y)
                flat[idx] = keep - h
                dn, _ = mse_loss(net.forward(x), y)
                flat[idx] = keep
                return (up - dn) / (2 * h)

            numeric = (4 * quotient(5e-5) - quotient(1e-4)) / 3
            a = analytic[name].reshape(-1)[idx]
            err = abs(a - numeric)
            if err > 1e-10:
                worst = max(worst, err / max(abs(numeric), abs(a), 1e-8))
    return worst


def _check_gradients() -> tuple[bool, str]:
    rng = np.random.default_rng(17)
    worst = 0.0

    net = Network(fcnn_spec(5, 4, hidden=(8,)), seed=1, dtype="f64")
    x = rng.standard_normal((6, 5))
    y = rng.standard_normal((6, 4))
    worst = max(worst, _grad_rel_err(net, x, y))

    net = Network(lstm_spec(3, units=(5,)), seed=2, dtype="f64")
    x = rng.standard_normal((4, 5, 3))
    y = rng.standard_normal((4, 5, 1))
    worst = max(worst, _grad_rel_err(net, x, y))
    return worst < 1e-5, f"worst finite-difference mismatch {worst:.2e}"


def _check_round_trips() -> tuple[bool, str]:
    chain = sample_instance(Family.NEAREST_NEIGHBOR_1D, 5, (31, 0))
    full = sample_instance(Family.ALL_TO_ALL, 4, (31, 1))

    flat = encode_flat([full])[0]
    back = decode_flat(flat, Family.ALL_TO_ALL, 4)
    if back.couplings != full.couplings or back.fields != full.fields:
        return False, "flat round trip changed values"

    seq = encode_sequence([full], n_steps=7)[0]
    back = decode_sequence(seq, Family.ALL_TO_ALL, 4)
    if back.couplings != full.couplings or back.fields != full.fields:
        return False, "sequence round trip changed values"

    line = encode_line([chain], n_steps=7, m_embed=9, offsets=np.array([2]))[0]
    back = decode_line(line)
    if back.couplings != chain.couplings or back.fields != chain.fields:
        return False, "line round trip changed values"

    physical, _ = lhz_encode(full)
    canvas = encode_canvas([physical], n_steps=7, grid_shape=(7, 7), offsets=np.array([[1, 2]]))
    back_entries = decode_canvas(canvas[0])
    if back_entries != [(i, j, v) for i, j, v in physical.couplings]:
        return False, "canvas round trip changed values"
    return True, "flat, sequence, line, and canvas encodings invert exactly"


def _check_break_even() -> tuple[bool, str]:
    analysis = speedup_analysis(90000, 5400, "0.96", "0.005", tau_generate="0.12")
    if analysis.min_use_count != 19:
        return False, f"reference break-even gave {analysis.min_use_count}, wanted 19"
    return True, "reference break-even count is 19"


def _check_training_determinism() -> tuple[bool, str]:
    rng = np.random.default_rng(41)
    x = rng.standard_normal((24, 6))
    y = rng.standard_normal((24, 3))

    def run():
        net = Network(fcnn_spec(6, 3, hidden=(10,)), seed=4, dtype="f64")
        return train(net, (x, y), (x, y), epochs=3, batch_size=8, seed=9).to_json()

    first, second = run(), run()
    if first != second:
        return False, "repeated runs differ"
    return True, "repeated f64 runs give identical histories"


CHECKS = [
    ("sweep endpoints", _check_endpoints),
    ("solver route agreement", _check_solver_agreement),
    ("parity sector", _check_parity_sector),
    ("gradients", _check_gradients),
    ("encoding round trips", _check_round_trips),
    ("break-even oracle", _check_break_even),
    ("training determinism", _check_training_determinism),
]


def run_diagnostics() -> list[dict]:
    results = []
    for name, check in CHECKS:
        try:
            passed, detail = check()
        except Exception as err:  # a crash is a failed check, not a crashed run
            passed, detail = False, f"raised {type(err).__name__}: {err}"
        results.append({"name": name, "passed": bool(passed), "detail": detail})
    return results
