"""Registry of named experiments and their runners.

Each runner takes a resolved :class:`ExperimentConfig` and returns a list of
:class:`ScanResult`.  :func:`run_experiment` adds the common metadata and
collects every warning raised along the way.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .. import __version__, biphoton as bp, dispersion, hom, interferometry as fi, lightcone as lc
from ..errors import ParameterError
from ..kernels import BACKEND
from ..scan import ScanResult
from .config import EXPERIMENTS, ExperimentConfig

SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_source(src: dict) -> bp.SourceSpec:
    kind = src["type"]
    if kind == "cascade":
        return bp.Cascade(src["sum_frequency"], src["tau1"], src["tau2"], src["omega2"])
    if kind == "gaussian-pdc":
        return bp.GaussianPDC(src["omega01"], src["omega02"], src["sigma_plus"], src["sigma_minus"])
    return bp.TimeBin(src["pulse_width"], src["separation"], src["phase"])


def build_grid(spec: bp.SourceSpec, grid: dict):
    centers = grid["centers"]
    if isinstance(spec, bp.TimeBin):
        if centers is None:
            centers = (0.5 * spec.separation,) * 2
        return bp.TimeGrid((grid["n"],) * 2, tuple(centers), (grid["span"],) * 2)
    if centers is None:
        if isinstance(spec, bp.Cascade):
            centers = (spec.center1, spec.center2)
        else:
            centers = (spec.omega01, spec.omega02)
    return bp.FrequencyGrid((grid["n"],) * 2, tuple(centers), (grid["span"],) * 2)


def build_state(cfg: ExperimentConfig) -> bp.JointAmplitude:
    spec = build_source(cfg.source)
    return bp.make_state(spec, build_grid(spec, cfg.grid))


def _franson(setup: dict, delay: float | None = None) -> fi.FransonSetup:
    aw = setup["arrival_window"]
    return fi.FransonSetup.matched(
        setup["delay"] if delay is None else delay, setup["window"],
        ports=tuple(setup["ports"]), arrival_window=None if aw is None else tuple(aw),
    )


def _medium(m: dict) -> dispersion.DispersiveMedium:
    return dispersion.DispersiveMedium(m["k0"], m["k1"], m["k2"], m["length"])


def check(cfg: ExperimentConfig) -> None:
    """Build the cheap domain objects; raises on any violated invariant."""
    if cfg.source is not None:
        spec = build_source(cfg.source)
        build_grid(spec, cfg.grid)
    s = cfg.setup
    name = cfg.experiment
    if name == "franson-fringes":
        _franson(s)
    elif name == "chsh":
        for d in cfg.sweep["delay"]:
            _franson(s, d)
    elif name == "classical-bound":
        for d in cfg.sweep["delay"]:
            fi.FransonSetup.matched(d, s["window"])
        if s["n_phases"] < 4:
            raise ValueError("n_phases must be >= 4 to fit a fringe")
    elif name == "hom-dispersion":
        _medium(s["medium"])
    elif name == "nonlocal-dispersion":
        for g in cfg.sweep["gdd"]:
            dispersion.DispersiveMedium(k2=g)
    elif name == "propagator-map":
        if not s["eps"] > 0:
            raise ValueError("eps must be > 0")
    elif name == "two-atom-entanglement":
        for r in cfg.sweep["separation"]:
            lc.TwoAtomConfig(r, s["omega"], s["dipole"], s["duration"])
        if not 0 <= s["p_gamma"] <= 1:
            raise ValueError("p_gamma must lie in [0, 1]")
    elif name == "rwa-artifact":
        if not s["t"] > 0 or not s["eps"] > 0:
            raise ValueError("t and eps must be > 0")


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------

def _fringe_fit_meta(sums, rates) -> dict:
    try:
        fit = fi.fit_fringe(sums, rates)
    except ParameterError as exc:
        return {"visibility": None, "fit_note": str(exc)}
    alpha, rms = fi.fit_cos2(sums, rates)
    return {"visibility": fit.visibility, "fit_amplitude": fit.amplitude, "fit_offset": fit.offset,
            "fit_shift": fit.shift, "cos2_alpha": alpha, "cos2_rms_residual": rms}


def run_franson_fringes(cfg):
    state = bp.as_time(build_state(cfg))
    setup = _franson(cfg.setup)
    pairs = [(a, b) for a in cfg.sweep["phi1"] for b in cfg.sweep["phi2"]]
    scan = fi.fringe_scan(state, setup, pairs)
    res = scan.to_scan_result("franson_fringes")
    if len(scan):
        res.metadata.update(_fringe_fit_meta(scan.phase_sums, scan.rates))
    return [res]


def run_chsh(cfg):
    state = bp.as_time(build_state(cfg))
    st = cfg.setup["settings"]
    settings = fi.CHSHSettings(st["a"], st["a_prime"], st["b"], st["b_prime"])
    phases = [(p, 0.0) for p in np.linspace(0, 2 * np.pi, 16, endpoint=False)]
    rows = []
    for d in cfg.sweep["delay"]:
        setup = _franson(cfg.setup, d)
        v = fi.visibility(fi.fringe_scan(state, setup, phases))
        s = fi.chsh_value(state, setup, settings, cfg.setup["minus"])
        rows.append([d, v, s, 2 * SQRT2 * v])
    return [ScanResult("chsh", ["delay", "visibility", "S", "S_from_visibility"], rows,
                       {"settings": vars(settings).copy(), "minus": cfg.setup["minus"]})]


def run_classical_bound(cfg):
    state = bp.as_time(build_state(cfg))
    rows = []
    for d in cfg.sweep["delay"]:
        setup = fi.FransonSetup.matched(d, cfg.setup["window"])
        bc = fi.classical_bound_violated(state, setup, n_phases=cfg.setup["n_phases"])
        rows.append([d, bc.visibility, bc.bound, bc.margin, float(bc.violated)])
    return [ScanResult("classical_bound", ["delay", "visibility", "bound", "margin", "violated"], rows)]


def run_hom_dip(cfg):
    return [hom.hom_scan(build_state(cfg), cfg.sweep["tau"])]


def run_hom_dispersion(cfg):
    state = build_state(cfg)
    tau = cfg.sweep["tau"]
    medium = _medium(cfg.setup["medium"])
    bare = hom.hom_scan(state, tau)
    disp = hom.hom_scan(state, tau, medium)
    meta = {"medium": vars(medium).copy()}
    if len(tau) >= 3:
        meta["width_bare"] = bare.metadata["dip_width"]
        meta["width_dispersed"] = disp.metadata["dip_width"]
        meta["width_ratio"] = meta["width_dispersed"] / meta["width_bare"]
    rows = np.column_stack([bare.column("tau"), bare.column("p"), disp.column("p")]) if len(tau) else []
    return [ScanResult("hom_dispersion", ["tau", "p_bare", "p_dispersed"], rows, meta)]


def run_nonlocal_dispersion(cfg):
    state = build_state(cfg)
    rows = []
    for g in cfg.sweep["gdd"]:
        m = dispersion.DispersiveMedium(k2=g)
        rows.append([g, dispersion.nonlocal_cancellation_check(state, m, m.negated()),
                     dispersion.nonlocal_cancellation_check(state, m, m)])
    return [ScanResult("nonlocal_dispersion", ["gdd", "ratio_opposite", "ratio_same"], rows,
                       {"bare_correlation_width": bp.correlation_width(state)})]


def run_propagator_map(cfg):
    x = np.asarray(cfg.sweep["x"])
    t = np.asarray(cfg.sweep["t"])
    eps = cfg.setup["eps"]
    tt, xx = np.meshgrid(t, x, indexing="ij")
    d = lc.feynman_propagator(np.abs(xx), tt, eps)
    d = np.asarray(d).reshape(tt.shape)
    rows = np.column_stack([xx.ravel(), tt.ravel(), d.real.ravel(), d.imag.ravel(), np.abs(d).ravel()])
    outside = np.abs(xx) > np.abs(tt)
    meta = {"eps": eps, "light_cone": "|x| = |t|", "outside_cone_points": int(outside.sum()),
            "min_abs_outside_cone": float(np.abs(d)[outside].min()) if outside.any() else None}
    return [ScanResult("propagator_map", ["x", "t", "re", "im", "abs"], rows, meta)]


def run_two_atom(cfg):
    s = cfg.setup
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for r in cfg.sweep["separation"]:
        atoms = lc.TwoAtomConfig(r, s["omega"], s["dipole"], s["duration"])
        b = lc.amplitude_b_closed(atoms)
        bn = lc.amplitude_b_numeric(atoms)
        p_gamma = float(rng.uniform(0.0, s["p_gamma"])) if s["random_p_gamma"] else s["p_gamma"]
        p_gamma = min(p_gamma, 1.0 - abs(b) ** 2)
        state = lc.assemble_two_atom_state(b, p_gamma)
        post = lc.post_select(state)
        rel = abs(bn.value / b - 1) if b != 0 else 0.0
        row = [r, b.real, b.imag, bn.value.real, bn.value.imag, rel, p_gamma, post.success,
               lc.concurrence(post), lc.mutual_information(post)]
        if post.b != 0:
            bal = lc.balance_to_maximal(post)
            row += [bal.cos_theta, bal.success, lc.concurrence(bal.state), lc.mutual_information(bal.state)]
        else:
            row += [math.nan] * 4
        rows.append(row)
    cols = ["separation", "b_re", "b_im", "b_numeric_re", "b_numeric_im", "rel_diff", "p_gamma",
            "post_success", "concurrence_post", "mi_post", "cos_theta", "total_success",
            "concurrence_balanced", "mi_balanced"]
    return [ScanResult("two_atom_entanglement", cols, rows, {"alpha_fs": lc.ALPHA_FS})]


def run_rwa(cfg):
    t, eps = cfg.setup["t"], cfg.setup["eps"]
    rows = []
    for r in cfg.sweep["r"]:
        p, out = lc.rwa_detection_probability(r, t, eps)
        rows.append([r, t, p, float(out)])
    res = ScanResult("rwa_artifact", ["r", "t", "p", "outside_cone"], rows)
    mask = (res.column("outside_cone") > 0) & (res.column("p") > 0) if len(res) else []
    if len(res) and np.count_nonzero(mask) >= 2:
        slope = np.polyfit(np.log(res.column("r")[mask]), np.log(res.column("p")[mask]), 1)[0]
        res.metadata["fitted_exponent"] = float(slope)
    return [res]


RUNNERS = {
    "franson-fringes": run_franson_fringes,
    "chsh": run_chsh,
    "classical-bound": run_classical_bound,
    "hom-dip": run_hom_dip,
    "hom-dispersion": run_hom_dispersion,
    "nonlocal-dispersion": run_nonlocal_dispersion,
    "propagator-map": run_propagator_map,
    "two-atom-entanglement": run_two_atom,
    "rwa-artifact": run_rwa,
}

assert set(RUNNERS) == set(EXPERIMENTS)


def run_experiment(cfg: ExperimentConfig) -> list[ScanResult]:
    """Run one experiment; every warning raised is recorded in the metadata."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        results = RUNNERS[cfg.experiment](cfg)
    msgs = []
    for w in caught:
        text = f"{w.category.__name__}: {w.message}"
        if text not in msgs:
            msgs.append(text)
    for res in results:
        res.metadata = {
            "experiment": cfg.experiment,
            "scan": res.name,
            "library_version": __version__,
            "backend": BACKEND,
            "seed": cfg.seed,
            "config": cfg.to_dict(),
            "warnings": msgs,
            **res.metadata,
        }
    return results
