"""Command-line interface: every simulation as a subcommand driven by a JSON
config plus --set overrides, emitting deterministic CSV/JSON (and PGM) files.

Exit codes: 0 ok, 2 config error, 3 numeric error, 4 I/O error.  Every
output file embeds the resolved config and tool version: JSON documents in
a "provenance" field, CSV files as a leading "# provenance:" comment line.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__, lattice, metrics, multiphoton, photonics, spectral, wavepacket
from .errors import TwistwalkError, ValidationError
from .lattice import PolState, StepSequence
from .multiphoton import ModeIndex


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------

def _load_config(path: str | None, overrides: tuple[str, ...]) -> dict:
    cfg: dict = {}
    if path:
        try:
            cfg = json.loads(Path(path).read_text())
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
        if not isinstance(cfg, dict):
            raise ConfigError("config root must be a JSON object")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            cfg[key] = json.loads(raw)
        except json.JSONDecodeError:
            cfg[key] = raw
    return cfg


def _resolve(cfg: dict, schema: dict) -> dict:
    unknown = set(cfg) - set(schema)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    out = {}
    for key, (caster, default) in schema.items():
        if key in cfg:
            try:
                out[key] = caster(cfg[key])
            except (TypeError, ValueError, ValidationError) as e:
                raise ConfigError(f"invalid value for {key!r}: {e}") from e
        elif default is REQUIRED:
            raise ConfigError(f"missing required config key {key!r}")
        else:
            out[key] = default
    return out


REQUIRED = object()


def _float(x):
    return float(x)


def _int(x):
    v = int(x)
    if v != float(x):
        raise ValueError(f"{x} is not an integer")
    return v


def _bool(x):
    if isinstance(x, bool):
        return x
    raise ValueError(f"{x!r} is not a boolean")


def _str(x):
    if not isinstance(x, str):
        raise ValueError(f"{x!r} is not a string")
    return x


def _opt(caster):
    return lambda x: None if x is None else caster(x)


def _window(x):
    if x is None:
        return None
    lo, hi = int(x[0]), int(x[1])
    if lo > hi:
        raise ValueError("window must be [min, max] with min <= max")
    return (lo, hi)


def _coin(x) -> PolState:
    if isinstance(x, str):
        if x.upper() in ("L", "R", "H", "V"):
            return getattr(PolState, x.upper())()
        raise ValueError(f"unknown coin name {x!r}")
    if len(x) != 2:
        raise ValueError("coin must be two components")
    comps = []
    for c in x:
        if isinstance(c, (list, tuple)):
            comps.append(complex(c[0], c[1]))
        else:
            comps.append(complex(c))
    return PolState.from_components(*comps)


def _mode(x) -> ModeIndex:
    pol, m = x
    if pol not in ("L", "R"):
        raise ValueError("input modes are specified in the circular basis (L/R)")
    return ModeIndex(pol, int(m))


def _k_list(x):
    if x is None:
        return None
    return [float(v) for v in x]


def _sequence(resolved: dict) -> StepSequence:
    # parameter-domain violations here are config mistakes, not numeric ones
    try:
        return StepSequence.preset(resolved["preset"], resolved["delta"], resolved["q"])
    except ValidationError as e:
        raise ConfigError(f"invalid step parameters (preset/delta/q): {e}") from e


_STEP_SCHEMA = {
    "preset": (_str, "standard-paper"),
    "delta": (_float, float(np.pi)),
    "q": (_float, 0.5),
}


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

def _jsonable(value):
    if isinstance(value, PolState):
        return [[value.a[0].real, value.a[0].imag], [value.a[1].real, value.a[1].imag]]
    if isinstance(value, ModeIndex):
        return [value.pol, value.m]
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return value


def _provenance(command: str, resolved: dict) -> dict:
    cfg = {k: _jsonable(v) for k, v in resolved.items() if not k.startswith("_")}
    return {"tool": "twistwalk", "version": __version__,
            "command": command, "config": cfg}


def _json_text(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ": "), indent=1) + "\n"


def _write_csv(path: Path, provenance: dict, rows: list[str]):
    head = "# provenance: " + json.dumps(provenance, sort_keys=True,
                                         separators=(",", ":"))
    path.write_text("\n".join([head] + rows) + "\n")


def _out_dir(resolved: dict) -> Path:
    d = Path(resolved["out_dir"])
    d.mkdir(parents=True, exist_ok=True)
    return d


# ---------------------------------------------------------------------------
# command bodies
# ---------------------------------------------------------------------------

def cmd_walk(cfg: dict) -> list[Path]:
    schema = dict(_STEP_SCHEMA)
    schema.update({
        "alpha0": (_float, 0.0),
        "n": (_int, REQUIRED),
        "coin": (_coin, PolState.L()),
        "m0": (_int, 0),
        "window": (_window, None),
        "shots": (_opt(_int), None),
        "seed": (_int, 0),
        "gouy_d_over_zr": (_opt(_float), None),
        "efficiency": (_opt(lambda x: {int(k): float(v) for k, v in x.items()}), None),
        "out_dir": (_str, "."),
        "prefix": (_str, "walk_"),
    })
    r = _resolve(cfg, schema)
    seq = _sequence(r)
    if r["alpha0"] != 0.0:
        elements = tuple(
            lattice.QPlate(e.charge, e.retardance, r["alpha0"])
            if isinstance(e, lattice.QPlate) else e
            for e in seq.elements)
        seq = StepSequence(elements)
    window = r["window"] or lattice.default_window(r["n"], seq, r["m0"])
    state = lattice.make_localized_state(r["m0"], r["coin"], window)
    interstep = None
    if r["gouy_d_over_zr"] is not None:
        interstep = lambda s: photonics.gouy_step_dephasing(s, r["gouy_d_over_zr"])
    states = lattice.evolve(state, seq, r["n"], interstep=interstep)
    marginals = [lattice.oam_marginal(s) for s in states]
    prov = _provenance("walk", r)
    out = _out_dir(r)
    files = []

    rows = ["step,m,P"]
    for step, dist in enumerate(marginals):
        for m in sorted(dist):
            rows.append(f"{step},{m},{dist[m]!r}")
    p_csv = out / f"{r['prefix']}marginals.csv"
    _write_csv(p_csv, prov, rows)
    files.append(p_csv)

    doc = {
        "provenance": prov,
        "final_marginal": {str(m): v for m, v in sorted(marginals[-1].items())},
        "norm": states[-1].norm(),
        "entropy_bits": lattice.coin_walker_entanglement(states[-1]),
        "state": lattice.state_to_dict(states[-1]),
    }
    if r["efficiency"] is not None:
        eta = r["efficiency"]
        final = marginals[-1]
        biased = {m: v * eta.get(m, 1.0) for m, v in final.items()}
        total = sum(biased.values())
        biased = {m: v / total for m, v in biased.items()}
        doc["biased_marginal"] = {str(m): v for m, v in sorted(biased.items())}
        corrected = photonics.efficiency_correction(biased, eta)
        doc["corrected_marginal"] = {str(m): v for m, v in sorted(corrected.items())}
    p_json = out / f"{r['prefix']}result.json"
    p_json.write_text(_json_text(doc))
    files.append(p_json)

    if r["shots"] is not None:
        rec = metrics.sample_counts(marginals[-1], r["shots"], r["seed"])
        rows = ["m,count"]
        for m in sorted(rec.counts):
            rows.append(f"{m},{rec.counts[m]}")
        p_counts = out / f"{r['prefix']}counts.csv"
        _write_csv(p_counts, prov, rows)
        files.append(p_counts)
    return files


def cmd_bands(cfg: dict) -> list[Path]:
    schema = dict(_STEP_SCHEMA)
    schema["preset"] = (_str, "wavepacket")
    schema.update({
        "k_points": (_int, 1001),
        "mirror_k": (_bool, False),
        "out_dir": (_str, "."),
        "prefix": (_str, "bands_"),
    })
    r = _resolve(cfg, schema)
    seq = _sequence(r)
    n = r["k_points"]
    grid = -np.pi + 2 * np.pi * np.arange(1, n + 1) / n
    bs = spectral.dispersion(seq, grid, r["mirror_k"])
    prov = _provenance("bands", r)
    out = _out_dir(r)
    p_csv = out / f"{r['prefix']}bands.csv"
    _write_csv(p_csv, prov, spectral.band_csv_rows(seq, bs))
    traj = spectral.eigenstate_circle(seq, grid, band=1, mirror_k=r["mirror_k"])
    doc = {
        "provenance": prov,
        "gauge_phase": bs.gauge_phase,
        "gap": bs.gap(),
        "winding_number": spectral.winding_number(seq, mirror_k=r["mirror_k"]),
        "planarity_residual": traj.planarity_residual,
    }
    p_json = out / f"{r['prefix']}bands.json"
    p_json.write_text(_json_text(doc))
    return [p_csv, p_json]


def cmd_wavepacket(cfg: dict) -> list[Path]:
    schema = dict(_STEP_SCHEMA)
    schema["preset"] = (_str, "wavepacket")
    schema.update({
        "sigma": (_float, REQUIRED),
        "k0": (_float, 0.0),
        "band": (_int, 1),
        "cat": (_bool, False),
        "n": (_int, REQUIRED),
        "band_pure": (_bool, False),
        "mirror": (_bool, False),
        "window": (_window, None),
        "sweep_k0": (_k_list, None),
        "out_dir": (_str, "."),
        "prefix": (_str, "wp_"),
    })
    r = _resolve(cfg, schema)
    seq = _sequence(r)
    prov = _provenance("wavepacket", r)
    out = _out_dir(r)
    files = []

    if r["cat"]:
        res = wavepacket.cat_split(r["sigma"], r["k0"], r["n"], seq, r["mirror"])
        doc = {
            "provenance": prov,
            "entropy_bits": res.entropy_bits,
            "separation": res.separation,
            "peaks": list(res.peaks),
            "low_mass": res.low_mass,
            "high_mass": res.high_mass,
            "marginal": {str(m): v for m, v in sorted(res.marginal.items())},
        }
        p_json = out / f"{r['prefix']}cat.json"
        p_json.write_text(_json_text(doc))
        files.append(p_json)
        rows = ["m,P"] + [f"{m},{res.marginal[m]!r}" for m in sorted(res.marginal)]
        p_csv = out / f"{r['prefix']}cat_marginal.csv"
        _write_csv(p_csv, prov, rows)
        files.append(p_csv)
        return files

    spec = wavepacket.WavepacketSpec(r["sigma"], r["k0"], r["band"],
                                     window=r["window"],
                                     band_pure=r["band_pure"], mirror=r["mirror"])
    dists = wavepacket.propagate(spec, seq, r["n"])
    rows = ["step,m,P"]
    stat_rows = ["step,mean,variance"]
    for step, dist in enumerate(dists):
        for m in sorted(dist):
            rows.append(f"{step},{m},{dist[m]!r}")
        stat_rows.append(f"{step},{wavepacket.mean_oam(dist)!r},{wavepacket.variance(dist)!r}")
    p_csv = out / f"{r['prefix']}marginals.csv"
    _write_csv(p_csv, prov, rows)
    files.append(p_csv)
    p_stats = out / f"{r['prefix']}stats.csv"
    _write_csv(p_stats, prov, stat_rows)
    files.append(p_stats)
    ms = sorted(dists[0])
    doc = {
        "provenance": prov,
        "m_min": ms[0],
        "m_max": ms[-1],
        "per_step_marginals": [[dist[m] for m in ms] for dist in dists],
        "mean_oam": [wavepacket.mean_oam(d) for d in dists],
        "variance": [wavepacket.variance(d) for d in dists],
    }
    p_json = out / f"{r['prefix']}result.json"
    p_json.write_text(_json_text(doc))
    files.append(p_json)

    if r["sweep_k0"] is not None:
        sweep = wavepacket.brillouin_sweep(r["sigma"], r["band"], r["sweep_k0"],
                                           r["n"], seq, r["band_pure"], r["mirror"])
        rows = ["k0,mean_oam,variance"]
        for k0, mu, var in sweep:
            rows.append(f"{k0!r},{mu!r},{var!r}")
        p_sweep = out / f"{r['prefix']}sweep.csv"
        _write_csv(p_sweep, prov, rows)
        files.append(p_sweep)
    return files


def cmd_twophoton(cfg: dict) -> list[Path]:
    schema = dict(_STEP_SCHEMA)
    schema["preset"] = (_str, "wavepacket")
    schema.update({
        "n": (_int, REQUIRED),
        "in1": (_mode, ModeIndex("L", 0)),
        "in2": (_mode, ModeIndex("R", 0)),
        "basis": (_str, "linear"),
        "split": (_bool, True),
        "window": (_window, None),
        "shots": (_opt(_int), None),
        "seed": (_int, 0),
        "out_dir": (_str, "."),
        "prefix": (_str, "tp_"),
    })
    r = _resolve(cfg, schema)
    if r["basis"] not in ("circular", "linear"):
        raise ConfigError("basis must be 'circular' or 'linear'")
    seq = _sequence(r)
    window = r["window"] or lattice.default_window(r["n"], seq, 0)
    u = multiphoton.lift_walk_unitary(seq, r["n"], window)
    ipt = multiphoton.ipt_joint(u, r["in1"], r["in2"], r["split"], r["basis"])
    dpt = multiphoton.dpt_joint(u, r["in1"], r["in2"], r["split"], r["basis"])
    prov = _provenance("twophoton", r)
    out = _out_dir(r)
    files = []
    for name, dist in (("ipt", ipt), ("dpt", dpt)):
        p = out / f"{r['prefix']}{name}.csv"
        _write_csv(p, prov, dist.csv_rows())
        files.append(p)
        rows = ["m1,m2,P"]
        oam = dist.oam_pairs()
        for (m1, m2) in sorted(oam):
            rows.append(f"{m1},{m2},{oam[(m1, m2)]!r}")
        p2 = out / f"{r['prefix']}{name}_oam.csv"
        _write_csv(p2, prov, rows)
        files.append(p2)

    doc = {
        "provenance": prov,
        "metrics": metrics.metrics_report(ipt.oam_pairs(), dpt.oam_pairs(),
                                          shots=r["shots"], seed=r["seed"]),
        "tvd_ipt_dpt_oam": metrics.tvd(ipt.oam_pairs(), dpt.oam_pairs()),
        "similarity_ipt_dpt_oam": metrics.similarity(ipt.oam_pairs(), dpt.oam_pairs()),
        "ipt_total": ipt.total(),
        "dpt_total": dpt.total(),
    }
    if r["shots"] is not None:
        rec = multiphoton.sample_joint_counts(ipt, r["shots"], r["seed"])
        rows = ["inequality,pol1,m1,pol2,m2,T,sigma,significance"]
        best = {}
        for which in ("classical", "photon"):
            sig = multiphoton.violation_significance(rec, which)
            for (p, q) in sorted(sig):
                T, s, z = sig[(p, q)]
                rows.append(f"{which},{p.pol},{p.m},{q.pol},{q.m},{T!r},{s!r},{z!r}")
            if sig:
                key = max(sig, key=lambda k: sig[k][2])
                best[which] = {"pair": [list(key[0]), list(key[1])],
                               "T": sig[key][0], "sigma": sig[key][1],
                               "significance": sig[key][2]}
        p_sig = out / f"{r['prefix']}significance.csv"
        _write_csv(p_sig, prov, rows)
        files.append(p_sig)
        doc["top_violations"] = best
        doc["shots"] = r["shots"]
        doc["seed"] = r["seed"]
        doc["rng"] = metrics.RNG_ALGORITHM
    p_json = out / f"{r['prefix']}summary.json"
    p_json.write_text(_json_text(doc))
    files.append(p_json)
    return files


def _target(x) -> dict:
    if not isinstance(x, dict) or "kind" not in x:
        raise ValueError("target must be an object with a 'kind' field")
    kind = x["kind"]
    if kind == "localized":
        return {"kind": kind, "m": int(x["m"])}
    if kind == "gaussian":
        return {"kind": kind, "sigma": float(x["sigma"]), "k0": float(x.get("k0", 0.0))}
    if kind == "coefficients":
        vals = {int(k): complex(v[0], v[1]) for k, v in x["values"].items()}
        return {"kind": kind, "values": vals}
    raise ValueError(f"unknown target kind {kind!r}")


def cmd_hologram(cfg: dict) -> list[Path]:
    schema = {
        "target": (_target, REQUIRED),
        "grid": (lambda x: (int(x[0]), int(x[1])), (256, 256)),
        "w0_pixels": (_opt(_float), None),
        "carrier": (_float, 0.05),
        "pixel_pitch": (_float, 1.0),
        "out_dir": (_str, "."),
        "prefix": (_str, "holo_"),
    }
    r = _resolve(cfg, schema)
    h, w = r["grid"]
    w0 = r["w0_pixels"] or w / 8.0
    t = r["target"]
    if t["kind"] == "localized":
        coeffs = {t["m"]: 1.0 + 0j}
    elif t["kind"] == "gaussian":
        reach = wavepacket.envelope_reach(t["sigma"])
        ms = np.arange(-reach, reach + 1)
        amp = np.exp(-ms.astype(float) ** 2 / (2 * t["sigma"] ** 2))
        coeffs = {int(m): complex(a * np.exp(1j * t["k0"] * m))
                  for m, a in zip(ms, amp)}
    else:
        coeffs = t["values"]
    holo = photonics.hologram_for_walker(coeffs, (h, w), w0,
                                         r["carrier"], r["pixel_pitch"])
    prov = _provenance("hologram", {**r, "target": {
        k: (v if k != "values" else {str(m): [c.real, c.imag] for m, c in v.items()})
        for k, v in t.items()}, "w0_pixels": w0})
    out = _out_dir(r)
    p_pgm = out / f"{r['prefix']}mask.pgm"
    p_pgm.write_bytes(photonics.pgm_bytes(holo))
    p_csv = out / f"{r['prefix']}phases.csv"
    _write_csv(p_csv, prov, photonics.phase_csv_rows(holo))
    doc = {"provenance": prov, "shape": list(holo.shape),
           "phase_min": float(holo.phases.min()), "phase_max": float(holo.phases.max())}
    if t["kind"] == "localized" and t["m"] != 0:
        radius = w0 * np.sqrt(abs(t["m"]) / 2.0)
        doc["fork_winding"] = photonics.fork_winding(holo, radius)
    p_json = out / f"{r['prefix']}summary.json"
    p_json.write_text(_json_text(doc))
    return [p_pgm, p_csv, p_json]


def cmd_radial(cfg: dict) -> list[Path]:
    schema = {
        "m_values": (lambda x: [int(v) for v in x], [0, 1, 2, 3]),
        "p_max": (_int, 3),
        "zeta_values": (_k_list, None),
        "m_overlap": (_int, 1),
        "out_dir": (_str, "."),
        "prefix": (_str, "radial_"),
    }
    r = _resolve(cfg, schema)
    prov = _provenance("radial", r)
    out = _out_dir(r)
    files = []
    rows = ["m,p,abs_c_sq"]
    residuals = {}
    for m in r["m_values"]:
        exp = photonics.qplate_radial_coefficients(m, r["p_max"])
        for p, w in enumerate(exp.powers):
            rows.append(f"{m},{p},{w!r}")
        residuals[str(m)] = exp.residual
    p_csv = out / f"{r['prefix']}coefficients.csv"
    _write_csv(p_csv, prov, rows)
    files.append(p_csv)
    doc = {"provenance": prov, "residuals": residuals}
    if r["zeta_values"] is not None:
        rows = ["m,zeta,overlap"]
        for z in r["zeta_values"]:
            ov = photonics.pupil_overlap(r["m_overlap"], z)
            rows.append(f"{r['m_overlap']},{z!r},{ov!r}")
        p_ov = out / f"{r['prefix']}overlap.csv"
        _write_csv(p_ov, prov, rows)
        files.append(p_ov)
    p_json = out / f"{r['prefix']}summary.json"
    p_json.write_text(_json_text(doc))
    files.append(p_json)
    return files


# ---------------------------------------------------------------------------
# click wiring
# ---------------------------------------------------------------------------

_COMMANDS = {
    "walk": cmd_walk,
    "bands": cmd_bands,
    "wavepacket": cmd_wavepacket,
    "twophoton": cmd_twophoton,
    "hologram": cmd_hologram,
    "radial": cmd_radial,
}


def _run(name: str, config: str | None, overrides: tuple[str, ...]):
    try:
        cfg = _load_config(config, overrides)
        files = _COMMANDS[name](cfg)
    except ConfigError as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(2)
    except TwistwalkError as e:
        click.echo(f"numeric error: {e}", err=True)
        sys.exit(3)
    except OSError as e:
        click.echo(f"I/O error: {e}", err=True)
        sys.exit(4)
    for f in files:
        click.echo(str(f))


@click.group()
@click.version_option(__version__)
def main():
    """Photonic quantum walk simulator in the spin-orbit space of light."""


def _add(name: str, help_text: str):
    @main.command(name=name, help=help_text)
    @click.argument("config", required=False, type=click.Path())
    @click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
                  help="Override a config key (JSON-parsed value); flags win.")
    def _cmd(config, overrides, _name=name):
        _run(_name, config, overrides)


_add("walk", "Single-photon walk from a localized input; per-step OAM marginals.")
_add("bands", "Quasi-energy bands, group velocities, Stokes circle and winding.")
_add("wavepacket", "Gaussian wavepacket propagation, Brillouin sweeps, cat splitting.")
_add("twophoton", "Two-photon joint distributions (IPT/DPT) and inequality tests.")
_add("hologram", "Phase mask preparing a walker state; PGM and CSV output.")
_add("radial", "Q-plate radial leakage coefficients and pupil overlap curve.")


if __name__ == "__main__":
    main()
