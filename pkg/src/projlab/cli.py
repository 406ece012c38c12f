"""Batch front end.

A run is described by an :class:`ExperimentConfig`: a command, its
parameters, a seed, an output path and a format. Configs are YAML (or JSON)
files; command-line flags override file values.

Exit codes: 0 on success, 2 when the config does not validate, 3 when a
numerical guard refuses to produce a result. Errors are reported on stderr
as a JSON record.

Sample batches use the CSV layout ``sample,index,value`` (one row per
eigenvalue, ``index`` ascending within a sample).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

import jsonschema
import numpy as np
import yaml

from . import SCHEMA, __version__
from . import kernels
from .entropy_functionals import chi_proj_pair, change_of_variable_delta
from .errors import ContractViolation, ConvergenceError, DomainError, InvalidFieldError, \
    InvalidRankError, NumericGuardError, ProjlabError
from .free_moments import BlockFamily, PairBlock, SingleBlock, asymptotic_freeness_report
from .grassmann_sim import GibbsPairSpec, MicrostateSpec, estimate_microstate_logprob, \
    sample_gibbs_pair_batch, sample_pair_eigenvalues_batch
from .linalg_core import as_generator
from .pressure import PressureHamiltonian, equilibrium_pressure, mc_pressure
from .transport import arcsine_window_state, beta_density_state, hessian_bound_check, \
    surrogate_tci_check, tci_family
from .two_projection_model import FunctionOnUnitInterval, IntervalMeasure, PairState, \
    free_pair_state, pushforward_state

COMMANDS = ("sample", "entropy", "pushforward", "freeness", "microstate", "tci", "hessian",
            "pressure", "equilibrium")
STOCHASTIC = frozenset({"sample", "freeness", "microstate", "hessian", "pressure"})

EXIT_OK, EXIT_SCHEMA, EXIT_GUARD = 0, 2, 3


class ConfigError(ProjlabError):
    """The configuration does not validate."""


def load_schema(name: str) -> dict:
    """Load a shipped JSON schema by file stem."""
    text = resources.files("projlab").joinpath("schemas", f"{name}.json").read_text("utf-8")
    return json.loads(text)


@dataclass
class ExperimentConfig:
    """One seeded, fully specified run."""

    command: str
    parameters: dict = field(default_factory=dict)
    seed: int | None = None
    output_path: str | None = None
    format: str = "json"
    threads: int = 1

    def to_dict(self) -> dict:
        return {"command": self.command, "parameters": self.parameters, "seed": self.seed,
                "output_path": self.output_path, "format": self.format, "threads": self.threads}

    @classmethod
    def from_mapping(cls, d: dict) -> "ExperimentConfig":
        validate_config(d)
        return cls(d["command"], dict(d.get("parameters") or {}), d.get("seed"),
                   d.get("output_path"), d.get("format", "json"), int(d.get("threads", 1)))


def validate_config(d: Any):
    """Validate a raw config mapping; raises :class:`ConfigError`."""
    try:
        jsonschema.validate(d, load_schema("config"))
        jsonschema.validate(d.get("parameters") or {}, load_schema(f"params.{d['command']}"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path)
        raise ConfigError(f"config invalid at '{where}': {exc.message}") from None
    if d["command"] in STOCHASTIC and d.get("seed") is None:
        raise ConfigError(f"command '{d['command']}' needs a seed")


# ---------------------------------------------------------------------------
# builders


def build_psi(spec) -> FunctionOnUnitInterval:
    return FunctionOnUnitInterval.from_spec(spec)


def build_state(spec: dict) -> PairState:
    """PairState from a config mapping (see the README for the accepted kinds)."""
    kind = spec.get("kind", "free")
    n = int(spec.get("n_nodes", 4000))
    if kind == "free":
        return free_pair_state(float(spec["alpha"]), float(spec["beta"]), n)
    if kind == "arcsine_window":
        return arcsine_window_state(float(spec["a"]), float(spec["b"]), n)
    if kind == "beta_density":
        return beta_density_state(float(spec["a"]), float(spec["b"]), n)
    if kind == "pushforward":
        return pushforward_state(build_state(spec["base"]), build_psi(spec["psi"]))
    if kind == "document":
        with open(spec["path"], encoding="utf-8") as fh:
            doc = json.load(fh)
        return PairState.from_dict(doc.get("state", doc))
    if kind == "explicit":
        return PairState.from_dict(spec)
    if kind == "samples":
        return state_from_samples(read_sample_csv(spec["path"]), int(spec["N"]), int(spec["k"]),
                                  int(spec["l"]))
    raise ConfigError(f"unknown state kind {kind!r}")


def state_from_samples(batch: np.ndarray, N: int, k: int, l: int) -> PairState:
    """Pooled empirical pair state of a batch of ``PQP`` eigenvalue samples."""
    n_s = batch.shape[0]
    x = batch.reshape(-1)
    inside = (x > 1e-8) & (x < 1.0 - 1e-8)
    w = 2.0 / (N * n_s)
    nu = IntervalMeasure.from_atoms(x[inside], np.full(int(inside.sum()), w))
    n1 = np.sum(x >= 1.0 - 1e-8) / n_s
    n0 = np.sum(x <= 1e-8) / n_s
    a11, a10 = n1 / N, n0 / N
    a01 = (l - n1) / N - 0.5 * nu.total_mass
    a00 = 1.0 - a11 - a10 - a01 - nu.total_mass
    return PairState.from_parts((a11, a10, max(a01, 0.0), max(a00, 0.0)), nu)


def build_hamiltonian(p: dict) -> PressureHamiltonian:
    return PressureHamiltonian(float(p.get("A", 0.0)), float(p.get("B", 0.0)),
                               build_psi(p.get("psi", "zero")))


def build_family(blocks: list) -> BlockFamily:
    out = []
    for b in blocks:
        if b["type"] == "single":
            out.append(SingleBlock(float(b["alpha"])))
        else:
            sampler = b.get("sampler", "haar")
            if sampler == "gibbs":
                psi = build_psi(b["psi"])
                sol = equilibrium_pressure(float(b["alpha"]), float(b["beta"]),
                                           PressureHamiltonian(0.0, 0.0, psi),
                                           int(b.get("grid_size", 1000)))
                out.append(PairBlock.gibbs(sol.state, psi))
            else:
                out.append(PairBlock.haar(float(b["alpha"]), float(b["beta"])))
    return BlockFamily(out)


# ---------------------------------------------------------------------------
# commands; each returns (json_document, csv_header, csv_rows)


def _cmd_sample(p, rng, cfg):
    N, k, l, n = int(p["N"]), int(p["k"]), int(p["l"]), int(p["samples"])
    ens = p.get("ensemble", "pair")
    if ens == "pair":
        batch = sample_pair_eigenvalues_batch(N, k, l, n, rng)
    else:
        spec = GibbsPairSpec(N, k, l, build_psi(p.get("psi", "zero")))
        batch = sample_gibbs_pair_batch(spec, rng, n, int(p.get("burn_in", 500)), int(p.get("thin", 10)))
    doc = {"ensemble": ens, "N": N, "k": k, "l": l, "samples": batch.tolist()}
    return doc, *sample_rows(batch)


def _cmd_entropy(p, rng, cfg):
    rep = chi_proj_pair(build_state(p["state"]))
    d = rep.to_dict()
    return {"report": d}, list(d), [list(d.values())]


def _cmd_pushforward(p, rng, cfg):
    st = build_state(p["state"])
    psi = build_psi(p["psi"])
    out = pushforward_state(st, psi)
    before, after = chi_proj_pair(st).chi, chi_proj_pair(out).chi
    delta = change_of_variable_delta(st, psi)
    doc = {"psi_id": psi.name, "chi_before": before, "chi_after": after, "delta": delta,
           "state": out.to_dict()}
    head = ["psi_id", "chi_before", "chi_after", "delta", "alpha", "beta", "a11", "a10", "a01", "a00"]
    row = [psi.name, before, after, delta, out.alpha, out.beta, *out.corners]
    return doc, head, [row]


def _cmd_freeness(p, rng, cfg):
    fam = build_family(p["blocks"])
    rows = asymptotic_freeness_report(fam, p["words"], p["N_list"], int(p["samples"]), rng,
                                      threads=cfg.threads)
    head = ["word", "N", "samples", "mean_abs_error", "std_error", "decreasing", "available", "note"]
    return {"rows": rows}, head, [[r[h] for h in head] for r in rows]


def _cmd_microstate(p, rng, cfg):
    N, ranks, m = int(p["N"]), [int(k) for k in p["ranks"]], int(p["m"])
    targets = p["targets"]
    if isinstance(targets, dict) and "free" in targets:
        fam = BlockFamily([SingleBlock(float(a)) for a in targets["free"]])
        from .two_projection_model import words_up_to
        tm = {w: fam.moment(w) for w in words_up_to(range(len(ranks)), m)}
    else:
        tm = {tuple(t["word"]): float(t["value"]) for t in targets}
    spec = MicrostateSpec(N, tuple(ranks), m, float(p["eps"]), tm)
    est = estimate_microstate_logprob(spec, int(p["samples"]), rng)
    d = {"estimate": est.estimate, "accepted": est.accepted, "samples": est.samples,
         "lower": est.lower, "upper": est.upper}
    return d, list(d), [list(d.values())]


def _cmd_tci(p, rng, cfg):
    if p.get("family") == "standard":
        states = tci_family(int(p.get("n_nodes", 2000)))
    else:
        states = [build_state(p["state"])]
    reps = [surrogate_tci_check(s).to_dict() for s in states]
    head = ["index", "lhs", "rhs", "slack", "holds"]
    rows = [[i, r["lhs"], r["rhs"], r["slack"], r["holds"]] for i, r in enumerate(reps)]
    return {"reports": reps, "all_hold": all(r["holds"] for r in reps)}, head, rows


def _cmd_hessian(p, rng, cfg):
    psi = build_psi(p["psi"])
    worst, trials = hessian_bound_check(int(p["N"]), int(p["k"]), int(p["l"]), psi,
                                        int(p["trials"]), rng, float(p.get("h", 1e-3)),
                                        return_trials=True)
    rows = [[i, t.second_derivative, t.bound, t.ratio] for i, t in enumerate(trials)]
    doc = {"psi_id": psi.name, "worst_ratio": worst,
           "trials": [{"second_derivative": t.second_derivative, "bound": t.bound, "ratio": t.ratio}
                      for t in trials]}
    return doc, ["trial", "second_derivative", "bound", "ratio"], rows


def _cmd_pressure(p, rng, cfg):
    h = build_hamiltonian(p)
    N, k, l = int(p["N"]), int(p["k"]), int(p["l"])
    est = mc_pressure(N, k, l, h, int(p.get("samples", 1000)), rng,
                      method=p.get("method", "thermodynamic"), n_nodes=int(p.get("n_nodes", 8)),
                      burn_in=int(p.get("burn_in", 1000)), thin=int(p.get("thin", 5)))
    d = {"alpha": k / N, "beta": l / N, "A": h.A, "B": h.B, "psi_id": h.psi.name, "N": N,
         "estimate": est.estimate, "std_error": est.std_error, "method": est.method}
    return d, list(d), [list(d.values())]


def _cmd_equilibrium(p, rng, cfg):
    h = build_hamiltonian(p)
    sol = equilibrium_pressure(float(p["alpha"]), float(p["beta"]), h, int(p.get("grid_size", 2000)))
    doc = {"alpha": float(p["alpha"]), "beta": float(p["beta"]), "A": h.A, "B": h.B,
           "psi_id": h.psi.name, "value": sol.value, "kkt_residual": sol.kkt_residual,
           "iterations": sol.iterations, "nu": sol.nu_star.to_dict()}
    rows = [[r["x"], r["weight"], r["cell_lo"], r["cell_hi"]] for r in sol.to_rows()]
    return doc, ["x", "weight", "cell_lo", "cell_hi"], rows


HANDLERS = {
    "sample": _cmd_sample,
    "entropy": _cmd_entropy,
    "pushforward": _cmd_pushforward,
    "freeness": _cmd_freeness,
    "microstate": _cmd_microstate,
    "tci": _cmd_tci,
    "hessian": _cmd_hessian,
    "pressure": _cmd_pressure,
    "equilibrium": _cmd_equilibrium,
}


# ---------------------------------------------------------------------------
# serialisation


def _clean(v):
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, (np.floating,)):
        return _clean(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    return v


def dumps_json(doc: dict) -> str:
    return json.dumps(_clean(doc), sort_keys=True, indent=1, allow_nan=False) + "\n"


def _csv_cell(v):
    v = _clean(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dumps_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_csv_cell(v) for v in r])
    return buf.getvalue()


def sample_rows(batch: np.ndarray):
    """Header and rows of the sample CSV layout for a ``(samples, k)`` array."""
    rows = [[s, i, float(v)] for s, row in enumerate(batch) for i, v in enumerate(row)]
    return ["sample", "index", "value"], rows


def write_sample_csv(path: str, batch: np.ndarray):
    """Write eigenvalue samples in the ``sample,index,value`` layout."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps_csv(*sample_rows(np.asarray(batch))))


def read_sample_csv(path: str) -> np.ndarray:
    """Read a ``sample,index,value`` CSV back into a ``(samples, k)`` array."""
    with open(path, encoding="utf-8", newline="") as fh:
        rd = csv.DictReader(fh)
        if rd.fieldnames != ["sample", "index", "value"]:
            raise ConfigError("sample CSV must have header sample,index,value")
        data: dict = {}
        for r in rd:
            data.setdefault(int(r["sample"]), {})[int(r["index"])] = float(r["value"])
    if not data:
        raise ConfigError("sample CSV is empty")
    k = len(data[min(data)])
    out = np.empty((len(data), k))
    for s, (_, row) in enumerate(sorted(data.items())):
        if sorted(row) != list(range(k)):
            raise ConfigError("every sample must list indices 0..k-1")
        out[s] = [row[i] for i in range(k)]
    return out


def git_blob_hash(data: bytes) -> str:
    """SHA-1 of ``b"blob <len>\\0" + data``, as ``git hash-object`` computes it."""
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


# ---------------------------------------------------------------------------
# driver


def execute(cfg: ExperimentConfig) -> tuple[str, dict]:
    """Run a validated config in process and return ``(text, json_document)``."""
    rng = as_generator(cfg.seed if cfg.seed is not None else 0)
    doc, head, rows = HANDLERS[cfg.command](cfg.parameters, rng, cfg)
    doc = {"schema": SCHEMA, "command": cfg.command, "seed": cfg.seed, **doc}
    doc = _clean(doc)
    try:
        jsonschema.validate(doc, load_schema(f"output.{cfg.command}"))
    except jsonschema.ValidationError as exc:
        raise ContractViolation(f"output fails its schema: {exc.message}") from None
    text = dumps_json(doc) if cfg.format == "json" else dumps_csv(head, rows)
    return text, doc


def _error(kind: str, message: str, code: int) -> int:
    rec = {"schema": SCHEMA, "error": {"type": kind, "message": message, "exit_code": code}}
    sys.stderr.write(json.dumps(rec, sort_keys=True) + "\n")
    return code


def run(config) -> int:
    """Execute a config (mapping or :class:`ExperimentConfig`), write outputs, return the exit code."""
    t0 = time.perf_counter()
    try:
        cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_mapping(config)
        text, _ = execute(cfg)
    except ConfigError as exc:
        return _error("schema", str(exc), EXIT_SCHEMA)
    except (NumericGuardError, ConvergenceError) as exc:
        return _error("numeric-guard", str(exc), EXIT_GUARD)
    except (ContractViolation, InvalidRankError, InvalidFieldError, DomainError, KeyError,
            OSError) as exc:
        return _error("schema", f"{type(exc).__name__}: {exc}", EXIT_SCHEMA)
    data = text.encode("utf-8")
    if cfg.output_path:
        d = os.path.dirname(os.path.abspath(cfg.output_path))
        os.makedirs(d, exist_ok=True)
        with open(cfg.output_path, "wb") as fh:
            fh.write(data)
        manifest = {
            "schema": SCHEMA,
            "config": cfg.to_dict(),
            "content_hash": {"algorithm": "git-blob-sha1", "value": git_blob_hash(data)},
            "wall_time_seconds": time.perf_counter() - t0,
            "version": __version__,
            "kernel_backend": kernels.BACKEND,
            "rng": "numpy Philox4x64-10",
        }
        with open(cfg.output_path + ".manifest.json", "w", encoding="utf-8") as fh:
            fh.write(dumps_json(manifest))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _parse_set(items):
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = yaml.safe_load(val)
    return out


def _merge(base: dict, over: dict) -> dict:
    out = dict(base)
    for k, v in over.items():
        out[k] = _merge(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else v
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="projlab", description="Seeded experiments on projection pairs.")
    ap.add_argument("--command", choices=COMMANDS)
    ap.add_argument("--config", help="YAML or JSON config file")
    ap.add_argument("--seed", type=int, help="64-bit seed")
    ap.add_argument("--out", help="output file (stdout when omitted)")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--threads", type=int)
    ap.add_argument("--set", action="append", metavar="KEY=VALUE",
                    help="override a parameter, e.g. --set state.alpha=0.3 (repeatable)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    raw: dict = {}
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                raw = yaml.safe_load(fh) or {}
            if not isinstance(raw, dict):
                raise ConfigError("config file must hold a mapping")
        flags = {"command": args.command, "seed": args.seed, "output_path": args.out,
                 "format": args.format, "threads": args.threads}
        raw = _merge(raw, {k: v for k, v in flags.items() if v is not None})
        if args.set:
            raw["parameters"] = _merge(raw.get("parameters") or {}, _parse_set(args.set))
    except (ConfigError, OSError, yaml.YAMLError) as exc:
        return _error("schema", str(exc), EXIT_SCHEMA)
    return run(raw)


if __name__ == "__main__":
    sys.exit(main())
