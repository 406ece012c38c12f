"""Golden-value regression corpus.

Each :class:`GoldenRecord` fixes one observable of one public operation,
with a tolerance and a provenance:

``"trivial"``
    the value follows by direct evaluation;
``"published"``
    the value is a stated result of the theory the package implements;
``"derived"``
    the value comes from an independent oracle. The record names a
    standalone script under ``goldens/oracles`` that recomputes it with
    arbitrary precision arithmetic or brute force.

A record either runs a CLI config in process (``config``) or calls a probe
from :data:`PROBES` (``probe``). ``extract`` is a JSON pointer into the
resulting document.

Run ``python -m projlab.docs_goldens`` to verify the shipped corpus.
"""
from __future__ import annotations

import json
import math
import subprocess
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .cli import ExperimentConfig, execute
from .entropy_functionals import b_function, c_constant, change_of_variable_delta, log_energy
from .errors import ContractViolation, CorpusIntegrityError
from .free_moments import BlockFamily, SingleBlock, additivity_gap, free_mixed_moment
from .grassmann_sim import GibbsPairSpec, MicrostateSpec, microstate_membership, \
    sample_gibbs_pair_batch, sample_pair_eigenvalues, sample_projection
from .linalg_core import as_generator, grassmann_geodesic, hermitian_eigen, hs_inner, hs_norm, \
    random_hermitian, random_tangent, sample_haar_unitary, tangent_project
from .pressure import PressureHamiltonian, eta_pair_bound, pressure_single
from .transport import wasserstein2_interval
from .two_projection_model import FunctionOnUnitInterval, IntervalMeasure, canonical_form, \
    free_pair_state, pair_moment, pushforward_state

PROVENANCE_KINDS = ("trivial", "published", "derived")

PUBLIC_OPERATIONS = (
    "sample_haar_unitary", "hermitian_eigen", "grassmann_geodesic", "tangent_project",
    "sample_projection", "sample_pair_eigenvalues", "sample_gibbs_pair", "microstate_membership",
    "estimate_microstate_logprob", "canonical_form", "pair_moment", "pushforward_state",
    "free_pair_state", "log_energy", "b_function", "c_constant", "chi_proj_pair",
    "change_of_variable_delta", "free_mixed_moment", "asymptotic_freeness_report",
    "additivity_gap", "wasserstein2_interval", "surrogate_tci_check", "hessian_bound_check",
    "pressure_single", "equilibrium_pressure", "mc_pressure", "eta_pair_bound", "run",
)


def _oracle_dir() -> Path:
    return Path(str(resources.files("projlab").joinpath("goldens", "oracles")))


def _corpus_dir() -> Path:
    return Path(str(resources.files("projlab").joinpath("goldens", "v1")))


@dataclass(frozen=True)
class GoldenRecord:
    """One frozen observable.

    Attributes
    ----------
    id : str
        Unique identifier.
    operation : str
        Public operation the record covers.
    expected : float, str or list
        Frozen value; ``"inf"``/``"-inf"`` encode infinities.
    tol : float
        Absolute tolerance (elementwise for lists).
    provenance : dict
        ``{"kind": ..., "note": ...}`` plus ``"oracle"`` (a script file
        name) for derived records.
    config : dict, optional
        CLI config run in process.
    probe : dict, optional
        ``{"op": name, "args": {...}}`` naming an entry of :data:`PROBES`.
    extract : str
        JSON pointer into the output document.
    """

    id: str
    operation: str
    expected: Any
    tol: float
    provenance: dict
    config: dict | None = None
    probe: dict | None = None
    extract: str = ""

    def __post_init__(self):
        kind = self.provenance.get("kind") if isinstance(self.provenance, dict) else None
        if kind not in PROVENANCE_KINDS:
            raise CorpusIntegrityError(f"{self.id}: provenance kind must be one of {PROVENANCE_KINDS}")
        if kind == "derived" and not self.provenance.get("oracle"):
            raise CorpusIntegrityError(f"{self.id}: derived records must name their oracle")
        if (self.config is None) == (self.probe is None):
            raise CorpusIntegrityError(f"{self.id}: exactly one of config and probe is required")

    @classmethod
    def from_dict(cls, d: dict) -> "GoldenRecord":
        try:
            return cls(d["id"], d["operation"], d["expected"], float(d["tol"]), d["provenance"],
                       d.get("config"), d.get("probe"), d.get("extract", ""))
        except KeyError as exc:
            raise CorpusIntegrityError(f"record lacks field {exc}") from None

    def to_dict(self) -> dict:
        d = {"id": self.id, "operation": self.operation, "expected": self.expected,
             "tol": self.tol, "provenance": self.provenance, "extract": self.extract}
        if self.config is not None:
            d["config"] = self.config
        if self.probe is not None:
            d["probe"] = self.probe
        return d


@dataclass(frozen=True)
class GoldenResult:
    id: str
    passed: bool
    observed: Any
    expected: Any
    tol: float
    message: str = ""


@dataclass
class GoldenReport:
    """Per-record outcomes; ``status`` is 0 when every record passed."""

    results: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def status(self) -> int:
        return 0 if self.ok else 1

    def lines(self) -> list[str]:
        return [f"{'PASS' if r.passed else 'FAIL'} {r.id}: observed={r.observed!r} "
                f"expected={r.expected!r} tol={r.tol:g}{' ' + r.message if r.message else ''}"
                for r in self.results]


# ---------------------------------------------------------------------------
# probes: small in-process experiments for operations without a CLI command


def _probe_haar_abs(args, rng):
    U = sample_haar_unitary(int(args["N"]), rng)
    return {"abs_u00": float(abs(U[0, 0])),
            "unitarity": float(np.max(np.abs(U @ U.conj().T - np.eye(U.shape[0]))))}


def _probe_eigen(args, rng):
    lam, V = hermitian_eigen(np.diag(np.asarray(args["diag"], dtype=float)).astype(complex))
    return {"eigenvalues": lam.tolist()}


def _probe_geodesic_fd(args, rng):
    N, k, h = int(args["N"]), int(args["k"]), float(args["h"])
    P = sample_projection(N, k, rng)
    X = random_tangent(P, rng)
    fd = (grassmann_geodesic(P, X, h) - grassmann_geodesic(P, X, -h)) / (2 * h)
    return {"ratio": hs_norm(fd - X) / (10 * h * h * hs_norm(X) ** 3)}


def _probe_tangent_orth(args, rng):
    N, k = int(args["N"]), int(args["k"])
    P = sample_projection(N, k, rng)
    H = random_hermitian(N, rng)
    X = tangent_project(P, H)
    return {"inner": hs_inner(X, H - X)}


def _probe_projection_full(args, rng):
    N = int(args["N"])
    P = sample_projection(N, N, rng)
    return {"distance_to_identity": float(np.max(np.abs(P - np.eye(N))))}


def _probe_pair_mean(args, rng):
    N, k, l, n = int(args["N"]), int(args["k"]), int(args["l"]), int(args["samples"])
    x = np.array([sample_pair_eigenvalues(N, k, l, rng) for _ in range(n)])
    return {"mean": float(x.mean())}


def _probe_gibbs_mean(args, rng):
    N, k, l, n = int(args["N"]), int(args["k"]), int(args["l"]), int(args["samples"])
    spec = GibbsPairSpec(N, k, l, FunctionOnUnitInterval.from_spec(args["psi"]))
    x = sample_gibbs_pair_batch(spec, rng, n, burn_in=500, thin=10)
    return {"mean": float(x.mean())}


def _probe_membership(args, rng):
    N, ranks = int(args["N"]), [int(k) for k in args["ranks"]]
    Ps = [sample_projection(N, k, rng) for k in ranks]
    tm = {tuple(t["word"]): float(t["value"]) for t in args["targets"]}
    spec = MicrostateSpec(N, tuple(ranks), int(args["m"]), float(args["eps"]), tm)
    return {"member": float(microstate_membership(Ps, spec))}


def _probe_canonical_equal(args, rng):
    N, k = int(args["N"]), int(args["k"])
    P = sample_projection(N, k, rng)
    st = canonical_form(P, P)
    return {"corners": list(st.corners), "nu_mass": st.nu_mass,
            "summary": [*st.corners, st.nu_mass]}


def _probe_pair_moment(args, rng):
    st = free_pair_state(float(args["alpha"]), float(args["beta"]), int(args.get("n_nodes", 4000)))
    return {"value": pair_moment(st, args["word"])}


def _probe_pushforward_moment(args, rng):
    st = free_pair_state(float(args["alpha"]), float(args["beta"]), int(args.get("n_nodes", 4000)))
    out = pushforward_state(st, FunctionOnUnitInterval.from_spec(args["psi"]))
    return {"value": pair_moment(out, args["word"]), "beta": out.beta}


def _probe_log_energy(args, rng):
    st = free_pair_state(0.5, 0.5, int(args.get("n_nodes", 4000)))
    return {"value": log_energy(st.nu)}


def _probe_b(args, rng):
    return {"value": b_function(float(args["s"]), float(args["t"]))}


def _probe_c(args, rng):
    return {"value": c_constant(float(args["alpha"]), float(args["beta"]))}


def _probe_delta(args, rng):
    st = free_pair_state(float(args["alpha"]), float(args["beta"]), int(args.get("n_nodes", 2000)))
    return {"value": change_of_variable_delta(st, FunctionOnUnitInterval.from_spec(args["psi"]))}


def _probe_free_moment(args, rng):
    fam = BlockFamily([SingleBlock(float(a)) for a in args["alphas"]])
    return {"value": free_mixed_moment(fam, args["word"])}


def _probe_additivity_self(args, rng):
    fam = BlockFamily([SingleBlock(float(a)) for a in args["alphas"]])
    words = fam.alternating_words(4)
    rep = additivity_gap(fam, {w: fam.moment(w) for w in words})
    return {"score": rep.score}


def _probe_w2_uniform_atom(args, rng):
    uni = IntervalMeasure.from_density(lambda x: np.ones_like(x), 4000, 0.0, 1.0, mass=1.0)
    atom = IntervalMeasure(np.array([float(args["atom"])]), np.array([1.0]))
    return {"value": wasserstein2_interval(uni, atom)}


def _probe_pressure_single(args, rng):
    return {"value": pressure_single(float(args["alpha"]), float(args["h1"]), float(args["h2"]))}


def _probe_eta_zero(args, rng):
    st = free_pair_state(float(args["alpha"]), float(args["beta"]), 1000)
    h0 = PressureHamiltonian(0.0, 0.0, FunctionOnUnitInterval.constant(0.0))
    return {"value": eta_pair_bound(st, [h0], int(args.get("grid_size", 500)))}


PROBES: dict[str, Callable] = {
    "haar_unitary": _probe_haar_abs,
    "hermitian_eigen_diag": _probe_eigen,
    "geodesic_fd": _probe_geodesic_fd,
    "tangent_orthogonality": _probe_tangent_orth,
    "projection_full_rank": _probe_projection_full,
    "pair_eigen_mean": _probe_pair_mean,
    "gibbs_mean": _probe_gibbs_mean,
    "membership": _probe_membership,
    "canonical_equal": _probe_canonical_equal,
    "pair_moment": _probe_pair_moment,
    "pushforward_moment": _probe_pushforward_moment,
    "log_energy_arcsine": _probe_log_energy,
    "b_function": _probe_b,
    "c_constant": _probe_c,
    "change_of_variable_delta": _probe_delta,
    "free_mixed_moment": _probe_free_moment,
    "additivity_self": _probe_additivity_self,
    "w2_uniform_atom": _probe_w2_uniform_atom,
    "pressure_single": _probe_pressure_single,
    "eta_zero_family": _probe_eta_zero,
}


# ---------------------------------------------------------------------------
# evaluation


def _resolve(doc, pointer: str):
    node = doc
    for part in [p for p in pointer.split("/") if p]:
        part = part.replace("~1", "/").replace("~0", "~")
        node = node[int(part)] if isinstance(node, list) else node[part]
    return node


def _as_float(v) -> float:
    if isinstance(v, str):
        return float(v)  # accepts "inf", "-inf", "nan"
    return float(v)


def _close(observed, expected, tol: float) -> bool:
    if isinstance(expected, list):
        return (isinstance(observed, list) and len(observed) == len(expected)
                and all(_close(o, e, tol) for o, e in zip(observed, expected)))
    o, e = _as_float(observed), _as_float(expected)
    if math.isinf(e):
        return o == e
    return math.isfinite(o) and abs(o - e) <= tol


def observe(record: GoldenRecord):
    """Compute the observed value of a record."""
    if record.config is not None:
        _, doc = execute(ExperimentConfig.from_mapping(dict(record.config, format="json")))
    else:
        name = record.probe["op"]
        if name not in PROBES:
            raise CorpusIntegrityError(f"{record.id}: unknown probe {name!r}")
        rng = as_generator(int(record.probe.get("seed", 0)))
        doc = PROBES[name](record.probe.get("args", {}), rng)
    return _resolve(doc, record.extract)


def check_integrity(corpus) -> None:
    """Raise :class:`CorpusIntegrityError` on duplicate ids or missing oracle scripts."""
    seen = set()
    odir = _oracle_dir()
    for r in corpus:
        if r.id in seen:
            raise CorpusIntegrityError(f"duplicate record id {r.id!r}")
        seen.add(r.id)
        if r.provenance["kind"] == "derived":
            script = odir / r.provenance["oracle"]
            if not script.is_file():
                raise CorpusIntegrityError(f"{r.id}: oracle script {r.provenance['oracle']!r} is missing")


def run_oracle(name: str) -> dict:
    """Execute an oracle script and parse the JSON mapping it prints."""
    script = _oracle_dir() / name
    if not script.is_file():
        raise CorpusIntegrityError(f"oracle script {name!r} is missing")
    out = subprocess.run([sys.executable, str(script)], capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def verify_goldens(corpus, run_oracles: bool = False) -> GoldenReport:
    """Recompute every record and compare it with its frozen value.

    With ``run_oracles`` the oracle script of each derived record is also
    executed and its output (key ``record.provenance["key"]``, default the
    record id) must agree with the frozen value within the tolerance.

    Raises
    ------
    ContractViolation
        If the corpus is empty.
    CorpusIntegrityError
        If a derived record names a missing oracle script.
    """
    corpus = list(corpus)
    if not corpus:
        raise ContractViolation("corpus is empty")
    check_integrity(corpus)
    oracle_cache: dict = {}
    report = GoldenReport()
    for r in corpus:
        msg = ""
        try:
            obs = observe(r)
            passed = _close(obs, r.expected, r.tol)
        except CorpusIntegrityError:
            raise
        except Exception as exc:  # a failing record must not stop the sweep
            obs, passed, msg = None, False, f"{type(exc).__name__}: {exc}"
        if run_oracles and r.provenance["kind"] == "derived":
            name = r.provenance["oracle"]
            if name not in oracle_cache:
                oracle_cache[name] = run_oracle(name)
            key = r.provenance.get("key", r.id)
            oval = oracle_cache[name].get(key)
            if oval is None or not _close(oval, r.expected, r.tol):
                passed, msg = False, f"oracle disagrees: {oval!r}"
        report.results.append(GoldenResult(r.id, bool(passed), obs, r.expected, r.tol, msg))
    return report


def load_corpus(directory=None) -> list[GoldenRecord]:
    """Load every ``*.json`` record list in ``directory`` (default: the shipped v1 corpus)."""
    d = Path(directory) if directory is not None else _corpus_dir()
    files = sorted(d.glob("*.json"))
    if not files:
        raise CorpusIntegrityError(f"no corpus files in {d}")
    out = []
    for f in files:
        with open(f, encoding="utf-8") as fh:
            out.extend(GoldenRecord.from_dict(x) for x in json.load(fh))
    return out


def coverage(corpus) -> dict:
    """Number of records per public operation (``run`` counts CLI-config records)."""
    cov = {op: 0 for op in PUBLIC_OPERATIONS}
    for r in corpus:
        cov[r.operation] = cov.get(r.operation, 0) + 1
        if r.config is not None:
            cov["run"] += 1
    return cov


def main(argv=None) -> int:
    import argparse

    ap = argparse.ArgumentParser(prog="python -m projlab.docs_goldens")
    ap.add_argument("--corpus", help="directory of corpus files")
    ap.add_argument("--run-oracles", action="store_true", help="also execute oracle scripts")
    args = ap.parse_args(argv)
    try:
        report = verify_goldens(load_corpus(args.corpus), run_oracles=args.run_oracles)
    except CorpusIntegrityError as exc:
        print(f"corpus integrity error: {exc}", file=sys.stderr)
        return 2
    for line in report.lines():
        print(line)
    print(f"{sum(r.passed for r in report.results)}/{len(report.results)} records pass")
    return report.status


if __name__ == "__main__":
    sys.exit(main())
