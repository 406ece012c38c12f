"""Regenerate the golden corpus under src/projlab/goldens/v1 from the oracle scripts.

Run from anywhere: ``python tools/build_golden_corpus.py``. Oracle values are
computed fresh, so a changed oracle shows up as a corpus diff for review.
"""
import json
import math
import os
import subprocess
import sys

D = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "src", "projlab", "goldens")
def oracle(name):
    return json.loads(subprocess.run([sys.executable, f"{D}/oracles/{name}"], capture_output=True,
                                     text=True, check=True).stdout)
B, M, F, T, P = (oracle(n) for n in ("b_function_oracle.py", "measure_oracle.py",
                                       "free_moment_oracle.py", "tangent_oracle.py",
                                       "pressure_oracle.py"))
def triv(note): return {"kind": "trivial", "note": note}
def pub(note): return {"kind": "published", "note": note}
def der(note, script, key=None):
    d = {"kind": "derived", "note": note, "oracle": script}
    if key: d["key"] = key
    return d
def rec(id, op, expected, tol, prov, probe=None, config=None, extract=""):
    r = {"id": id, "operation": op, "expected": expected, "tol": tol, "provenance": prov, "extract": extract}
    if probe: r["probe"] = probe
    if config: r["config"] = config
    return r
free_half = {"kind": "free", "alpha": 0.5, "beta": 0.5, "n_nodes": 4000}
bad_state = {"kind": "explicit", "alpha": 0.5, "beta": 0.5, "corners": [0.25, 0.0, 0.0, 0.25],
             "nu": {"atoms": [[0.5, 0.5]]}}
files = {
"linalg_core": [
 rec("sample_haar_unitary.unit_modulus", "sample_haar_unitary", 1.0, 1e-12,
     triv("a 1x1 unitary has modulus one"), {"op": "haar_unitary", "seed": 1, "args": {"N": 1}}, extract="/abs_u00"),
 rec("sample_haar_unitary.unitarity", "sample_haar_unitary", 0.0, 1e-10,
     triv("unitarity"), {"op": "haar_unitary", "seed": 2, "args": {"N": 8}}, extract="/unitarity"),
 rec("hermitian_eigen.diagonal", "hermitian_eigen", [1.0, 2.0, 3.0], 1e-12,
     triv("diagonal input, ascending order"), {"op": "hermitian_eigen_diag", "args": {"diag": [3, 1, 2]}}, extract="/eigenvalues"),
 rec("grassmann_geodesic.finite_difference", "grassmann_geodesic", 0.0, 1.0,
     triv("central difference at h = 1e-3 matches the velocity within 10 h^2 |X|^3 (ratio at most 1)"),
     {"op": "geodesic_fd", "seed": 3, "args": {"N": 8, "k": 3, "h": 1e-3}}, extract="/ratio"),
 rec("tangent_project.orthogonality", "tangent_project", T["tangent_project.orthogonality"], 1e-10,
     der("independent block construction of the tangent part", "tangent_oracle.py"),
     {"op": "tangent_orthogonality", "seed": 4, "args": {"N": 8, "k": 3}}, extract="/inner"),
],
"grassmann_sim": [
 rec("sample_projection.full_rank", "sample_projection", 0.0, 1e-10, triv("rank N is the identity"),
     {"op": "projection_full_rank", "seed": 5, "args": {"N": 6}}, extract="/distance_to_identity"),
 rec("sample_pair_eigenvalues.k1_mean", "sample_pair_eigenvalues", M["sample_pair_eigenvalues.k1_mean"], 0.0065,
     der("Beta(3, 5) mean by quadrature; tolerance is 4 standard errors at 1e4 samples", "measure_oracle.py"),
     {"op": "pair_eigen_mean", "seed": 6, "args": {"N": 8, "k": 1, "l": 3, "samples": 10000}}, extract="/mean"),
 rec("sample_gibbs_pair.constant_field_mean", "sample_gibbs_pair", 0.375, 0.015,
     triv("a constant field cancels in the normalisation; 4 standard errors at 2000 samples"),
     {"op": "gibbs_mean", "seed": 7, "args": {"N": 8, "k": 1, "l": 3, "samples": 2000, "psi": "const:0.7"}}, extract="/mean"),
 rec("microstate_membership.loose_eps", "microstate_membership", 1.0, 0.0,
     triv("eps = 2 exceeds every possible moment deviation"),
     {"op": "membership", "seed": 8, "args": {"N": 16, "ranks": [8, 4], "m": 2, "eps": 2.0,
      "targets": [{"word": [0, 1], "value": 0.0}, {"word": [0], "value": 1.0}]}}, extract="/member"),
 rec("estimate_microstate_logprob.exact_rank", "estimate_microstate_logprob", 0.0, 0.0,
     triv("a rank-determined target holds with probability one"),
     config={"command": "microstate", "seed": 9, "parameters": {"N": 16, "ranks": [8], "m": 1, "eps": 0.01,
             "targets": [{"word": [0], "value": 0.5}], "samples": 20}}, extract="/estimate"),
 rec("estimate_microstate_logprob.contradictory", "estimate_microstate_logprob", "-inf", 0.0,
     triv("tau(p) = 0 is impossible at rank N/2"),
     config={"command": "microstate", "seed": 10, "parameters": {"N": 16, "ranks": [8], "m": 1, "eps": 0.1,
             "targets": [{"word": [0], "value": 0.0}], "samples": 20}}, extract="/estimate"),
],
"two_projection_model": [
 rec("canonical_form.equal_projections", "canonical_form", [0.25, 0.0, 0.0, 0.75, 0.0], 1e-12,
     triv("Q = P: only the 11 and 00 corners carry mass"),
     {"op": "canonical_equal", "seed": 11, "args": {"N": 8, "k": 2}}, extract="/summary"),
 rec("pair_moment.efef", "pair_moment", M["pair_moment.efef"], 1e-6,
     der("half the second arcsine moment", "measure_oracle.py"),
     {"op": "pair_moment", "args": {"alpha": 0.5, "beta": 0.5, "word": "efef"}}, extract="/value"),
 rec("pair_moment.e", "pair_moment", 0.3, 1e-12, triv("the trace of e is alpha"),
     {"op": "pair_moment", "args": {"alpha": 0.3, "beta": 0.6, "word": "e", "n_nodes": 500}}, extract="/value"),
 rec("pushforward_state.square_efe", "pushforward_state", M["pushforward_state.square_efe"], 1e-6,
     der("pushing the arcsine law by x^2 turns its second moment into the first", "measure_oracle.py"),
     {"op": "pushforward_moment", "args": {"alpha": 0.5, "beta": 0.5, "psi": "square", "word": "efe"}}, extract="/value"),
 rec("pushforward_state.trace_preserved", "pushforward_state", 0.6, 1e-12,
     pub("the functional calculus preserves the trace of q"),
     {"op": "pushforward_moment", "args": {"alpha": 0.3, "beta": 0.6, "psi": "const:0.4", "word": "e", "n_nodes": 500}}, extract="/beta"),
 rec("free_pair_state.efe", "free_pair_state", M["free_pair_state.efe"], 1e-8,
     der("half the first arcsine moment", "measure_oracle.py"),
     {"op": "pair_moment", "args": {"alpha": 0.5, "beta": 0.5, "word": "efe"}}, extract="/value"),
],
"entropy_functionals": [
 rec("b_function.zero_zero", "b_function", -2 * math.log(2), 1e-12, triv("direct evaluation"),
     {"op": "b_function", "args": {"s": 0, "t": 0}}, extract="/value"),
 rec("b_function.one_zero", "b_function", B["b_function.one_zero"], 1e-12,
     der("40-digit evaluation", "b_function_oracle.py"), {"op": "b_function", "args": {"s": 1, "t": 0}}, extract="/value"),
 rec("b_function.generic", "b_function", B["b_function.generic"], 1e-12,
     der("40-digit evaluation", "b_function_oracle.py"), {"op": "b_function", "args": {"s": 0.3, "t": 1.7}}, extract="/value"),
 rec("c_constant.half_half", "c_constant", B["c_constant.half_half"], 1e-12,
     der("rho^2 B(0, 0) at rho = 1/2", "b_function_oracle.py"), {"op": "c_constant", "args": {"alpha": 0.5, "beta": 0.5}}, extract="/value"),
 rec("c_constant.generic", "c_constant", B["c_constant.generic"], 1e-12,
     der("40-digit evaluation of rho^2 B(u/rho, v/rho)", "b_function_oracle.py"),
     {"op": "c_constant", "args": {"alpha": 0.3, "beta": 0.6}}, extract="/value"),
 rec("c_constant.rho_zero", "c_constant", 0.0, 0.0, pub("C vanishes when rho = 0"),
     {"op": "c_constant", "args": {"alpha": 0.0, "beta": 0.4}}, extract="/value"),
 rec("log_energy.arcsine", "log_energy", M["log_energy.arcsine"], 1e-4,
     der("double integral in angle variables", "measure_oracle.py"), {"op": "log_energy_arcsine", "args": {}}, extract="/value"),
 rec("chi_proj_pair.free_half", "chi_proj_pair", 0.0, 1e-3, pub("free pairs have zero entropy"),
     config={"command": "entropy", "parameters": {"state": free_half}}, extract="/report/chi"),
 rec("chi_proj_pair.incompatible", "chi_proj_pair", "-inf", 0.0,
     pub("a11 > 0 and a00 > 0 together give minus infinity"),
     config={"command": "entropy", "parameters": {"state": bad_state}}, extract="/report/chi"),
 rec("change_of_variable_delta.identity", "change_of_variable_delta", 0.0, 1e-12, triv("log 1 = 0"),
     {"op": "change_of_variable_delta", "args": {"alpha": 0.5, "beta": 0.5, "psi": "identity"}}, extract="/value"),
],
"free_moments": [
 rec("free_mixed_moment.r1r2r1r2_half", "free_mixed_moment", F["free_mixed_moment.r1r2r1r2_half"], 1e-6,
     der("non-crossing partition expansion in exact rationals", "free_moment_oracle.py"),
     {"op": "free_mixed_moment", "args": {"alphas": [0.5, 0.5], "word": "r1r2r1r2"}}, extract="/value"),
 rec("free_mixed_moment.r1r2r1r2_generic", "free_mixed_moment", F["free_mixed_moment.r1r2r1r2_generic"], 1e-12,
     der("non-crossing partition expansion in exact rationals", "free_moment_oracle.py"),
     {"op": "free_mixed_moment", "args": {"alphas": [0.3, 0.6], "word": "r1r2r1r2"}}, extract="/value"),
 rec("free_mixed_moment.three_blocks", "free_mixed_moment", F["free_mixed_moment.three_blocks"], 1e-12,
     der("non-crossing partition expansion in exact rationals", "free_moment_oracle.py"),
     {"op": "free_mixed_moment", "args": {"alphas": [0.5, 1 / 3, 0.25], "word": "r1r2r3r1r2r3"}}, extract="/value"),
 rec("free_mixed_moment.two_letters", "free_mixed_moment", 0.18, 1e-15, triv("freeness factorises two letters"),
     {"op": "free_mixed_moment", "args": {"alphas": [0.3, 0.6], "word": "r1r2"}}, extract="/value"),
 rec("asymptotic_freeness_report.length_one", "asymptotic_freeness_report", 0.0, 1e-12,
     triv("length-one words are rank-determined"),
     config={"command": "freeness", "seed": 12, "parameters": {"blocks": [{"type": "single", "alpha": 0.5},
             {"type": "single", "alpha": 0.5}], "words": ["r1"], "N_list": [8, 16], "samples": 5}},
     extract="/rows/1/mean_abs_error"),
 rec("additivity_gap.self_consistent", "additivity_gap", 0.0, 1e-10, triv("free moments against themselves"),
     {"op": "additivity_self", "args": {"alphas": [0.3, 0.6, 0.5]}}, extract="/score"),
],
"transport": [
 rec("wasserstein2.uniform_atom", "wasserstein2_interval", M["wasserstein2.uniform_atom"], 1e-12,
     der("quadrature of (t - 1/2)^2", "measure_oracle.py"), {"op": "w2_uniform_atom", "args": {"atom": 0.5}}, extract="/value"),
 rec("surrogate_tci_check.free_lhs", "surrogate_tci_check", 0.0, 1e-5, triv("the free state is its own reference"),
     config={"command": "tci", "parameters": {"state": dict(free_half, n_nodes=1000)}}, extract="/reports/0/lhs"),
 rec("surrogate_tci_check.infinite_rhs", "surrogate_tci_check", "inf", 0.0, triv("chi = -inf gives rhs = inf"),
     config={"command": "tci", "parameters": {"state": bad_state}}, extract="/reports/0/rhs"),
 rec("hessian_bound_check.constant", "hessian_bound_check", 0.0, 0.0, triv("constant psi has zero second derivative"),
     config={"command": "hessian", "seed": 13, "parameters": {"N": 6, "k": 2, "l": 3, "psi": "const:0.3", "trials": 3}},
     extract="/worst_ratio"),
],
"pressure": [
 rec("pressure_single.third", "pressure_single", 1.0, 1e-12, triv("-alpha h1 - (1 - alpha) h2"),
     {"op": "pressure_single", "args": {"alpha": 1 / 3, "h1": 3.0, "h2": -3.0}}, extract="/value"),
 rec("equilibrium_pressure.zero", "equilibrium_pressure", 0.0, 1e-6,
     triv("a zero Hamiltonian makes the matrix integral equal to one"),
     config={"command": "equilibrium", "parameters": {"alpha": 0.5, "beta": 0.5, "grid_size": 1000}}, extract="/value"),
 rec("equilibrium_pressure.constant", "equilibrium_pressure", -0.3, 1e-6,
     triv("a constant field shifts the value by its total weight, here 1"),
     config={"command": "equilibrium", "parameters": {"alpha": 0.5, "beta": 0.5, "psi": "const:0.3", "grid_size": 1000}},
     extract="/value"),
 rec("mc_pressure.zero", "mc_pressure", 0.0, 0.0, triv("deterministic integrand"),
     config={"command": "pressure", "seed": 14, "parameters": {"N": 16, "k": 8, "l": 8}}, extract="/estimate"),
 rec("mc_pressure.zero_std_error", "mc_pressure", 0.0, 0.0, triv("deterministic integrand"),
     config={"command": "pressure", "seed": 14, "parameters": {"N": 16, "k": 8, "l": 8}}, extract="/std_error"),
 rec("mc_pressure.single_projection", "mc_pressure", -0.25, 1e-15,
     pub("with B = 0 and psi = 0 the integrand is constant on the Grassmannian"),
     config={"command": "pressure", "seed": 15, "parameters": {"N": 16, "k": 4, "l": 8, "A": 1.0}}, extract="/estimate"),
 rec("mc_pressure.identity_n12", "mc_pressure", P["mc_pressure.identity_n12"], 1.5e-3,
     der("Hankel determinant formula for the exact finite-N integral; tolerance is about 4 standard errors",
         "pressure_oracle.py"),
     config={"command": "pressure", "seed": 16, "parameters": {"N": 12, "k": 6, "l": 6, "psi": "identity",
             "samples": 2000}}, extract="/estimate"),
 rec("mc_pressure.identity_n8_k3_l5", "mc_pressure", P["mc_pressure.identity_n8_k3_l5"], 1.5e-3,
     der("Hankel determinant formula for the exact finite-N integral; tolerance is about 4 standard errors",
         "pressure_oracle.py"),
     config={"command": "pressure", "seed": 17, "parameters": {"N": 8, "k": 3, "l": 5, "psi": "identity",
             "samples": 2000}}, extract="/estimate"),
 rec("eta_pair_bound.zero_family", "eta_pair_bound", 0.0, 1e-6, triv("tau(0) + pi(0) = 0"),
     {"op": "eta_zero_family", "args": {"alpha": 0.5, "beta": 0.5}}, extract="/value"),
],
}
for name, recs in files.items():
    with open(f"{D}/v1/{name}.json", "w") as fh:
        json.dump(recs, fh, indent=1, sort_keys=True)
        fh.write("\n")
print(sum(map(len, files.values())), "records")
