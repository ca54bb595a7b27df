"""``kk`` command-line front end.

Exit codes: 0 verified/feasible, 1 verification failed or infeasible,
2 input or usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import io
from .dilation import contraction_dilate, dilation_to_block, off_diagonal_check, paulsen_S, stinespring, wittstock_split
from .errors import (
    EigenError,
    InconsistencyError,
    InvarianceError,
    KreinKernelError,
    NotPSDError,
    SchwartzViolation,
)
from .fock import (
    TruncatedFock,
    ball_grid,
    holomorphic_contraction_dilate,
    holomorphic_linearize,
    szego_truncation_check,
)
from .hankel import enumerate_words, gns_build, hamburger_feasible, hankel_kernel, moment_recover, uniqueness_certificate
from .kernel import gram_operator, require_positive, schwartz_check, schwartz_minimal, uniqueness_gap
from .kolmogorov import KD_TOL, decompose, verify
from .specalg import eig_hermitian

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

# failures of the mathematics rather than of the input
MATH_ERRORS = (NotPSDError, SchwartzViolation, InconsistencyError, EigenError, InvarianceError)


class UsageError(KreinKernelError):
    pass


def _num(x: float) -> Any:
    """JSON-safe float: non-finite values become strings."""
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")


@dataclass
class RunReport:
    command: str
    inputs_digest: str = ""
    verdicts: dict[str, bool] = field(default_factory=dict)
    residuals: dict[str, dict] = field(default_factory=dict)
    certificates: dict[str, Any] = field(default_factory=dict)
    wall_time: float = 0.0
    error: str | None = None

    def verdict(self, name: str, ok) -> bool:
        self.verdicts[name] = bool(ok)
        return bool(ok)

    def residual(self, name: str, value: float, tol: float, ok: bool | None = None) -> bool:
        ok = value <= tol if ok is None else ok
        self.residuals[name] = {"value": _num(value), "tol": _num(tol), "ok": bool(ok)}
        return bool(ok)

    @property
    def passed(self) -> bool:
        return self.error is None and all(self.verdicts.values()) and all(r["ok"] for r in self.residuals.values())

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "verdicts": dict(sorted(self.verdicts.items())),
            "residuals": dict(sorted(self.residuals.items())),
            "certificates": self.certificates,
            "error": self.error,
            "wall_time": round(self.wall_time, 6),
        }

    def render(self) -> str:
        lines = [f"command: {self.command}"]
        if self.inputs_digest:
            lines.append(f"inputs sha256: {self.inputs_digest}")
        for k, v in sorted(self.verdicts.items()):
            lines.append(f"  [{'ok' if v else 'FAIL'}] {k}")
        for k, r in sorted(self.residuals.items()):
            lines.append(f"  [{'ok' if r['ok'] else 'FAIL'}] {k} = {r['value']} (tol {r['tol']})")
        for k, v in self.certificates.items():
            lines.append(f"  {k}: {v}")
        if self.error:
            lines.append(f"error: {self.error}")
        lines.append(f"wall time: {self.wall_time:.3f}s")
        return "\n".join(lines)


def _eigs(a: np.ndarray) -> list:
    return [_num(x) for x in eig_hermitian(a).eigenvalues] if a.size else []


def _input(args, report: RunReport, *extra: str | None):
    if not args.input:
        raise UsageError("--input is required")
    paths = [args.input] + [p for p in extra if p]
    try:
        report.inputs_digest = io.digest(*paths)
    except OSError as exc:
        raise UsageError(f"cannot read input: {exc}") from exc
    return io.load(args.input)


def _load_hermitian(args, report, *extra):
    k = io.kernel_from_json(_input(args, report, *extra))
    k.require_hermitian()
    return k


def _write(args, obj) -> None:
    if args.out:
        io.save(obj, args.out)


def cmd_decompose(args, report: RunReport) -> None:
    k = _load_hermitian(args, report)
    tol = KD_TOL if args.tol is None else args.tol
    d = decompose(k, args.rank_tol)
    v = verify(d, k, tol)
    report.residual("reconstruction", v.max_residual, tol)
    report.verdict("minimal", v.minimal)
    report.certificates["signature"] = list(d.signature())
    report.certificates["gram_eigenvalues"] = _eigs(k.gram_matrix())
    _write(args, io.decomposition_to_json(d))


def cmd_verify(args, report: RunReport) -> None:
    if not args.decomposition:
        raise UsageError("--decomposition is required")
    k = _load_hermitian(args, report, args.decomposition)
    d = io.decomposition_from_json(io.load(args.decomposition), k.labels)
    if d.h != k.h:
        raise UsageError(f"decomposition has h={d.h}, kernel has h={k.h}")
    tol = KD_TOL if args.tol is None else args.tol
    v = verify(d, k, tol)
    report.residual("reconstruction", v.max_residual, tol)
    report.certificates["minimal"] = bool(v.minimal)
    report.certificates["signature"] = list(d.signature())


def cmd_schwartz(args, report: RunReport) -> None:
    k = _load_hermitian(args, report, args.witness)
    if args.witness:
        l = io.kernel_from_json(io.load(args.witness))
        l.require_hermitian()
        require_positive(l)
        rep = schwartz_check(k, l, args.tol)
        report.certificates["min_eig_L_minus_K"] = _num(rep.min_eig_upper)
        report.certificates["min_eig_L_plus_K"] = _num(rep.min_eig_lower)
        if not report.verdict("schwartz", rep.verdict):
            return
    else:
        l = schwartz_minimal(k)
        report.verdict("schwartz", True)
        report.certificates["witness"] = "minimal |G_K|"
    w = gram_operator(k, l, args.rank_tol, check=False)
    report.residual("norm_A_L_minus_1", w.norm() - 1.0, 1e-10)
    report.certificates["rank_L"] = w.r
    if args.gap or not args.witness:
        g = uniqueness_gap(k, l)
        report.certificates["epsilon"] = _num(g.epsilon)
        report.certificates["epsilon_side"] = g.side
        report.certificates["A_L_eigenvalues"] = _eigs(w.A)


def cmd_moments(args, report: RunReport) -> None:
    sigma = io.moments_from_json(_input(args, report))
    report.certificates["N"], report.certificates["d"] = sigma.N, sigma.d
    if args.sub == "check":
        f = hamburger_feasible(sigma)
        report.verdict("feasible", f.feasible)
        report.certificates["truncated"] = f.truncated
        report.certificates["hankel_eigenvalues"] = _eigs(hankel_kernel(sigma).gram_matrix())
        report.certificates["min_eig_L_pm_K"] = _num(min(f.certificate.min_eig_upper, f.certificate.min_eig_lower))
    elif args.sub == "gns":
        tol = 1e-8 if args.tol is None else args.tol
        g = gns_build(sigma, args.rank_tol)
        worst = 0.0
        for w in enumerate_words(sigma.N, sigma.d):
            worst = max(worst, abs(moment_recover(g, w) - sigma[w]))
        scale = max(1.0, max((abs(v) for v in sigma.values.values()), default=0.0))
        report.residual("moment_recovery", worst, tol * scale)
        report.residual("shift", g.shift_residual(), KD_TOL * scale)
        report.residual("J_selfadjoint", g.adjoint_residual(), KD_TOL * scale)
        report.certificates["k"] = g.k
        report.certificates["signature"] = list(g.decomposition.signature())
        _write(args, io.gns_to_json(g))
    else:
        gap = uniqueness_certificate(sigma, rank_tol=args.rank_tol)
        report.verdict("epsilon_positive", gap.epsilon > 0)
        report.certificates["epsilon"] = _num(gap.epsilon)
        report.certificates["epsilon_side"] = gap.side


def cmd_map(args, report: RunReport) -> None:
    t = io.map_from_json(_input(args, report))
    t.require_hermitian()
    tol = 1e-10 if args.tol is None else args.tol
    scale = max(1.0, float(np.abs(t.choi).max(initial=0.0)))
    if args.sub == "stinespring":
        dil = stinespring(t, args.rank_tol)
        report.residual("reconstruction", dil.reconstruction_residual(t), tol * scale)
        report.certificates["signature"] = list(dil.signature())
        report.certificates["k"] = dil.k
        report.certificates["choi_eigenvalues"] = _eigs(t.choi)
        _write(args, {"n": dil.n, "h": dil.h, "J": [int(s) for s in dil.J], "B": io.encode_complex(dil.B)})
    elif args.sub == "split":
        tp, tm = wittstock_split(t)
        report.residual("split", float(np.abs(tp.choi - tm.choi - t.choi).max(initial=0.0)), tol * scale)
        report.verdict("parts_completely_positive", tp.is_completely_positive() and tm.is_completely_positive())
        report.certificates["rank_plus"] = int(np.linalg.matrix_rank(tp.choi, tol=1e-9 * scale))
        report.certificates["rank_minus"] = int(np.linalg.matrix_rank(tm.choi, tol=1e-9 * scale))
        _write(args, {"plus": io.map_to_json(tp), "minus": io.map_to_json(tm)})
    else:
        s = paulsen_S(t)
        lo = min(_min_eig(s.choi + t.choi), _min_eig(s.choi - t.choi))
        report.residual("min_eig_S_pm_T", -lo, tol * scale)
        rep = off_diagonal_check(t, s, s, tol * scale)
        report.verdict("off_diagonal", rep.verdict)
        report.certificates["off_diagonal_min_eigenvalue"] = _num(rep.min_eigenvalue)
        _write(args, io.map_to_json(s))


def _min_eig(a: np.ndarray) -> float:
    return float(eig_hermitian((a + a.conj().T) / 2).eigenvalues[-1]) if a.size else 0.0


def cmd_dilate(args, report: RunReport) -> None:
    k = io.kernel_from_json(_input(args, report))
    tol = KD_TOL if args.tol is None else args.tol
    d = contraction_dilate(k, args.rank_tol)
    scale = max(1.0, float(np.abs(k.blocks).max(initial=0.0)))
    report.residual("norm_U_minus_1", d.norm() - 1.0, 1e-10)
    report.residual("reconstruction", d.residual(k), tol * scale)
    _, _, blk = dilation_to_block(d, tol)
    report.verdict("block_kernel_psd", blk.verdict)
    report.certificates["block_min_eigenvalue"] = _num(blk.min_eigenvalue)
    report.certificates["k"] = d.k
    report.certificates["hermitian_input"] = bool(k.is_hermitian())
    _write(args, {"k": d.k, "U": io.encode_complex(d.U), "V": {x: io.encode_complex(d.V[i]) for i, x in enumerate(d.labels)}})


def _point(text: str | None, name: str) -> np.ndarray:
    if text is None:
        raise UsageError(f"--{name} is required")
    try:
        return np.array([complex(p.replace(" ", "")) for p in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"--{name}: cannot parse {text!r} as a comma-separated complex vector") from exc


def cmd_fock(args, report: RunReport) -> None:
    if args.sub == "szego":
        xi, eta = _point(args.xi, "xi"), _point(args.eta, "eta")
        if xi.shape != eta.shape:
            raise UsageError("--xi and --eta have different dimensions")
        m = 10 if args.M is None else args.M
        r = szego_truncation_check(TruncatedFock(len(xi), m), xi, eta)
        report.residual("truncation_error", r.error, r.error_bound, r.within_bound)
        report.certificates["value"] = io.encode_complex(r.value)
        report.certificates["exact"] = io.encode_complex(r.exact)
        report.certificates["M"] = m
        return
    k = io.polynomial_from_json(_input(args, report))
    tol = 1e-8 if args.tol is None else args.tol
    grid = ball_grid(k.d, args.radius)
    if args.sub == "linearize":
        d = holomorphic_linearize(k, args.M)
        worst = max(abs(d.kernel(x, y) - k(x, y)) for x in grid for y in grid)
        report.residual("sampled_reconstruction", worst, tol)
        report.certificates["J"] = [int(s) for s in d.J]
        report.certificates["k"] = d.k
        _write(args, {"k": d.k, "J": [int(s) for s in d.J], "coeffs": {
            ",".join(map(str, a)): io.encode_complex(d.coeffs[:, i]) for i, a in enumerate(d.fock.basis)}})
    else:
        d = holomorphic_contraction_dilate(k, args.M)
        worst = max(abs(d.kernel(x, y) - k(x, y)) for x in grid for y in grid)
        report.residual("norm_U_minus_1", d.norm() - 1.0, 1e-10)
        report.residual("sampled_reconstruction", worst, tol)
        report.certificates["k"] = d.k
        _write(args, {"k": d.k, "U": io.encode_complex(d.U), "coeffs": {
            ",".join(map(str, a)): io.encode_complex(d.coeffs[:, i]) for i, a in enumerate(d.fock.basis)}})


COMMANDS: dict[str, Callable] = {
    "decompose": cmd_decompose,
    "verify": cmd_verify,
    "schwartz": cmd_schwartz,
    "moments": cmd_moments,
    "map": cmd_map,
    "dilate": cmd_dilate,
    "fock": cmd_fock,
}

SUBCOMMANDS = {
    "moments": ("check", "gns", "unique"),
    "map": ("stinespring", "split", "paulsen"),
    "fock": ("szego", "linearize", "dilate"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="input JSON file")
    common.add_argument("--out", help="write the constructed object here as JSON")
    common.add_argument("--tol", type=float, help="verification tolerance")
    common.add_argument("--rank-tol", type=float, help="eigenvalue cutoff for rank decisions")
    common.add_argument("--json", action="store_true", help="machine-readable report on stdout")

    parser = argparse.ArgumentParser(prog="kk", description="Indefinite kernel decompositions and dilations.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name in SUBCOMMANDS:
            p.add_argument("sub", choices=SUBCOMMANDS[name])
        if name == "verify":
            p.add_argument("--decomposition", help="decomposition JSON to check against --input")
        if name == "schwartz":
            p.add_argument("--witness", help="kernel JSON for L")
            p.add_argument("--gap", action="store_true", help="report the uniqueness gap epsilon")
        if name == "fock":
            p.add_argument("--M", type=int, help="truncation degree")
            p.add_argument("--xi")
            p.add_argument("--eta")
            p.add_argument("--radius", type=float, default=0.4, help="sampling radius for reconstruction checks")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    label = args.command + (f" {args.sub}" if getattr(args, "sub", None) else "")
    report = RunReport(label)
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        COMMANDS[args.command](args, report)
        code = EXIT_OK if report.passed else EXIT_FAIL
    except MATH_ERRORS as exc:
        report.error = f"{type(exc).__name__}: {exc}"
        code = EXIT_FAIL
    except (KreinKernelError, OSError) as exc:
        # DomainError, ValidationError, shape and hermitian-symmetry problems
        report.error = f"{type(exc).__name__}: {exc}"
        code = EXIT_INPUT
    report.wall_time = time.perf_counter() - t0
    if args.json:
        print(io.dumps(report.to_dict()))
    else:
        print(report.render(), file=sys.stdout if code == EXIT_OK else sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
