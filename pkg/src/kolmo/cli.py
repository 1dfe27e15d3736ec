"""Command-line front end: ``kolmo <group> <command> [options]``.

Exit codes: 0 success, 1 invalid input (JSON error object on stderr),
2 numerical failure (a defect above its threshold), 64 usage error.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import formats as fm
from . import numlin
from .dilation import (
    build_dilated_rep,
    dilated_wavelets,
    multiresolution_check,
    ntf_consistency_defect,
    operator_defects,
    orthonormality_check,
    projection_checks,
    refinement_defect,
)
from .errors import KolmoError, NumericalError, ValidationError
from .filters import (
    FilterBank,
    Grid,
    LaurentPoly,
    STRETCHED_HAAR,
    SampledFunction,
    bundled_bank,
    cascade,
    default_frequency_grid,
    find_cycles,
    harmonic_fixed_points,
    highpass_complete,
    lowpass_check,
    nonsingular_check,
    qmf_check,
    transfer_matrix,
    unitarity_defect,
    wavelet_from_filters,
    wavelet_time,
)
from .frames import (
    dilate_gabor_ntf,
    dilate_group_ntf,
    dilate_ntf,
    dilation_defects,
    frame_bounds,
    gabor_dilation_defects,
    group_dilation_defects,
    idempotency_defect,
    is_ntf_kernel,
)
from .kernel import (
    bound_constant,
    dominance_constant,
    intertwiner,
    is_positive_definite,
    kolmogorov_decompose,
)
from .structured_reps import (
    GroupRep,
    gabor_from_kernel,
    gns_construct,
    group_representation,
    kernel_from_gabor,
    root_order,
)

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2, 64

# thresholds for the dilation report
THRESHOLDS = {
    "refinement_defect": 1e-4,
    "orthonormality_defect": 1e-6,
    "onb_defect": 1e-4,
    "unitarity_defect": 1e-6,
    "covariance_defect": 1e-6,
    "p1_commutation_defect": 1e-6,
    "p1_phi_defect": 1e-6,
    "p1_psi_defect": 1e-6,
    "parseval_defect": 0.02,
    "ntf_consistency_defect": 0.05,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class Config:
    tol: Optional[float]
    grid: Grid
    p_max: int
    terms: int
    window_m: int
    window_n: int
    out: Optional[str]

    def __post_init__(self):
        if self.tol is not None and not self.tol > 0:
            raise UsageError("--tol must be positive")
        c = self.grid.count
        if c < 2 or c & (c - 1):
            raise UsageError("--grid-count must be a power of two")
        if self.p_max < 1 or self.terms < 1 or self.window_m < 0 or self.window_n < 0:
            raise UsageError("--pmax, --terms must be >= 1 and windows >= 0")

    def tol_or(self, default):
        return default if self.tol is None else self.tol


def _config(args) -> Config:
    return Config(args.tol, Grid(args.grid_start, args.grid_step, args.grid_count),
                  args.pmax, args.terms, args.window_m, args.window_n, args.out)


# ------------------------------------------------------------------ I/O

def _load(args):
    if not args.inp:
        raise UsageError("this command needs --in FILE")
    try:
        with open(args.inp, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError("cannot read %s: %s" % (args.inp, exc.strerror))
    except json.JSONDecodeError as exc:
        raise ValidationError("invalid JSON in %s: %s" % (args.inp, exc.msg))


def _emit(cfg: Config, payload):
    text = fm.dumps(payload) + "\n"
    if cfg.out and not os.path.isdir(cfg.out):
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _out_dir(cfg: Config):
    d = cfg.out or "."
    os.makedirs(d, exist_ok=True)
    return d


def _write(directory, name, text):
    path = os.path.join(directory, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _field(data, key):
    if not isinstance(data, dict) or key not in data:
        raise ValidationError("missing field %r" % key)
    return data[key]


def _filter(data):
    if isinstance(data, dict) and "name" in data:
        bank = bundled_bank(str(data["name"]))
        return bank.N, bank.lowpass, bank
    return fm.filter_from_json(data)


def _bank(N, m0, bank):
    if bank is not None:
        return bank
    if N != 2:
        raise ValidationError("only scale-2 banks can be completed automatically")
    return highpass_complete(m0)


# ------------------------------------------------------------- commands

def cmd_kernel_decompose(args, cfg):
    k = fm.kernel_from_json(_load(args))
    d = kolmogorov_decompose(k, cfg.tol_or(1e-10))
    _emit(cfg, {"points": list(d.points), "rank": d.rank, "vectors": fm.cmat_to_json(d.vectors)})


def cmd_kernel_check(args, cfg):
    k = fm.kernel_from_json(_load(args))
    w, _ = numlin.hermitian_eigen(k.gram) if len(k) else (np.zeros(0), None)
    _emit(cfg, {"hermitian": True,
                "positive_definite": is_positive_definite(k, cfg.tol_or(1e-10)),
                "min_eigenvalue": float(w[-1]) if w.size else 0.0,
                "max_eigenvalue": float(w[0]) if w.size else 0.0})


def cmd_kernel_dominate(args, cfg):
    data = _load(args)
    k = fm.kernel_from_json(_field(data, "k"))
    kp = fm.kernel_from_json(_field(data, "kprime"))
    c = dominance_constant(kp, k, cfg.tol_or(1e-10))
    _emit(cfg, {"dominated": c is not None, "dominance_constant": c})


def cmd_kernel_intertwine(args, cfg):
    data = _load(args)
    l = fm.bikernel_from_json(_field(data, "l"))
    k = fm.kernel_from_json(_field(data, "k"))
    kp = fm.kernel_from_json(_field(data, "kprime"))
    tol = cfg.tol_or(1e-10)
    c = bound_constant(l, k, kp, tol)
    s = intertwiner(l, k, kp, tol)
    _emit(cfg, {"bound_constant": c, "matrix": fm.cmat_to_json(s.matrix)})


def cmd_gns(args, cfg):
    rep = gns_construct(fm.state_from_json(_load(args)))
    _emit(cfg, {"n": rep.n, "dim": rep.dim, "xi0": fm.cvec_to_json(rep.xi0),
                "unit_ops": {"%d,%d" % pq: fm.cmat_to_json(op)
                             for pq, op in sorted(rep.unit_ops.items())}})


def cmd_group_rep(args, cfg):
    data = _load(args)
    g = fm.group_from_json(_field(data, "group"))
    k = fm.kernel_from_json(_field(data, "kernel"))
    rep = group_representation(g, k)
    defect = rep.check()
    _emit(cfg, {"dim": rep.dim, "matrices": [fm.cmat_to_json(m) for m in rep.matrices],
                "cyclic": fm.cvec_to_json(rep.cyclic), "defect": defect})
    return _verdict({"defect": defect}, {"defect": cfg.tol_or(1e-9)})


def cmd_group_dilate(args, cfg):
    data = _load(args)
    g = fm.group_from_json(_field(data, "group"))
    mats = tuple(fm.cmat_from_json(m) for m in _field(data, "matrices"))
    eta = fm.cvec_from_json(_field(data, "eta"))
    if len(mats) != g.order:
        raise ValidationError("need one matrix per group element")
    dim = eta.shape[0]
    if any(m.shape != (dim, dim) for m in mats):
        raise ValidationError("matrices must be dim x dim with dim = len(eta)")
    rep = GroupRep(g, dim, mats, eta)
    dil = dilate_group_ntf(g, rep, eta)
    defects = group_dilation_defects(rep, eta, dil)
    _emit(cfg, {"W": fm.cmat_to_json(dil.W), "P": fm.cmat_to_json(dil.P),
                "xi": fm.cvec_to_json(dil.xi), "defects": defects})
    return _verdict(defects, {k: cfg.tol_or(1e-8) for k in defects})


def cmd_gabor_build(args, cfg):
    data = _load(args)
    lam = fm._scalar(_field(data, "lambda"))
    s = gabor_from_kernel(fm.kernel_from_json(_field(data, "kernel")), lam)
    out = fm.gabor_to_json(s)
    defects = {"commutation_defect": s.commutation_defect(),
               "unitarity_defect": s.unitarity_defect()}
    out["defects"] = defects
    _emit(cfg, out)
    return _verdict(defects, {k: cfg.tol_or(1e-9) for k in defects})


def _gabor_q(data, lam):
    q = data.get("q") if isinstance(data, dict) else None
    q = int(q) if q is not None else root_order(lam, 64)
    if q is None:
        raise ValidationError("lambda is not a root of unity of order <= 64; give \"q\"")
    return q


def cmd_gabor_kernel(args, cfg):
    data = _load(args)
    s = fm.gabor_from_json(data)
    _emit(cfg, fm.kernel_to_json(kernel_from_gabor(s, _gabor_q(data, s.lam))))


def cmd_gabor_dilate(args, cfg):
    data = _load(args)
    sysdata = _field(data, "system")
    s = fm.gabor_from_json(sysdata)
    eta = fm.cvec_from_json(_field(data, "eta"))
    dil = dilate_gabor_ntf(s, eta, _gabor_q(sysdata, s.lam))
    defects = gabor_dilation_defects(s, eta, dil)
    _emit(cfg, {"W": fm.cmat_to_json(dil.W), "P": fm.cmat_to_json(dil.P),
                "xi": fm.cvec_to_json(dil.xi), "defects": defects})
    return _verdict(defects, {k: cfg.tol_or(1e-8) for k in defects})


def cmd_frames_bounds(args, cfg):
    b = frame_bounds(fm.family_from_json(_load(args)))
    _emit(cfg, {"lower": b.lower, "upper": b.upper, "is_frame": b.is_frame})


def _kernel_or_family(data):
    if isinstance(data, dict) and "gram" in data:
        return fm.kernel_from_json(data)
    return fm.family_from_json(data).kernel()


def cmd_frames_ntf(args, cfg):
    k = _kernel_or_family(_load(args))
    tol = cfg.tol_or(1e-9)
    payload = {"ntf": is_ntf_kernel(k, tol), "idempotency_defect": idempotency_defect(k.gram)}
    if cfg.out and cfg.out.endswith(".csv"):
        # Gram table on request; the verdict still goes to stdout
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(fm.gram_csv(k))
        _emit_summary(payload)
        return
    _emit(cfg, payload)


def cmd_frames_dilate(args, cfg):
    data = _load(args)
    k = _kernel_or_family(_field(data, "k"))
    kp = _kernel_or_family(_field(data, "kprime"))
    res = dilate_ntf(k, kp)
    defects = dilation_defects(k, kp, res)
    _emit(cfg, {"W": fm.cmat_to_json(res.W), "P": fm.cmat_to_json(res.P), "defects": defects})
    return _verdict(defects, {k_: cfg.tol_or(1e-8) for k_ in defects})


def cmd_filter_qmf(args, cfg):
    N, m0, _ = _filter(_load(args))
    tol = cfg.tol_or(1e-10)
    _emit(cfg, {"qmf": qmf_check(m0, N, tol), "lowpass": lowpass_check(m0, N, tol),
                "nonsingular": nonsingular_check(m0)})


def cmd_filter_cycles(args, cfg):
    N, m0, _ = _filter(_load(args))
    _emit(cfg, fm.cycles_to_json(find_cycles(m0, N, cfg.p_max, cfg.tol_or(1e-9))))


def _transfer_pair(data):
    N, m0, _ = _filter(data)
    m0p = m0
    if isinstance(data, dict) and "prime" in data:
        m0p = fm.poly_from_json(data["prime"])
    return N, m0, m0p


def cmd_filter_transfer(args, cfg):
    N, m0, m0p = _transfer_pair(_load(args))
    t = transfer_matrix(m0, m0p, N)
    _emit(cfg, {"N": N, "d": t.d, "matrix": fm.cmat_to_json(t.matrix)})


def cmd_filter_fixedpoints(args, cfg):
    N, m0, m0p = _transfer_pair(_load(args))
    pts = harmonic_fixed_points(transfer_matrix(m0, m0p, N), cfg.tol_or(1e-9))
    _emit(cfg, {"dimension": len(pts), "fixed_points": [
        {"coeffs": fm.poly_to_json(p.poly.trim()), "real_valued": p.real_valued,
         "min_value": p.min_value, "nonnegative": p.nonnegative} for p in pts]})


def cmd_filter_complete(args, cfg):
    N, m0, _ = _filter(_load(args))
    if N != 2:
        raise ValidationError("high-pass completion is implemented for N = 2")
    bank = highpass_complete(m0)
    out = fm.bank_to_json(bank)
    out["unitarity_defect"] = unitarity_defect(bank)
    _emit(cfg, out)


def cmd_filter_cascade(args, cfg):
    N, m0, _ = _filter(_load(args))
    res = cascade(m0, N, cfg.terms, default_frequency_grid(), cfg.grid)
    d = _out_dir(cfg)
    _write(d, "phi_hat.csv", fm.sampled_to_csv(res.phi_hat))
    _write(d, "phi.csv", fm.sampled_to_csv(res.phi))
    _emit_summary({"files": ["phi_hat.csv", "phi.csv"], "phi_hat_at_zero": complex(
        res.phi_hat.values[np.argmin(np.abs(res.phi_hat.grid.points))]),
        "phi_integral": complex(np.sum(res.phi.values) * cfg.grid.step)})


def cmd_filter_wavelet(args, cfg):
    N, m0, bank = _filter(_load(args))
    bank = _bank(N, m0, bank)
    res = cascade(m0, N, cfg.terms, default_frequency_grid(), cfg.grid)
    hats = wavelet_from_filters(bank, res.phi_hat)
    times = wavelet_time(bank, res.phi)
    d = _out_dir(cfg)
    files = []
    for i in range(1, bank.N):
        files += ["psi_hat_%d.csv" % i, "psi_%d.csv" % i]
        _write(d, files[-2], fm.sampled_to_csv(hats[i]))
        _write(d, files[-1], fm.sampled_to_csv(times[i]))
    _emit_summary({"files": files, "unitarity_defect": unitarity_defect(bank)})


def _emit_summary(payload):
    sys.stdout.write(fm.dumps(payload) + "\n")


def _verdict(defects, thresholds):
    bad = {k: v for k, v in defects.items() if k in thresholds and v > thresholds[k]}
    if bad:
        raise NumericalError("defects above threshold: %s" % ", ".join(sorted(bad)))
    return EXIT_OK


def dilation_report(m0: LaurentPoly, bank: FilterBank, cfg: Config):
    """Every dilation defect for one bank, plus the objects they were computed from."""
    N = bank.N
    cycles = find_cycles(m0, N, cfg.p_max, 1e-9)
    ops, phi0 = build_dilated_rep(m0, cycles, N, cfg.grid, cfg.terms)
    psis, onb = dilated_wavelets(bank, ops, phi0)
    report = {
        "cycles": fm.cycles_to_json(cycles)["cycles"],
        "block_sizes": list(ops.sizes),
        "phi0_norm": phi0.norm(),
        "refinement_defect": refinement_defect(ops, phi0),
        "orthonormality_defect": orthonormality_check(phi0, ops, 12),
        "onb_defect": onb,
        "bank_unitarity_defect": unitarity_defect(bank),
    }
    report.update(operator_defects(ops))
    if ops.trivial_index() is not None:
        report.update(projection_checks(phi0, psis, bank, ops, cfg.window_m, cfg.window_n))
        j = ops.trivial_index()
        report["ntf_consistency_defect"] = ntf_consistency_defect(
            SampledFunction(cfg.grid, psis[0].blocks[j][0], "time"), N)
    report["multiresolution"] = multiresolution_check(m0, LaurentPoly.constant(1.0), N, 2, 2, bank)
    report["thresholds"] = {k: v for k, v in THRESHOLDS.items() if k in report}
    report["pass"] = all(report[k] <= v for k, v in report["thresholds"].items())
    return report, ops, phi0, psis


def cmd_dilate_build(args, cfg):
    N, m0, _ = _filter(_load(args))
    cycles = find_cycles(m0, N, cfg.p_max, 1e-9)
    ops, phi0 = build_dilated_rep(m0, cycles, N, cfg.grid, cfg.terms)
    d = _out_dir(cfg)
    _write(d, "phi0.csv", fm.dilated_to_csv(phi0))
    _write(d, "cycles.json", fm.dumps(fm.cycles_to_json(cycles)) + "\n")
    _emit_summary({"files": ["phi0.csv", "cycles.json"], "block_sizes": list(ops.sizes),
                      "refinement_defect": refinement_defect(ops, phi0)})


def cmd_dilate_check(args, cfg):
    N, m0, bank = _filter(_load(args))
    bank = _bank(N, m0, bank)
    report, *_ = dilation_report(m0, bank, cfg)
    d = _out_dir(cfg)
    _write(d, "report.json", fm.dumps(report) + "\n")
    _emit_summary({"report": "report.json", "pass": report["pass"]})
    if not report["pass"]:
        raise NumericalError("dilation defects above threshold")


def cmd_dilate_demo(args, cfg):
    bank = bundled_bank("stretched_haar")
    report, ops, phi0, psis = dilation_report(STRETCHED_HAAR, bank, cfg)
    j = ops.trivial_index()
    phi = SampledFunction(cfg.grid, phi0.blocks[j][0], "time")
    psi = SampledFunction(cfg.grid, psis[0].blocks[j][0], "time")
    t = cfg.grid.points
    box = np.where((t >= 0) & (t < 3), 1 / 3, 0.0)
    wave = np.where((t >= 0) & (t < 1.5), 1 / 3, 0.0) - np.where((t >= 1.5) & (t < 3), 1 / 3, 0.0)
    report["phi_norm_squared"] = phi.norm() ** 2
    report["phi_box_error"] = numlin.max_abs(phi.values - box)
    report["psi_step_error"] = numlin.max_abs(psi.values - wave)
    report["components_equal"] = max(numlin.max_abs(b - phi.values) for blk in phi0.blocks for b in blk)
    d = _out_dir(cfg)
    _write(d, "phi.csv", fm.sampled_to_csv(phi))
    _write(d, "psi.csv", fm.sampled_to_csv(psi))
    _write(d, "report.json", fm.dumps(report) + "\n")
    _emit_summary({"files": ["phi.csv", "psi.csv", "report.json"], "pass": report["pass"]})
    if not report["pass"]:
        raise NumericalError("dilation defects above threshold")


COMMANDS = {
    ("kernel", "decompose"): cmd_kernel_decompose,
    ("kernel", "check"): cmd_kernel_check,
    ("kernel", "dominate"): cmd_kernel_dominate,
    ("kernel", "intertwine"): cmd_kernel_intertwine,
    ("gns", None): cmd_gns,
    ("group", "rep"): cmd_group_rep,
    ("group", "dilate"): cmd_group_dilate,
    ("gabor", "build"): cmd_gabor_build,
    ("gabor", "kernel"): cmd_gabor_kernel,
    ("gabor", "dilate"): cmd_gabor_dilate,
    ("frames", "bounds"): cmd_frames_bounds,
    ("frames", "ntf"): cmd_frames_ntf,
    ("frames", "dilate"): cmd_frames_dilate,
    ("filter", "qmf"): cmd_filter_qmf,
    ("filter", "cycles"): cmd_filter_cycles,
    ("filter", "transfer"): cmd_filter_transfer,
    ("filter", "fixedpoints"): cmd_filter_fixedpoints,
    ("filter", "complete"): cmd_filter_complete,
    ("filter", "cascade"): cmd_filter_cascade,
    ("filter", "wavelet"): cmd_filter_wavelet,
    ("dilate", "build"): cmd_dilate_build,
    ("dilate", "check"): cmd_dilate_check,
    ("dilate", "demo-stretched-haar"): cmd_dilate_demo,
}


def _common(p):
    p.add_argument("--in", dest="inp", metavar="FILE")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--tol", type=float)
    p.add_argument("--pmax", type=int, default=6)
    p.add_argument("--grid-start", type=float, default=-16.0)
    p.add_argument("--grid-step", type=float, default=2.0 ** -8)
    p.add_argument("--grid-count", type=int, default=2 ** 14)
    p.add_argument("--terms", type=int, default=40)
    p.add_argument("--window-m", type=int, default=6)
    p.add_argument("--window-n", type=int, default=32)


def build_parser():
    parser = _Parser(prog="kolmo", description="Kernels, dilations and wavelet filters.")
    groups = parser.add_subparsers(dest="group", parser_class=_Parser)
    subs = {}
    for group, cmd in COMMANDS:
        if cmd is None:
            _common(groups.add_parser(group))
            continue
        if group not in subs:
            gp = groups.add_parser(group)
            subs[group] = gp.add_subparsers(dest="command", parser_class=_Parser)
        _common(subs[group].add_parser(cmd))
    return parser


def _error(kind, exc):
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__,
                                 "message": str(exc)}) + "\n")


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if args.group is None:
            raise UsageError("missing command group")
        key = (args.group, getattr(args, "command", None))
        if key not in COMMANDS:
            raise UsageError("missing or unknown command for %r" % args.group)
        cfg = _config(args)
        code = COMMANDS[key](args, cfg)
        return EXIT_OK if code is None else code
    except UsageError as exc:
        _error("usage", exc)
        return EXIT_USAGE
    except NumericalError as exc:
        _error("numerical", exc)
        return EXIT_NUMERICAL
    except KolmoError as exc:
        _error("validation", exc)
        return EXIT_INVALID


def main():  # pragma: no cover
    sys.exit(run())


if __name__ == "__main__":  # pragma: no cover
    main()
