# ssr_cli.py
from __future__ import annotations
import argparse, logging, os, sys
from pathlib import Path
from typing import List, Optional

import pandas as pd

from ssr_core import asymptotics, formation, locc, schmidt, teleport
from ssr_core.config_util import load_config, resolve_config_path, use_config
from ssr_core.data_io import (povm_to_dict, read_alpha, read_density, read_json, read_povm,
                              read_state, resolve_input, weighted_states_from_dict,
                              weighted_states_to_dict, write_document)
from ssr_core.errors import DomainError, SsrError
from ssr_core.exports import frame_records, frame_to_csv, to_json_text
from ssr_core.selftest import run_selftest

logger = logging.getLogger("ssr_cli")

# ================== OUTPUT ==================
def _emit_json(payload: dict) -> None:
    sys.stdout.write(to_json_text(payload) + "\n")


def _emit_csv(df: pd.DataFrame) -> None:
    sys.stdout.write(frame_to_csv(df))


def _int_list(text: str) -> List[int]:
    """'1..64' (inklusif) atau '4,8,16'."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a..b' or a comma list of integers, got {text!r}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list of numbers, got {text!r}")


# ================== COMMANDS ==================
def cmd_measures(args) -> int:
    state = read_state(resolve_input(args.state))
    blocks = schmidt.schmidt_block_decompose(state)
    pair = schmidt.resource_pair(blocks)
    _emit_json({
        "eoe": pair.eoe,
        "siv": pair.siv,
        "siv_bob": schmidt.siv(state, party="bob"),
        "mean_local_number": pair.mean_local_number,
        "p_n": schmidt.local_number_distribution(blocks),
        "schmidt": {str(n): blocks.values(n) for n in blocks.sectors()},
    })
    return 0


def cmd_convert_check(args) -> int:
    source = read_state(resolve_input(args.source))
    targets = weighted_states_from_dict(read_json(resolve_input(args.targets)), "targets")
    df = locc.sector_slack(source, targets)
    _emit_json({"convertible": bool(df["majorized"].all()), "sectors": frame_records(df)})
    return 0


def cmd_protocol(args) -> int:
    source = read_state(resolve_input(args.source))
    target = read_state(resolve_input(args.target))
    proto = locc.build_protocol(source, target)
    report = locc.verify_protocol(source, proto, [target])
    out = None
    if args.out:
        out = str(write_document(povm_to_dict(proto.povm), args.out))
    _emit_json({
        "elements": len(proto),
        "completeness_residual": proto.povm.completeness_residual(),
        "outcomes": frame_records(report),
        "povm": out,
    })
    return 0


def cmd_povm_monotone(args) -> int:
    if args.state or args.povm:
        if not (args.state and args.povm):
            raise DomainError("--state and --povm must be given together")
        chk = locc.siv_monotone_check(read_state(resolve_input(args.state)), read_povm(resolve_input(args.povm)))
        _emit_json({"lhs": chk.lhs, "rhs": chk.rhs, "ok": chk.ok})
        return 0
    df = locc.siv_monotone_harness(args.trials, seed=args.seed, max_dim=args.max_dim)
    _emit_json({"trials": len(df), "all_ok": bool(df["ok"].all()), "min_slack": float(df["slack"].min())})
    return 0


def cmd_hiding(args) -> int:
    a = read_state(resolve_input(args.a))
    b = read_state(resolve_input(args.b))
    ref = read_state(resolve_input(args.reference)) if args.reference else None
    dist = locc.data_hiding_distance(a, b, trials=args.trials, seed=args.seed,
                                     ssr=not args.unrestricted, reference=ref)
    _emit_json({"distance": dist, "ssr": not args.unrestricted, "reference": bool(ref)})
    return 0


def cmd_distill(args) -> int:
    spec = asymptotics.n_copy_spectrum(args.p0, args.copies)
    if args.csv:
        _emit_csv(asymptotics.spectrum_frame(spec))
        return 0
    res = asymptotics.distill_rate(spec, args.delta)
    rem = asymptotics.remainder_entropy(spec, args.delta)
    _emit_json({
        "rate": res.ebits_per_copy,
        "ebits": res.ebits,
        "entropy": schmidt.binary_entropy(args.p0),
        "residual_siv": res.residual_siv,
        "loss": res.truncation_loss,
        "convertible": res.convertible,
        "remainder_eoe": rem.eoe,
        "remainder_bound": rem.bound,
    })
    return 0


def cmd_dilute(args) -> int:
    spec = asymptotics.n_copy_spectrum(args.p0, args.copies)
    ok = asymptotics.dilute_check(spec, args.delta, args.pad_bits, args.count_rule)
    _emit_json({"convertible": ok, "pad_bits": args.pad_bits, "count_rule": args.count_rule})
    return 0


def cmd_gaussian(args) -> int:
    spec = asymptotics.n_copy_spectrum(args.p0, args.copies)
    if args.csv:
        _emit_csv(asymptotics.spectrum_frame(spec))
        return 0
    fit = asymptotics.gaussian_fit(spec)
    _emit_json({
        "mean": fit.mean,
        "variance": fit.variance,
        "expected_mean": args.copies * args.p0,
        "expected_variance": args.copies * args.p0 * (1 - args.p0),
        "max_abs_dev": fit.max_abs_dev,
    })
    return 0


def cmd_teleport(args) -> int:
    if args.alpha:
        alpha = read_alpha(resolve_input(args.alpha))
        if alpha.size != args.n + 1:
            raise DomainError(f"--alpha has {alpha.size} amplitudes, expected N+1={args.n + 1}")
    else:
        alpha = teleport.random_alpha(args.n, args.seed)
    inst = teleport.input_from_alpha(alpha, args.m)
    outs = teleport.run_teleport(inst)
    payload = {
        "success_prob_exact": teleport.exact_success(outs),
        "success_prob_formula": teleport.success_probability(args.n, args.m),
        "outcomes": [o.to_dict() for o in outs],
    }
    if args.shots:
        payload["samples"] = frame_records(teleport.sample_teleport(inst, args.shots, seed=args.seed, outcomes=outs))
    _emit_json(payload)
    return 0


def cmd_teleport_scaling(args) -> int:
    frames = [teleport.scaling_table(args.n, t) for t in args.targets]
    _emit_csv(pd.concat(frames, ignore_index=True))
    return 0


def cmd_formation(args) -> int:
    rho = read_density(resolve_input(args.rho))
    res = formation.formation_measure(rho, args.measure, k=args.k, restarts=args.restarts, seed=args.seed,
                                      max_iters=args.max_iters, respect_ssr=not args.unrestricted)
    out = None
    if args.ensemble_out and res.best_ensemble is not None:
        doc = weighted_states_to_dict(res.best_ensemble.to_items(), "members")
        out = str(write_document(doc, args.ensemble_out))
    payload = res.to_dict()
    payload["ensemble"] = out
    if res.best_ensemble is not None:
        payload["reconstruction_distance"] = res.best_ensemble.trace_distance(rho)
    _emit_json(payload)
    return 0


def cmd_projection_bound(args) -> int:
    _emit_csv(formation.projection_bound_table(args.copies, seed=args.seed))
    return 0


def cmd_selftest(args) -> int:
    df = run_selftest(quick=args.quick, seed=args.seed)
    passed = bool(df["passed"].all())
    _emit_json({"passed": passed, "checks": frame_records(df)})
    return 0 if passed else 1


# ================== PARSER ==================
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ssr_cli.py",
                                description="Superselection-rule entanglement toolkit.")
    p.add_argument("--config", help="config JSON (default: SSR_CONFIG, data/config.json, user dir)")
    p.add_argument("--verbose", "-v", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    s = sub.add_parser("measures", help="EoE, SiV and p_n of a pure state")
    s.add_argument("--state", required=True)
    s.set_defaults(func=cmd_measures)

    s = sub.add_parser("convert-check", help="sector-wise majorization verdict")
    s.add_argument("--source", required=True)
    s.add_argument("--targets", required=True, help="state file or {targets:[{prob, state}]}")
    s.set_defaults(func=cmd_convert_check)

    s = sub.add_parser("protocol", help="explicit conversion POVM for one target")
    s.add_argument("--source", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--out", help="write the POVM document here")
    s.set_defaults(func=cmd_protocol)

    s = sub.add_parser("povm-monotone", help="SiV monotonicity under a local POVM")
    s.add_argument("--state")
    s.add_argument("--povm")
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--max-dim", type=int, default=12)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_povm_monotone)

    s = sub.add_parser("hiding", help="largest local-observable distinction of two states")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--reference", help="shared reference state appended to both")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--unrestricted", action="store_true", help="drop the sector restriction")
    s.set_defaults(func=cmd_hiding)

    s = sub.add_parser("distill", help="typical-set distillation rate",
                       description="With --csv emits columns n,c_n,log2_count.")
    s.add_argument("--p0", type=float, required=True)
    s.add_argument("--copies", type=int, required=True)
    s.add_argument("--delta", type=float, default=3.0)
    s.add_argument("--csv", action="store_true")
    s.set_defaults(func=cmd_distill)

    s = sub.add_parser("dilute", help="dilution convertibility check")
    s.add_argument("--p0", type=float, required=True)
    s.add_argument("--copies", type=int, required=True)
    s.add_argument("--delta", type=float, default=3.0)
    s.add_argument("--pad-bits", type=int, default=0)
    s.add_argument("--count-rule", choices=("max", "min"), default="max")
    s.set_defaults(func=cmd_dilute)

    s = sub.add_parser("gaussian", help="moments of the N-copy sector weights",
                       description="With --csv emits columns n,c_n,log2_count.")
    s.add_argument("--p0", type=float, required=True)
    s.add_argument("--copies", type=int, required=True)
    s.add_argument("--csv", action="store_true")
    s.set_defaults(func=cmd_gaussian)

    s = sub.add_parser("teleport", help="exact teleportation outcome table")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--alpha", help="JSON list of amplitudes (reals or [re, im])")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--shots", type=int, default=0, help="Monte Carlo samples (0 = off)")
    s.set_defaults(func=cmd_teleport)

    s = sub.add_parser("teleport-scaling", help="minimal M per target success",
                       description="Emits columns n,target,m_min,success.")
    s.add_argument("--targets", type=_float_list, default=[0.5, 0.9, 0.99])
    s.add_argument("--n", type=_int_list, default=list(range(1, 65)))
    s.set_defaults(func=cmd_teleport_scaling)

    s = sub.add_parser("formation", help="SSR entanglement / variance of formation")
    s.add_argument("--rho", required=True)
    s.add_argument("--measure", choices=formation.MEASURES, default="eoe")
    s.add_argument("--k", type=int)
    s.add_argument("--restarts", type=int)
    s.add_argument("--max-iters", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--unrestricted", action="store_true", help="ignore the sector restriction (eoe only)")
    s.add_argument("--ensemble-out", help="write the certificate ensemble here")
    s.set_defaults(func=cmd_formation)

    s = sub.add_parser("projection-bound", help="EoE of sector projections of a product state",
                       description="Emits columns sector,rank,eoe,bound,per_copy.")
    s.add_argument("--copies", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_projection_bound)

    s = sub.add_parser("selftest", help="run the acceptance checks")
    s.add_argument("--quick", action="store_true")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_selftest)
    return p


def _setup_logging(verbose: bool) -> None:
    level = "DEBUG" if verbose else os.environ.get("SSR_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    _setup_logging(args.verbose)
    cfg_path = resolve_config_path(args.config)
    if args.config and cfg_path != Path(args.config):
        logger.warning("config %s not found, using defaults", args.config)
        cfg_path = None
    use_config(load_config(cfg_path))
    logger.debug("command=%s config=%s", args.command, cfg_path)
    try:
        return args.func(args)
    except SsrError as e:
        _emit_json(e.to_dict())
        return 1


if __name__ == "__main__":
    sys.exit(main())
