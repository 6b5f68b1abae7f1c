#!/usr/bin/env python3
"""Main entry point for channel tau-function and Hurwitz computations"""

import argparse
import math
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from src.artifacts.manifest import RunManifest, write_csv, write_json, write_jsonl
from src.combinatorics.hurwitz import (
    hurwitz_closed_form_simple,
    hurwitz_table,
    table_to_records,
)
from src.config import ChannelConfig, HurwitzConfig
from src.constants import (
    BRIDGE_ORDER,
    CONTOUR_POINTS,
    DARCY_TOL,
    DEFAULT_HIROTA_ORDER,
    DEFAULT_KAPPA,
    DEFAULT_OUT_DIR,
    DEFAULT_SERIES_DEGREE,
    DEFAULT_Y0,
    EXIT_FAILURE,
    EXIT_OK,
    EXIT_VIOLATION,
    GRADIENT_TOL,
    LONG_SERIES_DEGREE,
    SHORT_MAX_STEPS,
    TODA_LAMBDAS,
    TODA_TOL,
    TROCHOID_END_FRACTION,
    TROCHOID_GRID_POINTS,
)
from src.errors import ChannelTauError, ConsistencyError, InvalidArgumentError
from src.genfun.identities import Violation, check_bridge, check_cutjoin, check_euler, check_hirota
from src.genfun.tau_series import build_F0
from src.lgsolve.channel_map import ChannelMap, moments_from_map, sample_contour
from src.lgsolve.checks import check_darcy, check_gradients, check_map_reconstruction
from src.lgsolve.solver import Trajectory, evolve, solve_cold
from src.lgsolve.tau import tau_from_map
from src.trochoid.checks import check_first_toda
from src.trochoid.solution import (
    TrochoidParams,
    contour,
    critical_time,
    lambda_of_t,
    moments as trochoid_moments,
    observables,
    time_of_lambda,
    tau,
)
from src.utils.logging import get_logger, log_timing, setup_logging

logger = get_logger("main")


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(b))


def _trochoid_oracle(config: ChannelConfig) -> Optional[TrochoidParams]:
    """Closed-form counterpart of a run whose only nonzero target is t1"""
    nonzero = {k: v for k, v in config.targets.items() if v != 0}
    if set(nonzero) != {1}:
        return None
    try:
        return TrochoidParams.from_t1(config.R, config.r0, nonzero[1])
    except InvalidArgumentError:
        return None


def _report_violations(manifest: RunManifest, out_dir: Path, name: str, violations: List[Violation]) -> int:
    report = {"identity": name, "passed": not violations, "violations": [v.to_dict() for v in violations]}
    manifest.add_output(write_json(out_dir / f"check_{name}.json", report))
    manifest.summary = {"passed": not violations, "violations": len(violations)}
    for v in violations[:10]:
        print(f"  {v.identity} {v.key}: {v.lhs} != {v.rhs}")
    print(f"{name}: {'OK' if not violations else f'{len(violations)} 件の不一致'}")
    return EXIT_OK if not violations else EXIT_VIOLATION


def cmd_hurwitz(args, out_dir: Path, manifest: RunManifest) -> int:
    hconfig = HurwitzConfig.from_args(args)
    d_max = args.d_max
    if d_max >= LONG_SERIES_DEGREE and not args.long:
        raise InvalidArgumentError(f"d_max={d_max} requires --long")
    manifest.config = {"d_max": d_max, "genus": args.genus, "budget": hconfig.budget, "method": hconfig.method}

    table = hurwitz_table(d_max, genus=args.genus, budget=hconfig.budget, method=hconfig.method)
    records = table_to_records(table)
    oracles = []
    if args.genus == 0:
        for q, v in table:
            if q.mu.is_trivial() and q.mubar.is_trivial():
                expected = hurwitz_closed_form_simple(q.d)
                oracles.append({"d": q.d, "value": str(v.value), "closed_form": str(expected), "match": v.value == expected})
    manifest.add_output(write_json(out_dir / "hurwitz_table.json", {"d_max": d_max, "genus": args.genus, "entries": records}))
    manifest.summary = {"entries": len(records), "oracles": oracles}
    print(f"Hurwitz表: {len(records)} 件 (d <= {d_max}, genus {args.genus})")
    return EXIT_OK if all(o["match"] for o in oracles) else EXIT_VIOLATION


def _check_toda(args, out_dir: Path, manifest: RunManifest) -> int:
    params = TrochoidParams(R=args.R, r0=args.r0, kappa=args.kappa, Y0=args.Y0)
    reports = [check_first_toda(params, time_of_lambda(params, lam)) for lam in TODA_LAMBDAS]
    violations = [
        Violation("toda", f"lambda={r.lam:.3f}", r.lhs, r.rhs) for r in reports if r.residual > args.tol
    ]
    manifest.config = {**params.to_dict(), "tol": args.tol}
    manifest.add_output(write_json(out_dir / "toda_reports.json", [r.to_dict() for r in reports]))
    return _report_violations(manifest, out_dir, "toda", violations)


def cmd_check(args, out_dir: Path, manifest: RunManifest) -> int:
    if args.identity == "toda":
        return _check_toda(args, out_dir, manifest)

    hconfig = HurwitzConfig.from_args(args)
    D = args.degree
    if D >= LONG_SERIES_DEGREE and not args.long:
        raise InvalidArgumentError(f"degree {D} requires --long")
    manifest.config = {"identity": args.identity, "degree": D, "budget": hconfig.budget, "method": hconfig.method}
    F0 = build_F0(D, budget=hconfig.budget, method=hconfig.method)

    if args.identity == "euler":
        violations = check_euler(F0)
    elif args.identity == "cutjoin":
        violations = check_cutjoin(F0, full=args.full)
    elif args.identity == "hirota":
        K1, K2 = args.orders
        manifest.config["orders"] = [K1, K2]
        violations = check_hirota(F0, K1, K2)
    else:
        manifest.config["order"] = args.bridge_order
        violations = check_bridge(F0, order=args.bridge_order)
    return _report_violations(manifest, out_dir, args.identity, violations)


def cmd_trochoid(args, out_dir: Path, manifest: RunManifest) -> int:
    params = TrochoidParams(R=args.R, r0=args.r0, kappa=args.kappa, Y0=args.Y0)
    tc = critical_time(params)
    t0_end = args.t0_end if args.t0_end is not None else TROCHOID_END_FRACTION * tc
    grid = np.linspace(args.t0_start, t0_end, args.points)
    manifest.config = {**params.to_dict(), "t0_start": args.t0_start, "t0_end": t0_end, "points": args.points}

    records = [observables(params, float(t0)) for t0 in grid]
    sigma = 2 * math.pi * np.arange(CONTOUR_POINTS) / CONTOUR_POINTS
    rows = []
    for t0 in grid:
        X, Y = contour(params, float(t0), sigma)
        rows.extend((float(t0), s, x, y) for s, x, y in zip(sigma, X, Y))

    manifest.add_output(write_csv(out_dir / "trochoid_contours.csv", ["t0", "sigma", "X", "Y"], rows))
    manifest.add_output(write_json(out_dir / "trochoid_observables.json", records))
    lams = [r["lambda"] for r in records]
    increasing = all(b > a for a, b in zip(lams, lams[1:]))
    manifest.summary = {"t_c": tc, "lambda_increasing": increasing}
    print(f"トロコイド: t_c = {tc:.12g}, λ = {lams[0]:.6f} → {lams[-1]:.6f}")
    return EXIT_OK if increasing else EXIT_VIOLATION


def _oracle_summary(trajectory: Trajectory, config: ChannelConfig) -> Dict[str, float]:
    """
    Deviations from closed forms: trochoid when only t1 is set, straight section when no t_k is

    The trochoid summary also carries the exact observables at the last
    step before t_c next to the measured moment deviations there.
    """
    out: Dict[str, float] = {}
    steps = trajectory.steps
    if not steps:
        return out
    if not any(config.targets.values()):
        out["F0_straight_max_rel"] = max(
            _relative(s.tau.F0, s.t0**3 / (6 * config.R) + s.t0**2 * math.log(config.r0))
            for s in steps
            if s.tau is not None
        )
        return out

    params = _trochoid_oracle(config)
    if params is None:
        return out
    tc = critical_time(params)
    out["t_c"] = tc
    valid = [s for s in steps if s.t0 < tc]
    if not valid:
        return out
    out["F0_max_rel"] = max(_relative(s.tau.F0, tau(params, s.t0)) for s in valid if s.tau is not None)
    out["contour_max_abs"] = max(_contour_deviation(s.map, params, s.t0, config.solve.M) for s in valid)
    if trajectory.cusp_time_estimate is not None:
        out["cusp_time_error"] = abs(trajectory.cusp_time_estimate - tc)

    last = valid[-1]
    exact = trochoid_moments(params, last.t0)
    closed = observables(params, last.t0)
    for key in ("t0", "lambda", "v0", "v1_re", "v1_im", "v2_re", "v2_im", "F0"):
        out[key] = closed[key]
    out["v0_abs"] = abs(last.moments.v0 - exact.v0)
    out["v1_abs"] = abs(last.moments.vk(1) - exact.vk(1))
    out["v2_abs"] = abs(last.moments.vk(2) - exact.vk(2))
    return out


def _contour_deviation(m: ChannelMap, params: TrochoidParams, t0: float, M: int) -> float:
    exact = ChannelMap.from_trochoid(params, t0, m.N)
    gauge = 1j * (m.u[0].imag - exact.u[0].imag)
    return float(np.max(np.abs(sample_contour(m, M).Z - sample_contour(exact, M).Z - gauge)))


def cmd_evolve(args, out_dir: Path, manifest: RunManifest) -> int:
    config = ChannelConfig.from_args(args)
    if args.config:
        manifest.add_input(Path(args.config))
    manifest.config = config.to_dict()
    steps = abs(config.t0_end - config.t0_start) / config.solve.dt0
    if steps > SHORT_MAX_STEPS and not args.long:
        raise InvalidArgumentError(f"{int(steps)} steps requested; more than {SHORT_MAX_STEPS} requires --long")

    trajectory = evolve(config.target_moments(), (config.t0_start, config.t0_end), config.solve, config.N)
    manifest.add_output(write_jsonl(out_dir / "trajectory.jsonl", (s.to_record() for s in trajectory.steps)))

    summary = trajectory.summary()
    summary["oracle"] = _oracle_summary(trajectory, config)
    exit_code = EXIT_OK
    if args.darcy and len(trajectory.steps) >= 3:
        darcy = check_darcy(trajectory, config.solve, t0_max=args.darcy_t0_max)
        summary["darcy"] = darcy.to_dict()
        if darcy.max_deviation > DARCY_TOL:
            exit_code = EXIT_VIOLATION
    manifest.add_output(write_json(out_dir / "evolve_summary.json", summary))
    manifest.summary = summary

    print(f"発展: {summary['steps']} ステップ, t_k ドリフト {summary['max_tk_drift']:.2e}, 特異点 {trajectory.singular}")
    if trajectory.failure and not trajectory.singular:
        logger.error(f"Evolution failed: {trajectory.failure}")
        return EXIT_FAILURE
    return exit_code


def cmd_tau(args, out_dir: Path, manifest: RunManifest) -> int:
    config = ChannelConfig.from_args(args)
    if args.config:
        manifest.add_input(Path(args.config))
    manifest.config = config.to_dict()
    targets = config.target_moments()
    m = solve_cold(targets, config.N, config.solve)
    moments = moments_from_map(m, K=2 * config.N, M=config.solve.M, selftest_tol=config.solve.selftest_tol)
    result = tau_from_map(m, M=config.solve.M, tau_tol=config.solve.tau_tol, moments=moments, strict=False)

    record = {"tau": result.to_dict(), "moments": moments.to_record(), "map": m.to_record()}
    params = _trochoid_oracle(config)
    if params is not None:
        exact = tau(params, targets.t0)
        record["oracle"] = {"F0": exact, "relative": _relative(result.F0, exact), "lambda": lambda_of_t(params, targets.t0)}
    if args.reconstruct:
        record["reconstruction"] = check_map_reconstruction(m, targets, config.solve).to_dict()
    manifest.add_output(write_json(out_dir / "tau.json", record))
    manifest.summary = {"F0": result.F0, "discrepancy": result.discrepancy}

    print(f"F0 = {result.F0:.15g} (相対差 {result.discrepancy:.2e})")
    if result.discrepancy > config.solve.tau_tol:
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_gradients(args, out_dir: Path, manifest: RunManifest) -> int:
    config = ChannelConfig.from_args(args)
    if args.config:
        manifest.add_input(Path(args.config))
    manifest.config = {**config.to_dict(), "k_max": args.k_max, "tol": args.tol}
    report = check_gradients(config.target_moments(), config.solve, config.N, k_max=args.k_max)
    manifest.add_output(write_json(out_dir / "gradients.json", report.to_dict()))
    manifest.summary = {"max_residual": report.max_residual}
    print(f"勾配チェック: 最大残差 {report.max_residual:.2e}")
    return EXIT_OK if report.max_residual <= args.tol else EXIT_VIOLATION


def _add_channel_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--R', type=float, help='チャネル幅パラメータ R')
    parser.add_argument('--r0', type=float, help='補助スケール r0')
    parser.add_argument('--N', type=int, help='写像の打ち切り次数')
    parser.add_argument('--M', type=int, help='求積点数（2の冪）')
    parser.add_argument('--dt0', type=float, help='t0 の時間刻み')
    parser.add_argument('--t0-start', dest='t0_start', type=float, help='開始時刻 t0')
    parser.add_argument('--t0-end', dest='t0_end', type=float, help='終了時刻 t0')
    parser.add_argument('--targets', type=str, help='保存モーメント "k:re:im,..."')


def _add_trochoid_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--R', type=float, default=1.0, help='チャネル幅パラメータ R（デフォルト: 1）')
    parser.add_argument('--r0', type=float, default=1.0, help='補助スケール r0（デフォルト: 1）')
    parser.add_argument('--kappa', type=float, default=DEFAULT_KAPPA, help=f'振幅 κ（デフォルト: {DEFAULT_KAPPA}）')
    parser.add_argument('--Y0', type=float, default=DEFAULT_Y0, help='横方向オフセット Y0')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='チャネル内ラプラシアン成長のタウ関数と二重Hurwitz数の計算'
    )

    parser.add_argument('--config', type=str, help='設定ファイル（key=value 形式）のパス')
    parser.add_argument('--out', type=str, default=DEFAULT_OUT_DIR, help=f'出力ディレクトリ（デフォルト: {DEFAULT_OUT_DIR}）')
    parser.add_argument('--budget', type=int, help='Hurwitz 列挙の計算量上限（環境変数 CHANNEL_TAU_BUDGET からも読み込み可能）')
    parser.add_argument('--env-file', type=str, default=None, help='.envファイルのパス')
    parser.add_argument('--long', action='store_true', help='d=5 の Hurwitz 数や細かい時間刻みの計算を許可')
    parser.add_argument('-v', '--verbose', action='store_true', help='詳細な出力を表示')
    parser.add_argument('--log-file', type=str, help='ログファイルのパス')
    parser.add_argument(
        '--log-level',
        type=str,
        default='INFO',
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
        help='ログレベル'
    )

    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('hurwitz', help='二重Hurwitz数の表を出力')
    p.add_argument('--d-max', dest='d_max', type=int, default=DEFAULT_SERIES_DEGREE, help='最大次数 d')
    p.add_argument('--genus', type=int, default=0, help='種数')
    p.add_argument('--method', choices=['dynamic', 'enumerate'], help='数え上げ方式')
    p.set_defaults(handler=cmd_hurwitz)

    p = sub.add_parser('check', help='恒等式の厳密チェック')
    p.add_argument('identity', choices=['euler', 'cutjoin', 'hirota', 'toda', 'bridge'], help='チェックする恒等式')
    p.add_argument('--degree', type=int, default=DEFAULT_SERIES_DEGREE, help='q の打ち切り次数 D')
    p.add_argument('--orders', type=int, nargs=2, default=[DEFAULT_HIROTA_ORDER] * 2, metavar=('K1', 'K2'), help='Hirota 方程式の z 次数')
    p.add_argument('--full', action='store_true', help='t0 を含む完全な β 流をチェック')
    p.add_argument('--bridge-order', dest='bridge_order', type=int, default=BRIDGE_ORDER, help='トロコイド級数の比較次数')
    p.add_argument('--method', choices=['dynamic', 'enumerate'], help='数え上げ方式')
    p.add_argument('--tol', type=float, default=TODA_TOL, help='toda チェックの許容誤差')
    _add_trochoid_flags(p)
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser('trochoid', help='トロコイド厳密解の輪郭と観測量を出力')
    _add_trochoid_flags(p)
    p.add_argument('--t0-start', dest='t0_start', type=float, default=0.0, help='開始時刻 t0')
    p.add_argument('--t0-end', dest='t0_end', type=float, default=None, help=f'終了時刻（デフォルト: {TROCHOID_END_FRACTION}·t_c）')
    p.add_argument('--points', type=int, default=TROCHOID_GRID_POINTS, help='時刻グリッドの点数')
    p.set_defaults(handler=cmd_trochoid)

    p = sub.add_parser('evolve', help='モーメント保存の時間発展')
    _add_channel_flags(p)
    p.add_argument('--darcy', action='store_true', help='Darcy 則のチェックを実行')
    p.add_argument('--darcy-t0-max', dest='darcy_t0_max', type=float, default=None, help='Darcy チェックの最大 t0')
    p.set_defaults(handler=cmd_evolve)

    p = sub.add_parser('tau', help='設定されたモーメントでタウ関数を計算')
    _add_channel_flags(p)
    p.add_argument('--reconstruct', action='store_true', help='タウ関数の二階微分から写像を再構成して比較')
    p.set_defaults(handler=cmd_tau)

    p = sub.add_parser('gradients', help='タウ関数の勾配構造を差分でチェック')
    _add_channel_flags(p)
    p.add_argument('--k-max', dest='k_max', type=int, default=2, help='v_k を比較する最大の k')
    p.add_argument('--tol', type=float, default=GRADIENT_TOL, help='許容相対残差')
    p.set_defaults(handler=cmd_gradients)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main function"""
    parser = build_parser()
    args = parser.parse_args(argv)

    # Setup logging
    log_file = Path(args.log_file) if args.log_file else None
    setup_logging(
        level=args.log_level if not args.verbose else 'DEBUG',
        log_file=log_file
    )

    out_dir = Path(args.out)
    manifest = RunManifest(command=args.command if args.command != 'check' else f"check_{args.identity}")
    handler: Callable = args.handler

    try:
        with log_timing(logger, f"Command {manifest.command}"):
            exit_code = handler(args, out_dir, manifest)
    except ConsistencyError as e:
        logger.error(f"Consistency violation: {e}")
        print(f"不一致: {e}", file=sys.stderr)
        exit_code = EXIT_VIOLATION
    except KeyboardInterrupt:
        logger.info("Received keyboard interrupt")
        print("\n中断しました", file=sys.stderr)
        exit_code = EXIT_FAILURE
    except (ChannelTauError, FileNotFoundError) as e:
        logger.error(f"Error: {e}", exc_info=True)
        print(f"エラー: {e}", file=sys.stderr)
        exit_code = EXIT_FAILURE
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        print(f"予期しないエラー: {e}", file=sys.stderr)
        exit_code = EXIT_FAILURE

    manifest.summary.setdefault("exit_code", exit_code)
    manifest.save(out_dir)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
