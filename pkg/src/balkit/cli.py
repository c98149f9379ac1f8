"""Command-line front end: reduce / compare / bench."""

import argparse
import csv
import json
import os
import sys
import time

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

BENCH_DATA_HINT = (
    "benchmark matrices are not bundled; download them from the MOR-Wiki benchmark "
    "collection and point --data (or BALKIT_BENCH_DATA) at a directory containing "
    "<name>.json manifests referencing the Matrix Market files"
)


def _apply_thread_cap():
    cap = os.environ.get("BALKIT_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, cap)


def _fail(code, exc):
    line = json.dumps({"error": type(exc).__name__, "exit": code, "message": str(exc)})
    print(line, file=sys.stderr)
    return code


def _parse_nodes(spec, what):
    """Node range spec 'lo:hi:N' -> log-spaced node vector."""
    from .quadrature import log_nodes

    try:
        lo, hi, n = spec.split(":")
        return log_nodes(float(lo), float(hi), int(n))
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"{what}: expected 'lo:hi:N', got {spec!r}") from exc


def build_parser():
    parser = argparse.ArgumentParser(prog="balkit",
                                     description="balancing-related model order reduction")
    sub = parser.add_subparsers(dest="command", required=True)

    red = sub.add_parser("reduce", help="compute a reduced model")
    red.add_argument("--method", required=True, choices=["bt", "spa", "quadbt", "quadspa"])
    red.add_argument("--order", "-r", type=int, default=None)
    red.add_argument("--tol", type=float, default=None)
    red.add_argument("--system", help="JSON manifest of Matrix Market files")
    red.add_argument("--samples", help="sample CSV (with JSON sidecar) for quad methods")
    red.add_argument("--nodes-c", default=None, help="controllability nodes as lo:hi:N")
    red.add_argument("--nodes-o", default=None, help="observability nodes as lo:hi:N")
    red.add_argument("--lowrank", action="store_true",
                     help="use the low-rank ADI factor path (large sparse systems)")
    red.add_argument("--adi-tol", type=float, default=1e-8)
    red.add_argument("--realify", action="store_true",
                     help="re-assemble the quad ROM over conjugate node pairs (real output)")
    red.add_argument("--out", required=True, help="ROM JSON output path")
    red.add_argument("--report", default=None, help="report JSON path (default <out>.report.json)")
    red.set_defaults(func=cmd_reduce)

    cmp_ = sub.add_parser("compare", help="frequency-response comparison of FOM and ROMs")
    cmp_.add_argument("--system", required=True, help="FOM manifest")
    cmp_.add_argument("--rom", required=True, nargs="+", help="ROM JSON file(s)")
    cmp_.add_argument("--lo", type=float, default=1e-3)
    cmp_.add_argument("--hi", type=float, default=1e3)
    cmp_.add_argument("--npoints", type=int, default=400)
    cmp_.add_argument("--out", required=True, help="CSV output path")
    cmp_.add_argument("--no-plot", action="store_true", help="skip the PNG figure")
    cmp_.set_defaults(func=cmd_compare)

    ben = sub.add_parser("bench", help="benchmark suites")
    ben.add_argument("suite", choices=["heat-scaling", "quad-convergence", "paper-tables"])
    ben.add_argument("--out", default="bench_out", help="output directory")
    ben.add_argument("--sizes", default="100,400,1600,6400",
                     help="heat-scaling model sizes (comma separated)")
    ben.add_argument("--dense-max", type=int, default=1600,
                     help="largest size attempted with the dense solver")
    ben.add_argument("--order", type=int, default=None, help="ROM order (suite default if unset)")
    ben.add_argument("--adi-tol", type=float, default=1e-10)
    ben.add_argument("--seed", type=int, default=11)
    ben.add_argument("--np-list", default="20,40,80,160",
                     help="quad-convergence node counts (comma separated)")
    ben.add_argument("--data", default=os.environ.get("BALKIT_BENCH_DATA"),
                     help="directory with benchmark manifests (paper-tables)")
    ben.add_argument("--no-plot", action="store_true", help="skip the PNG figures")
    ben.set_defaults(func=cmd_bench)
    return parser


# --------------------------------------------------------------------------


def _oracle_quad_inputs(sys, method, nodes_c, nodes_o):
    from .quadrature import make_trapezoid_rule
    from .samples import sample_tf, sample_tf_derivative, to_strictly_proper, to_zero_shifted
    from .system import dc_moment

    import numpy as np

    rule = make_trapezoid_rule(nodes_c, nodes_o)
    raw_c, raw_o = sample_tf(sys, nodes_c), sample_tf(sys, nodes_o)
    deriv = None
    if method == "quadbt":
        sc = to_strictly_proper(raw_c, sys.D)
        so = to_strictly_proper(raw_o, sys.D)
        extra = {"d": np.asarray(sys.D)}
    else:
        h0 = dc_moment(sys)
        sc = to_zero_shifted(raw_c, h0)
        so = to_zero_shifted(raw_o, h0)
        extra = {"h0": h0}
        shared = sorted(set(np.round(nodes_c, 12)) & set(np.round(nodes_o, 12)))
        if shared:
            deriv = sample_tf_derivative(sys, np.array(shared))
    return sc, so, rule, deriv, extra


def _split_sample_nodes(samples, spec_c, spec_o):
    import numpy as np

    if spec_c and spec_o:
        return samples.restrict(_parse_nodes(spec_c, "--nodes-c")), \
            samples.restrict(_parse_nodes(spec_o, "--nodes-o"))
    # default: interleave the file's nodes across the two sides
    order = np.argsort(samples.nodes)
    return samples.restrict(samples.nodes[order[0::2]]), \
        samples.restrict(samples.nodes[order[1::2]])


def cmd_reduce(args):
    from . import iofmt
    from .errors import BalkitError

    import numpy as np

    t0 = time.perf_counter()
    timings = {}
    if args.order is None and args.tol is None:
        raise argparse.ArgumentTypeError("one of --order / --tol is required")
    report = {"method": args.method.upper(), "flags": {
        "lowrank": args.lowrank, "realify": args.realify}}

    if args.method in ("bt", "spa"):
        if not args.system:
            raise argparse.ArgumentTypeError(f"--method {args.method} requires --system")
        from .gramian import lyap_factor_dense, lyap_factor_lowrank
        from .reduce import bt, spa

        sys_ = iofmt.load_system(args.system)
        t1 = time.perf_counter()
        if args.lowrank:
            factors = lyap_factor_lowrank(sys_, tol=args.adi_tol)
        else:
            factors = lyap_factor_dense(sys_)
        timings["factor_s"] = time.perf_counter() - t1
        t1 = time.perf_counter()
        if args.method == "bt":
            rom = bt(sys_, r=args.order, tol=args.tol, factors=factors)
        else:
            if args.order is None:
                raise argparse.ArgumentTypeError("--method spa requires --order")
            rom = spa(sys_, args.order, factors=factors)
        timings["reduce_s"] = time.perf_counter() - t1
        report["fom"] = {"n": sys_.n, "m": sys_.m, "p": sys_.p}
        report["hankel"] = np.asarray(rom.hankel_used).tolist()
        report["residuals"] = {"P": factors.residual_P, "Q": factors.residual_Q}
        report["factor_columns"] = {"U": factors.r_U, "L": factors.r_L}
    else:
        from .quadrature import quadbt, quadspa, realify

        spec_c = args.nodes_c or "1e-2:1e2:40"
        spec_o = args.nodes_o or "2e-2:2e2:40"
        if args.system:
            sys_ = iofmt.load_system(args.system)
            nodes_c = _parse_nodes(spec_c, "--nodes-c")
            nodes_o = _parse_nodes(spec_o, "--nodes-o")
            sc, so, rule, deriv, extra = _oracle_quad_inputs(sys_, args.method,
                                                             nodes_c, nodes_o)
        elif args.samples:
            from .quadrature import make_trapezoid_rule
            from .samples import RAW_H, to_strictly_proper, to_zero_shifted

            samples = iofmt.load_samples(args.samples)
            sc, so = _split_sample_nodes(samples, args.nodes_c, args.nodes_o)
            rule = make_trapezoid_rule(sc.nodes, so.nodes)
            deriv, extra = None, {}
            if samples.kind == RAW_H:
                if args.method == "quadbt":
                    if samples.D is None:
                        raise BalkitError("sample sidecar lacks D (feedthrough) for quadbt")
                    sc, so = to_strictly_proper(sc, samples.D), to_strictly_proper(so, samples.D)
                else:
                    if samples.H0_ref is None:
                        raise BalkitError("sample sidecar lacks H0 (DC moment) for quadspa")
                    sc, so = to_zero_shifted(sc, samples.H0_ref), to_zero_shifted(so, samples.H0_ref)
        else:
            raise argparse.ArgumentTypeError("quad methods need --system or --samples")
        if args.order is None:
            raise argparse.ArgumentTypeError("quad methods require --order")
        t1 = time.perf_counter()
        if args.method == "quadbt":
            rom = quadbt(sc, so, rule, args.order, **extra)
        else:
            rom = quadspa(sc, so, rule, args.order, derivative_samples=deriv, **extra)
        if args.realify:
            rom = realify(rom)
        timings["reduce_s"] = time.perf_counter() - t1
        report["data_sigma"] = np.asarray(rom.hankel_used).tolist()
        report["nodes"] = {"c": rule.nodes_c.tolist(), "o": rule.nodes_o.tolist()}

    iofmt.save_rom(args.out, rom)
    timings["total_s"] = time.perf_counter() - t0
    report["r"] = rom.r
    report["timings"] = timings
    if rom.deviation_meta:
        report["deviation_meta"] = str(rom.deviation_meta)
    report_path = args.report or args.out + ".report.json"
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=1)
    print(f"wrote {args.out} and {report_path}")
    return EXIT_OK


def cmd_compare(args):
    from . import iofmt
    from .metrics import freq_response, hinf_grid
    from .system import error_system

    import numpy as np

    fom = iofmt.load_system(args.system)
    roms = []
    for path in args.rom:
        label = os.path.splitext(os.path.basename(path))[0]
        roms.append((label, iofmt.load_rom(path)))
    if not (0 < args.lo < args.hi) or args.npoints < 2:
        raise argparse.ArgumentTypeError("invalid grid flags")
    grid = np.geomspace(args.lo, args.hi, args.npoints)
    fom_resp = freq_response(fom, grid)
    errors = {}
    rel_table = []
    fom_norm = hinf_grid(fom, args.lo, args.hi, args.npoints)
    for label, rom in roms:
        err_sys = error_system(fom, rom)
        errors[label] = freq_response(err_sys, grid)
        rel = hinf_grid(err_sys, args.lo, args.hi, args.npoints) / fom_norm
        rel_table.append((label, rel))
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["omega", "fom"] + [f"err_{label}" for label, _ in roms])
        for i, w in enumerate(grid):
            writer.writerow([repr(float(w)), repr(float(fom_resp[i]))]
                            + [repr(float(errors[label][i])) for label, _ in roms])
    print(f"{'model':<24}  rel grid-Hinf error")
    for label, rel in rel_table:
        print(f"{label:<24}  {rel:.6e}")
    if not args.no_plot:
        from .plots import save_compare_figure

        fig_path = os.path.splitext(args.out)[0] + ".png"
        save_compare_figure(fig_path, grid, fom_resp, errors)
        print(f"wrote {args.out} and {fig_path}")
    else:
        print(f"wrote {args.out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# bench suites


def _bench_heat_scaling(args, outdir):
    from .metrics import hinf_grid
    from .reduce import spa
    from .system import error_system, heat_1d

    sizes = [int(s) for s in args.sizes.split(",")]
    order = args.order or 12
    rows = []
    times_dense, times_lowrank = [], []
    for n in sizes:
        sys_ = heat_1d(n)
        t0 = time.perf_counter()
        rom_lr = spa(sys_, order, lowrank=True, adi_tol=args.adi_tol)
        t_lr = time.perf_counter() - t0
        t_d, dev = None, None
        if n <= args.dense_max:
            dense_sys = heat_1d(n, dense=True)
            t0 = time.perf_counter()
            rom_d = spa(dense_sys, order)
            t_d = time.perf_counter() - t0
            dev = hinf_grid(error_system(rom_d.sys, rom_lr), 1e-4, 1e4, 200) \
                / hinf_grid(sys_, 1e-4, 1e4, 200)
        rows.append((n, t_lr, t_d, dev))
        times_lowrank.append(t_lr)
        times_dense.append(t_d)
        print(f"n={n:6d}  lowrank {t_lr:8.3f}s  dense "
              f"{'-' if t_d is None else f'{t_d:8.3f}s'}  rel deviation "
              f"{'-' if dev is None else f'{dev:.3e}'}")
    csv_path = os.path.join(outdir, "heat_scaling.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "t_lowrank_s", "t_dense_s", "rel_hinf_deviation"])
        for row in rows:
            writer.writerow(["" if v is None else repr(float(v)) for v in row])
    if not args.no_plot:
        from .plots import save_timing_figure

        save_timing_figure(os.path.join(outdir, "heat_scaling.png"), sizes,
                           {"SPA low-rank": times_lowrank, "SPA dense": times_dense})
    print(f"wrote {csv_path}")
    return EXIT_OK


def _bench_quad_convergence(args, outdir):
    from .metrics import hinf_grid
    from .quadrature import log_nodes
    from .reduce import bt, spa
    from .system import error_system, random_stable

    np_list = [int(s) for s in args.np_list.split(",")]
    order = args.order or 8
    sys_ = random_stable(30, 1, 1, seed=args.seed)
    rom_bt = bt(sys_, r=order)
    rom_spa = spa(sys_, order)
    devs = {"QuadBT vs BT": [], "QuadSPA vs SPA": []}
    for n_p in np_list:
        nodes_c = log_nodes(1e-4, 1e4, n_p)
        nodes_o = log_nodes(1.3e-4, 1.3e4, n_p)
        qbt, qspa = _quad_pair(sys_, nodes_c, nodes_o, order)
        devs["QuadBT vs BT"].append(hinf_grid(error_system(rom_bt.sys, qbt), 1e-3, 1e3, 300))
        devs["QuadSPA vs SPA"].append(hinf_grid(error_system(rom_spa.sys, qspa), 1e-3, 1e3, 300))
        print(f"N_p={n_p:4d}  dev(QuadBT,BT)={devs['QuadBT vs BT'][-1]:.4e}  "
              f"dev(QuadSPA,SPA)={devs['QuadSPA vs SPA'][-1]:.4e}")
    csv_path = os.path.join(outdir, "quad_convergence.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n_p", "dev_quadbt_bt", "dev_quadspa_spa"])
        for i, n_p in enumerate(np_list):
            writer.writerow([n_p, repr(float(devs["QuadBT vs BT"][i])),
                             repr(float(devs["QuadSPA vs SPA"][i]))])
    if not args.no_plot:
        from .plots import save_convergence_figure

        save_convergence_figure(os.path.join(outdir, "quad_convergence.png"), np_list, devs)
    print(f"wrote {csv_path}")
    return EXIT_OK


def _quad_pair(sys_, nodes_c, nodes_o, order):
    """QuadBT and QuadSPA ROMs of an oracle system over the given nodes."""
    from .quadrature import quadbt, quadspa, realify

    sc, so, rule, deriv, extra = _oracle_quad_inputs(sys_, "quadbt", nodes_c, nodes_o)
    qbt = realify(quadbt(sc, so, rule, order, **extra))
    sc, so, rule, deriv, extra = _oracle_quad_inputs(sys_, "quadspa", nodes_c, nodes_o)
    qspa = realify(quadspa(sc, so, rule, order, derivative_samples=deriv, **extra))
    return qbt, qspa


def _bench_paper_tables(args, outdir):
    from .errors import FormatError
    from . import iofmt
    from .metrics import hinf_grid
    from .quadrature import log_nodes
    from .reduce import bt, spa
    from .system import error_system

    if not args.data:
        raise FormatError("paper-tables needs --data; " + BENCH_DATA_HINT)
    manifests = sorted(
        f for f in os.listdir(args.data) if f.endswith(".json") and not f.endswith(".report.json"))
    if not manifests:
        raise FormatError(f"no manifests found in {args.data}; " + BENCH_DATA_HINT)
    orders = [args.order] if args.order else [6, 12, 18, 24, 30]
    for manifest in manifests:
        name = os.path.splitext(manifest)[0]
        sys_ = iofmt.load_system(os.path.join(args.data, manifest))
        fom_norm = hinf_grid(sys_, 1e-1, 1e3, 600)
        nodes_c = log_nodes(1.0, 100.0, 100)
        nodes_o = log_nodes(1.05, 105.0, 100)
        rows = []
        for r in orders:
            rom_bt = bt(sys_, r=r)
            rom_spa = spa(sys_, r)
            qbt, qspa = _quad_pair(sys_, nodes_c, nodes_o, r)
            for label, rom in (("SPA", rom_spa), ("QuadSPA", qspa),
                               ("BT", rom_bt), ("QuadBT", qbt)):
                rel = hinf_grid(error_system(sys_, rom), 1e-1, 1e3, 600) / fom_norm
                rows.append((label, r, rel))
                print(f"{name}  {label:<8} r={r:<3d} rel Hinf err = {rel:.4e}")
        csv_path = os.path.join(outdir, f"{name}_table.csv")
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["method", "r", "rel_hinf_error"])
            for row in rows:
                writer.writerow([row[0], row[1], repr(float(row[2]))])
        print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_bench(args):
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    if args.suite == "heat-scaling":
        return _bench_heat_scaling(args, outdir)
    if args.suite == "quad-convergence":
        return _bench_quad_convergence(args, outdir)
    return _bench_paper_tables(args, outdir)


# --------------------------------------------------------------------------


def main(argv=None):
    _apply_thread_cap()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    from .errors import BalkitError, ConvergenceError, FormatError, RankError, \
        SigmaTieError, SingularMatrixError, StabilityError

    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        return _fail(EXIT_USAGE, exc)
    except FormatError as exc:
        return _fail(EXIT_IO, exc)
    except (ConvergenceError, SigmaTieError, RankError, SingularMatrixError,
            StabilityError) as exc:
        return _fail(EXIT_NUMERIC, exc)
    except BalkitError as exc:
        return _fail(EXIT_NUMERIC, exc)
    except OSError as exc:
        return _fail(EXIT_IO, exc)
    except ValueError as exc:
        return _fail(EXIT_USAGE, exc)


if __name__ == "__main__":
    sys.exit(main())
