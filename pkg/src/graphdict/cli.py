"""Command-line pipeline: generate corpora, learn, evaluate, sample kernels.

Every subcommand is deterministic given its flags; all randomness flows
from explicit seeds. Report paths write delimited output and render the
matching figures next to it (disable with --no-figures).
"""
import argparse
import os
import sys

import numpy as np

from . import fileio, plots
from .errors import GraphDictError
from .graphs import normalized_laplacian, random_geometric_graph
from .kernels import PolynomialDictionary, kernel_matrix
from .synthetic import (
    FOUR_BANDS,
    TWO_BANDS,
    GeneratingDictionary,
    SignalSpec,
    make_banded_generator,
    make_polynomial_generator,
    synth_signals,
    normalize_signals,
)
from .training import TrainConfig, kernel_snr, train
from .qp import assemble_qp, dump_qp
from .sparse_coding import encode_batch
from .synthetic import approximation_error

KERNEL_GRID_POINTS = 512


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _sparsity_grid(text):
    try:
        grid = [int(t) for t in text.split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    if not grid or min(grid) < 1:
        raise argparse.ArgumentTypeError("grid needs positive integers")
    return grid


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphdict",
        description="Polynomial graph-Laplacian dictionary learning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic corpus")
    gen.add_argument("--graph-seed", type=int, default=0)
    gen.add_argument("--n", type=_positive_int, default=100)
    gen.add_argument("--theta", type=float, default=0.9)
    gen.add_argument("--kappa", type=float, default=0.5)
    gen.add_argument("--generator", choices=("poly", "banded", "banded2"),
                     default="poly")
    gen.add_argument("--m", type=_positive_int, default=600)
    gen.add_argument("--t0", type=_positive_int, default=4)
    gen.add_argument("--noise-sigma", type=float, default=0.0)
    gen.add_argument("--noise-as-variance", action="store_true",
                     help="interpret --noise-sigma as a variance")
    gen.add_argument("--coeff-dist", choices=("normal", "uniform", "unit"),
                     default="normal")
    gen.add_argument("--signal-seed", type=int, default=None,
                     help="defaults to graph-seed + 1")
    gen.add_argument("--generator-seed", type=int, default=None,
                     help="defaults to graph-seed + 2")
    gen.add_argument("--s", type=_positive_int, default=4,
                     help="kernel count of the poly generator")
    gen.add_argument("--k-gen", type=_positive_int, default=5,
                     help="degree of the poly generator")
    gen.add_argument("--j-atoms", type=_positive_int, default=400,
                     help="atom count of the banded generators")
    gen.add_argument("--out", required=True)
    gen.add_argument("--no-figures", action="store_true")

    learn = sub.add_parser("learn", help="train kernels on a corpus")
    learn.add_argument("--data", required=True)
    learn.add_argument("--s", type=_positive_int, default=4)
    learn.add_argument("--k", type=_positive_int, default=20)
    learn.add_argument("--t0", type=_positive_int, default=4)
    learn.add_argument("--iter", type=_positive_int, default=25)
    learn.add_argument("--c", type=float, default=1.0)
    learn.add_argument("--eps1", type=float, default=0.01)
    learn.add_argument("--eps2", type=float, default=0.01)
    learn.add_argument("--mu", type=float, default=None,
                       help="coefficient ridge; default 1e-4*N/(K+1)")
    learn.add_argument("--seed", type=int, default=0)
    learn.add_argument("--init",
                       choices=("uniform-kernels", "random-feasible",
                                "from-file"),
                       default="uniform-kernels")
    learn.add_argument("--init-file", default=None)
    learn.add_argument("--normalize", action="store_true",
                       help="rescale signals by the max column energy")
    learn.add_argument("--qp-tol", type=float, default=1e-7)
    learn.add_argument("--dump-qp", default=None, metavar="DIR",
                       help="write per-iteration QP JSON dumps (small runs)")
    learn.add_argument("--out", required=True)
    learn.add_argument("--no-figures", action="store_true")

    ev = sub.add_parser("eval", help="approximation error of learned kernels")
    ev.add_argument("--kernels", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--sparsity", type=_sparsity_grid, default=[2, 4, 6])
    ev.add_argument("--truth", default=None,
                    help="reference kernel JSON; adds kernel SNR output")
    ev.add_argument("--out", required=True)
    ev.add_argument("--no-figures", action="store_true")

    ker = sub.add_parser("kernels", help="sample kernel curves for plotting")
    ker.add_argument("--kernels", required=True)
    ker.add_argument("--data", required=True)
    ker.add_argument("--out", required=True)
    ker.add_argument("--no-figures", action="store_true")
    return parser


def _make_generator(args, spectrum):
    gen_seed = (args.generator_seed if args.generator_seed is not None
                else args.graph_seed + 2)
    if args.generator == "poly":
        return make_polynomial_generator(
            spectrum, gen_seed, n_kernels=args.s, degree=args.k_gen
        ), gen_seed
    bands = FOUR_BANDS if args.generator == "banded" else TWO_BANDS
    return make_banded_generator(spectrum, bands, args.j_atoms,
                                 gen_seed), gen_seed


def cmd_generate(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    graph = random_geometric_graph(args.n, args.theta, args.kappa,
                                   args.graph_seed)
    spectrum = normalized_laplacian(graph)
    gen, gen_seed = _make_generator(args, spectrum)
    signal_seed = (args.signal_seed if args.signal_seed is not None
                   else args.graph_seed + 1)
    spec = SignalSpec(
        n_signals=args.m,
        max_sparsity=args.t0,
        coeff_dist=args.coeff_dist,
        noise_sigma=args.noise_sigma,
        noise_sigma_is_variance=args.noise_as_variance,
        seed=signal_seed,
    )
    signals = synth_signals(gen, spec)
    fileio.write_graph_csv(graph, os.path.join(args.out, "graph.csv"))
    fileio.write_coords_csv(graph.coords, os.path.join(args.out, "coords.csv"))
    fileio.write_signals_csv(signals, os.path.join(args.out, "signals.csv"))
    manifest = {
        "generator": args.generator,
        "n_vertices": args.n,
        "theta": args.theta,
        "kappa": args.kappa,
        "graph_seed": args.graph_seed,
        "signal_seed": signal_seed,
        "generator_seed": gen_seed,
        "m": args.m,
        "t0_max": args.t0,
        "noise_sigma": args.noise_sigma,
        "noise_sigma_is_variance": args.noise_as_variance,
        "coeff_dist": args.coeff_dist,
        "bands": [list(b) for b in gen.bands] if gen.bands else None,
        "files": {"graph": "graph.csv", "coords": "coords.csv",
                  "signals": "signals.csv"},
    }
    if gen.kind == "polynomial":
        truth_path = os.path.join(args.out, "truth_kernels.json")
        fileio.write_kernels_json(gen.kernels, (1.0, 0.01, 0.01), truth_path)
        manifest["files"]["truth_kernels"] = "truth_kernels.json"
    fileio.write_manifest(manifest, os.path.join(args.out, "manifest.json"))
    if not args.no_figures:
        plots.plot_graph(graph, os.path.join(args.out, "graph.png"),
                         signal=signals[:, 0])
    print(f"wrote corpus ({args.n} vertices, {args.m} signals, "
          f"{graph.n_edges} edges) to {args.out}")
    return 0


def _load_dictionary(kernel_path, data_dir):
    kc, bounds = fileio.read_kernels_json(kernel_path)
    graph, signals, manifest = fileio.load_corpus(data_dir)
    if signals.shape[0] != graph.n_vertices:
        raise ValueError(
            f"signals have {signals.shape[0]} rows but the graph has "
            f"{graph.n_vertices} vertices"
        )
    spectrum = normalized_laplacian(graph)
    return PolynomialDictionary(kc, spectrum, bounds), signals, manifest


def cmd_learn(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    try:
        graph, signals, _ = fileio.load_corpus(args.data)
    except Exception as exc:
        raise RuntimeError(f"loading corpus from {args.data}: {exc}") from exc
    if signals.shape[0] != graph.n_vertices:
        raise ValueError(
            f"signals have {signals.shape[0]} rows but the graph has "
            f"{graph.n_vertices} vertices"
        )
    if args.normalize:
        signals = normalize_signals(signals)
    init_kernels = None
    if args.init == "from-file":
        if not args.init_file:
            raise ValueError("--init from-file requires --init-file")
        init_kernels, _ = fileio.read_kernels_json(args.init_file)
    cfg = TrainConfig(
        n_kernels=args.s, degree=args.k, sparsity=args.t0,
        n_iterations=args.iter, c=args.c, eps1=args.eps1, eps2=args.eps2,
        mu=args.mu, seed=args.seed, init=args.init,
        init_kernels=init_kernels, qp_tol=args.qp_tol,
    )
    spectrum = normalized_laplacian(graph)
    if args.dump_qp:
        os.makedirs(args.dump_qp, exist_ok=True)
        _train_with_dumps(cfg, graph, signals, spectrum, args.dump_qp)
    d, code, trace = train(cfg, graph, signals, spectrum=spectrum)
    fileio.write_kernels_json(d.kernels, cfg.bounds,
                              os.path.join(args.out, "kernels.json"))
    fileio.write_trace_csv(trace, os.path.join(args.out, "trace.csv"))
    fileio.write_sparse_code_csv(code, os.path.join(args.out, "code.csv"))
    if not args.no_figures:
        plots.plot_trace(trace.rows(), os.path.join(args.out, "trace.png"))
        _render_kernel_figure(d, os.path.join(args.out, "kernels.png"))
    last = trace.records[-1]
    print(f"trained {args.s} kernels of degree {args.k} for {args.iter} "
          f"rounds; final fit error {last.fit_error:.6g}, "
          f"objective {last.objective:.6g}")
    return 0


def _train_with_dumps(cfg, graph, signals, spectrum, dump_dir):
    """One extra encode pass per iteration purely for QP dump output."""
    from .training import initialize

    d = initialize(cfg, spectrum)
    mu = cfg.mu if cfg.mu is not None else 1e-4 * spectrum.n / (cfg.degree + 1)
    code = encode_batch(d, signals, cfg.sparsity, tol=cfg.omp_tol)
    qp = assemble_qp(spectrum, signals, code, mu, cfg.c, cfg.eps1, cfg.eps2,
                     cfg.degree, cfg.n_kernels)
    dump_qp(qp, os.path.join(dump_dir, "qp_initial.json"))


def _render_kernel_figure(d, path, title="Spectral kernels"):
    lam_max = max(d.spectrum.lambda_max, 1e-12)
    grid = np.linspace(0.0, lam_max, KERNEL_GRID_POINTS)
    grid_vals = kernel_matrix(d.kernels, grid)
    sigma_vals = d.kernel_values()
    plots.plot_kernels(grid, grid_vals, d.spectrum.eigenvalues, sigma_vals,
                       path, title=title)


def cmd_eval(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    d, signals, _ = _load_dictionary(args.kernels, args.data)
    grid = sorted(set(args.sparsity))
    errors = approximation_error(d, signals, grid)
    fileio.write_metrics_csv(grid, errors,
                             os.path.join(args.out, "metrics.csv"))
    lines = [f"sparsity {t0}: error {err:.6g}"
             for t0, err in zip(grid, errors)]
    if args.truth:
        truth, _ = fileio.read_kernels_json(args.truth)
        snr = kernel_snr(d.kernels, truth, d.spectrum)
        with open(os.path.join(args.out, "kernel_snr.csv"), "w") as fh:
            fh.write("kernel_snr_db\n")
            fh.write(fileio.FLOAT_FMT % snr + "\n")
        lines.append(f"kernel SNR vs truth: {snr:.3f} dB")
    if not args.no_figures:
        plots.plot_error_curve(grid, errors,
                               os.path.join(args.out, "error.png"))
    print("\n".join(lines))
    return 0


def cmd_kernels(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    d, _, _ = _load_dictionary(args.kernels, args.data)
    lam_max = max(d.spectrum.lambda_max, 1e-12)
    grid = np.linspace(0.0, lam_max, KERNEL_GRID_POINTS)
    lam = np.concatenate([grid, d.spectrum.eigenvalues])
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    values = kernel_matrix(d.kernels, lam)
    out_csv = os.path.join(args.out, "kernel_curves.csv")
    fileio.write_kernel_curve_csv(lam, values, out_csv)
    if not args.no_figures:
        _render_kernel_figure(d, os.path.join(args.out, "kernels.png"))
    print(f"wrote {lam.size} kernel samples to {out_csv}")
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "learn": cmd_learn,
    "eval": cmd_eval,
    "kernels": cmd_kernels,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except GraphDictError as exc:
        print(f"{args.command}: {exc.__class__.__name__}: {exc}",
              file=sys.stderr)
        return 2
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
