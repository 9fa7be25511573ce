"""Command-line interface.

Subcommands
-----------
represent    sparse-code one image over a 2-D DCT dictionary and write the
             reconstruction, an atom-count heatmap, a metrics report and a
             run manifest
denoise      add seeded Gaussian noise, sparse-code the noisy image and
             report PSNR against the clean original (one or more sigmas,
             one or more solvers)
synth-bench  exact-sparse recovery sweep over per-column sparsities
scale-bench  wall-time scaling sweep over patch counts
dict         build and save a dictionary as CSV
heatmap      re-render an atom-count heatmap from saved codes (.npz)

Option values resolve as: explicit flag > environment (GHTSPARSE_OUT_DIR,
GHTSPARSE_THREADS) > --config JSON file > built-in defaults (rho 0.1,
tolerance 1e-5, patch side 8, 10x10 atoms per dimension, budget 10 per
patch).

Images: PGM (P5) is read and written natively; PNG input is decoded via
Pillow. All image outputs are written as PGM. CSV reports contain only
deterministic values; wall times and machine info go to the JSON manifest,
so a rerun with the same arguments reproduces every CSV/PGM byte for byte.
"""

import argparse
import hashlib
import json
import os
import platform
import sys
import time

import numpy as np

from . import __version__
from .dictionaries import build_gaussian_dictionary, build_overcomplete_dct, save_dictionary
from .metrics import psnr, rmse
from .patches import (
    PatchMatrix,
    atom_count_heatmap,
    image_to_patch_matrix,
    patch_matrix_to_image,
    read_pgm,
    write_pgm,
)
from .synth import (
    SOLVER_NAMES,
    run_named_solver,
    run_recovery_sweep,
    run_scaling_sweep,
)

OUT_DIR_ENV = "GHTSPARSE_OUT_DIR"
THREADS_ENV = "GHTSPARSE_THREADS"

DEFAULTS = {
    "patch_side": 8,
    "atoms_per_dim": 10,
    "budget_per_patch": 10.0,
    "rho": 0.1,
    "tolerance": 1e-5,
    "max_iterations": 200,
    "seed": 0,
    "threads": 1,
    "out_dir": "ghtsparse-out",
}


def _load_config(path):
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        raise ValueError(f"config file {path} must hold a JSON object")
    return config


def _resolve(args, config, key, cast=None):
    """flag > env (out_dir/threads only) > config file > default."""
    value = getattr(args, key, None)
    if value is None and key == "out_dir":
        value = os.environ.get(OUT_DIR_ENV)
    if value is None and key == "threads":
        value = os.environ.get(THREADS_ENV)
    if value is None and key in config:
        value = config[key]
    if value is None:
        value = DEFAULTS[key]
    return cast(value) if cast else value


def _load_image(path):
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        return read_pgm(path)
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=float)


def _fit_to_grid(image, patch_side, crop):
    height, width = image.shape
    new_h, new_w = height - height % patch_side, width - width % patch_side
    if (new_h, new_w) == (height, width):
        return image
    if not crop:
        raise ValueError(
            f"image is {height}x{width}, not divisible by patch side {patch_side}; "
            "pass --crop to center-crop"
        )
    if new_h == 0 or new_w == 0:
        raise ValueError(f"image {height}x{width} is smaller than one patch")
    top = (height - new_h) // 2
    left = (width - new_w) // 2
    return image[top:top + new_h, left:left + new_w]


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_manifest(out_dir, command, params, seed, inputs, outputs, wall_time):
    manifest = {
        "command": command,
        "parameters": params,
        "seed": seed,
        "inputs": {path: _sha256(path) for path in inputs},
        "outputs": sorted(os.path.basename(p) for p in outputs),
        "version": __version__,
        "wall_time_seconds": wall_time,
        "machine": {
            "platform": platform.platform(),
            "python": platform.python_version(),
            "cpu_count": os.cpu_count(),
        },
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _fmt(value):
    return f"{value:.10g}"


def cmd_represent(args):
    config = _load_config(args.config)
    patch_side = _resolve(args, config, "patch_side", int)
    atoms_per_dim = _resolve(args, config, "atoms_per_dim", int)
    budget = _resolve(args, config, "budget_per_patch", float)
    rho = _resolve(args, config, "rho", float)
    tolerance = _resolve(args, config, "tolerance", float)
    max_iterations = _resolve(args, config, "max_iterations", int)
    seed = _resolve(args, config, "seed", int)
    threads = _resolve(args, config, "threads", int)
    out_dir = _resolve(args, config, "out_dir", str)
    solver = args.solver if args.solver is not None else config.get("solver", "ght-qpm")

    start = time.perf_counter()
    image = _fit_to_grid(_load_image(args.image), patch_side, args.crop)
    grid = image_to_patch_matrix(image, patch_side)
    dictionary = build_overcomplete_dct(patch_side, atoms_per_dim)
    result = run_named_solver(
        solver, dictionary, grid, budget,
        rho=rho, tolerance=tolerance, max_iterations=max_iterations,
        record_trace=False, threads=threads,
    )
    fit_rmse = rmse(dictionary, result.codes, grid)
    reconstruction = patch_matrix_to_image(
        PatchMatrix(dictionary.data @ result.codes, patch_side,
                    grid.grid_rows, grid.grid_cols),
        image.shape[0], image.shape[1],
    )
    heat = atom_count_heatmap(result.codes, grid.grid_rows, grid.grid_cols, patch_side)

    os.makedirs(out_dir, exist_ok=True)
    outputs = []
    recon_path = os.path.join(out_dir, "reconstruction.pgm")
    write_pgm(reconstruction, recon_path)
    outputs.append(recon_path)
    heat_path = os.path.join(out_dir, "heatmap.pgm")
    write_pgm(heat, heat_path)
    outputs.append(heat_path)
    report_path = os.path.join(out_dir, "report.csv")
    with open(report_path, "w", encoding="ascii") as fh:
        fh.write("solver,patch_side,atoms_per_dim,budget_per_patch,global_budget,"
                 "iterations,nonzeros,rmse\n")
        global_budget = int(round(budget * grid.n_patches)) \
            if solver in ("ght-qpm", "ght-admm") else int(round(budget)) * grid.n_patches
        fh.write(
            f"{solver},{patch_side},{atoms_per_dim},{_fmt(budget)},{global_budget},"
            f"{result.iterations},{int(np.count_nonzero(result.codes))},{_fmt(fit_rmse)}\n"
        )
    outputs.append(report_path)
    if args.save_codes:
        codes_path = os.path.join(out_dir, "codes.npz")
        np.savez_compressed(
            codes_path, codes=result.codes, grid_rows=grid.grid_rows,
            grid_cols=grid.grid_cols, patch_side=patch_side,
        )
        outputs.append(codes_path)
    params = {
        "image": args.image, "solver": solver, "patch_side": patch_side,
        "atoms_per_dim": atoms_per_dim, "budget_per_patch": budget, "rho": rho,
        "tolerance": tolerance, "max_iterations": max_iterations,
        "crop": bool(args.crop), "threads": threads,
    }
    _write_manifest(out_dir, "represent", params, seed, [args.image], outputs,
                    time.perf_counter() - start)
    print(f"represent: solver={solver} rmse={fit_rmse:.6g} "
          f"iterations={result.iterations} wall={result.wall_time:.3f}s -> {out_dir}")
    return 0


def cmd_denoise(args):
    config = _load_config(args.config)
    patch_side = _resolve(args, config, "patch_side", int)
    atoms_per_dim = _resolve(args, config, "atoms_per_dim", int)
    budget = _resolve(args, config, "budget_per_patch", float)
    rho = _resolve(args, config, "rho", float)
    tolerance = _resolve(args, config, "tolerance", float)
    max_iterations = _resolve(args, config, "max_iterations", int)
    seed = _resolve(args, config, "seed", int)
    threads = _resolve(args, config, "threads", int)
    out_dir = _resolve(args, config, "out_dir", str)
    solvers = args.solver if args.solver else config.get("solver", ["ght-admm"])
    if isinstance(solvers, str):
        solvers = [solvers]
    sigmas = args.sigma if args.sigma is not None else config.get("sigma", [10.0])

    start = time.perf_counter()
    clean = _fit_to_grid(_load_image(args.image), patch_side, args.crop)
    dictionary = build_overcomplete_dct(patch_side, atoms_per_dim)
    os.makedirs(out_dir, exist_ok=True)
    outputs = []
    rows = []
    for sigma in sigmas:
        if sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {sigma}")
        if sigma == 0:
            noisy = clean.copy()
        else:
            # one noise stream per (seed, sigma) so each level reproduces
            # independently of which other levels were requested
            rng = np.random.default_rng([seed, int(round(sigma * 1e6))])
            noisy = np.clip(clean + rng.normal(0.0, sigma, clean.shape), 0.0, 255.0)
        noisy_path = os.path.join(out_dir, f"noisy_sigma{sigma:g}.pgm")
        write_pgm(noisy, noisy_path)
        outputs.append(noisy_path)
        noisy_written = np.clip(np.rint(noisy), 0, 255).astype(float)
        grid = image_to_patch_matrix(noisy, patch_side)
        for solver in solvers:
            result = run_named_solver(
                solver, dictionary, grid, budget,
                rho=rho, tolerance=tolerance, max_iterations=max_iterations,
                record_trace=False, threads=threads,
            )
            denoised = patch_matrix_to_image(
                PatchMatrix(dictionary.data @ result.codes, patch_side,
                            grid.grid_rows, grid.grid_cols),
                clean.shape[0], clean.shape[1],
            )
            denoised_8bit = np.clip(np.rint(denoised), 0, 255).astype(float)
            den_path = os.path.join(out_dir, f"denoised_{solver}_sigma{sigma:g}.pgm")
            write_pgm(denoised, den_path)
            outputs.append(den_path)
            rows.append((
                solver, sigma, psnr(clean, noisy_written), psnr(clean, denoised_8bit),
                rmse(dictionary, result.codes, grid), result.iterations,
            ))
    report_path = os.path.join(out_dir, "psnr_report.csv")
    with open(report_path, "w", encoding="ascii") as fh:
        fh.write("solver,sigma,budget_per_patch,psnr_noisy,psnr_denoised,fit_rmse,iterations\n")
        for solver, sigma, p_noisy, p_den, fit, iters in rows:
            fh.write(f"{solver},{_fmt(sigma)},{_fmt(budget)},{_fmt(p_noisy)},"
                     f"{_fmt(p_den)},{_fmt(fit)},{iters}\n")
    outputs.append(report_path)
    params = {
        "image": args.image, "solvers": list(solvers), "sigma": [float(s) for s in sigmas],
        "patch_side": patch_side, "atoms_per_dim": atoms_per_dim,
        "budget_per_patch": budget, "rho": rho, "tolerance": tolerance,
        "max_iterations": max_iterations, "crop": bool(args.crop), "threads": threads,
    }
    _write_manifest(out_dir, "denoise", params, seed, [args.image], outputs,
                    time.perf_counter() - start)
    for solver, sigma, p_noisy, p_den, _, _ in rows:
        print(f"denoise: solver={solver} sigma={sigma:g} "
              f"psnr_noisy={p_noisy:.2f}dB psnr_denoised={p_den:.2f}dB")
    print(f"denoise: reports -> {out_dir}")
    return 0


def cmd_synth_bench(args):
    config = _load_config(args.config)
    out_dir = _resolve(args, config, "out_dir", str)
    threads = _resolve(args, config, "threads", int)
    seed = _resolve(args, config, "seed", int)
    s_min = args.s_min if args.s_min is not None else int(config.get("s_min", 5))
    s_max = args.s_max if args.s_max is not None else int(config.get("s_max", 30))
    trials = args.trials if args.trials is not None else int(config.get("trials", 5))
    solvers = args.solvers if args.solvers else config.get("solvers", list(SOLVER_NAMES))
    if s_min > s_max:
        raise ValueError(f"s-min {s_min} exceeds s-max {s_max}")

    start = time.perf_counter()
    report = run_recovery_sweep(
        range(s_min, s_max + 1), trials=trials, solvers=solvers,
        base_seed=seed, threads=threads,
    )
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "recovery.csv")
    json_path = os.path.join(out_dir, "recovery.json")
    report.write_csv(csv_path)
    report.write_json(json_path)
    params = {"s_min": s_min, "s_max": s_max, "trials": trials,
              "solvers": list(solvers), "threads": threads}
    _write_manifest(out_dir, "synth-bench", params, seed, [], [csv_path, json_path],
                    time.perf_counter() - start)
    print(f"synth-bench: {len(report.rows)} rows -> {csv_path}")
    return 0


def cmd_scale_bench(args):
    config = _load_config(args.config)
    out_dir = _resolve(args, config, "out_dir", str)
    threads = _resolve(args, config, "threads", int)
    seed = _resolve(args, config, "seed", int)
    s = args.s if args.s is not None else int(config.get("s", 10))
    p_list = args.p_list if args.p_list else config.get("p_list")
    if not p_list:
        p_list = [2**k for k in range(10, 17)]
    solvers = args.solvers if args.solvers else config.get("solvers", ["ght-qpm", "ght-admm"])
    repeats = args.repeats if args.repeats is not None else int(config.get("repeats", 3))
    iterations = args.iterations if args.iterations is not None \
        else int(config.get("iterations", 10))

    patches = None
    if args.patch_dir:
        patches = _patch_pool_from_dir(args.patch_dir, max(int(p) for p in p_list), seed)

    start = time.perf_counter()
    report = run_scaling_sweep(
        p_list, s=s, solvers=solvers, patches=patches,
        repeats=repeats, iterations=iterations, seed=seed, threads=threads,
    )
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "scaling.csv")
    json_path = os.path.join(out_dir, "scaling.json")
    report.write_csv(csv_path)
    report.write_json(json_path)
    params = {"p_list": [int(p) for p in p_list], "s": s, "solvers": list(solvers),
              "repeats": repeats, "iterations": iterations,
              "patch_dir": args.patch_dir, "threads": threads}
    _write_manifest(out_dir, "scale-bench", params, seed, [], [csv_path, json_path],
                    time.perf_counter() - start)
    print(f"scale-bench: {len(report.rows)} rows -> {csv_path}")
    return 0


def _patch_pool_from_dir(directory, needed, seed, patch_side=8):
    """Sample a pool of columnized patches from every PGM/PNG in a directory."""
    paths = sorted(
        os.path.join(directory, name)
        for name in os.listdir(directory)
        if name.lower().endswith((".pgm", ".png"))
    )
    if not paths:
        raise ValueError(f"no .pgm/.png images found in {directory}")
    blocks = []
    for path in paths:
        image = _fit_to_grid(_load_image(path), patch_side, crop=True)
        blocks.append(image_to_patch_matrix(image, patch_side).data)
    pool = np.concatenate(blocks, axis=1)
    rng = np.random.default_rng([seed, 3])
    if pool.shape[1] < needed:
        picks = rng.choice(pool.shape[1], size=needed, replace=True)
        pool = pool[:, picks]
    else:
        picks = rng.permutation(pool.shape[1])[:needed]
        pool = pool[:, picks]
    return pool


def cmd_dict(args):
    if args.kind == "dct":
        dictionary = build_overcomplete_dct(args.patch_side, args.atoms_per_dim)
    else:
        dictionary = build_gaussian_dictionary(args.rows, args.atoms, args.std, args.seed)
    save_dictionary(dictionary, args.output)
    print(f"dict: wrote {dictionary.n_rows}x{dictionary.n_atoms} matrix -> {args.output}")
    return 0


def cmd_heatmap(args):
    with np.load(args.codes) as payload:
        codes = payload["codes"]
        grid_rows = int(payload["grid_rows"])
        grid_cols = int(payload["grid_cols"])
        patch_side = int(payload["patch_side"])
    heat = atom_count_heatmap(codes, grid_rows, grid_cols, patch_side)
    write_pgm(heat, args.output)
    print(f"heatmap: wrote {heat.shape[0]}x{heat.shape[1]} image -> {args.output}")
    return 0


def _add_common(parser):
    parser.add_argument("--config", help="JSON config file (flags win over it)")
    parser.add_argument("--out-dir", dest="out_dir",
                        help=f"output directory (env {OUT_DIR_ENV})")
    parser.add_argument("--threads", type=int,
                        help=f"worker cap for patch-wise solvers (env {THREADS_ENV})")
    parser.add_argument("--seed", type=int, help="random seed")


def _add_solver_params(parser):
    parser.add_argument("--patch-side", dest="patch_side", type=int)
    parser.add_argument("--atoms-per-dim", dest="atoms_per_dim", type=int)
    parser.add_argument("--budget-per-patch", dest="budget_per_patch", type=float)
    parser.add_argument("--rho", type=float)
    parser.add_argument("--tolerance", type=float)
    parser.add_argument("--max-iterations", dest="max_iterations", type=int)
    parser.add_argument("--crop", action="store_true",
                        help="center-crop to the largest patch-divisible size")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ghtsparse",
        description="Joint sparse coding of image patches under a global nonzero budget",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    rep = sub.add_parser("represent", help="sparse-code an image and reconstruct it")
    rep.add_argument("image", help="input image (.pgm or .png)")
    rep.add_argument("--solver", choices=SOLVER_NAMES)
    rep.add_argument("--save-codes", dest="save_codes", action="store_true",
                     help="also write codes.npz for the heatmap utility")
    _add_solver_params(rep)
    _add_common(rep)
    rep.set_defaults(func=cmd_represent)

    den = sub.add_parser("denoise", help="add noise, sparse-code, report PSNR")
    den.add_argument("image", help="clean input image (.pgm or .png)")
    den.add_argument("--sigma", type=float, nargs="+",
                     help="noise standard deviation(s), e.g. --sigma 5 10 20 30 40")
    den.add_argument("--solver", choices=SOLVER_NAMES, nargs="+")
    _add_solver_params(den)
    _add_common(den)
    den.set_defaults(func=cmd_denoise)

    syn = sub.add_parser("synth-bench", help="exact-sparse recovery sweep")
    syn.add_argument("--s-min", dest="s_min", type=int)
    syn.add_argument("--s-max", dest="s_max", type=int)
    syn.add_argument("--trials", type=int)
    syn.add_argument("--solvers", choices=SOLVER_NAMES, nargs="+")
    _add_common(syn)
    syn.set_defaults(func=cmd_synth_bench)

    sca = sub.add_parser("scale-bench", help="wall-time scaling sweep over P")
    sca.add_argument("--p-list", dest="p_list", type=int, nargs="+")
    sca.add_argument("--s", type=int)
    sca.add_argument("--solvers", choices=SOLVER_NAMES, nargs="+")
    sca.add_argument("--repeats", type=int)
    sca.add_argument("--iterations", type=int)
    sca.add_argument("--patch-dir", dest="patch_dir",
                     help="directory of images to draw patches from "
                          "(synthetic Gaussian patches when omitted)")
    _add_common(sca)
    sca.set_defaults(func=cmd_scale_bench)

    dic = sub.add_parser("dict", help="build and save a dictionary as CSV")
    dic.add_argument("--kind", choices=("dct", "gaussian"), default="dct")
    dic.add_argument("--patch-side", dest="patch_side", type=int, default=8)
    dic.add_argument("--atoms-per-dim", dest="atoms_per_dim", type=int, default=10)
    dic.add_argument("--rows", type=int, default=100)
    dic.add_argument("--atoms", type=int, default=200)
    dic.add_argument("--std", type=float, default=0.1)
    dic.add_argument("--seed", type=int, default=0)
    dic.add_argument("-o", "--output", required=True)
    dic.set_defaults(func=cmd_dict)

    het = sub.add_parser("heatmap", help="render an atom-count heatmap from codes.npz")
    het.add_argument("codes", help="codes.npz written by represent --save-codes")
    het.add_argument("-o", "--output", required=True)
    het.set_defaults(func=cmd_heatmap)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # surface a clean one-line failure, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
