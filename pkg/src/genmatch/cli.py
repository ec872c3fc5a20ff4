"""Command-line driver.

Subcommands: landmarks, match, eval, diversity. Exit codes: 0 success,
1 pipeline failure, 2 usage or I/O error. The eigenpair cache directory can
be set with the GENMATCH_CACHE_DIR environment variable.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import evaluation, fmap, plotting
from .config import RunConfig, load_config
from .descriptors import CAT_CENTER, CAT_MAX, CAT_MIN
from .errors import GenmatchError, MeshError, PipelineError
from .mesh import load_mesh, normalize_area, save_ply
from .pipeline import build_context, prepare_mesh, landmark_set, run_match

CATEGORY_COLORS = {CAT_MAX: (0, 0, 255), CAT_MIN: (255, 0, 0),
                   CAT_CENTER: (0, 255, 0)}


def build_parser():
    parser = argparse.ArgumentParser(prog="genmatch")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("landmarks", help="detect and export landmarks")
    p.add_argument("mesh")
    p.add_argument("-o", "--out-dir", required=True)
    _add_config_flags(p)

    p = sub.add_parser("match", help="compute a landmark match and functional maps")
    p.add_argument("mesh_a")
    p.add_argument("mesh_b")
    p.add_argument("-o", "--out-dir", required=True)
    _add_config_flags(p)

    p = sub.add_parser("eval", help="geodesic-error curve of a vertex map")
    p.add_argument("--vertexmap", required=True)
    p.add_argument("--mesh-b", required=True)
    p.add_argument("--ground-truth", required=True,
                   help="text file: one 'source target' vertex pair per line")
    p.add_argument("--symmetric-gt", default=None)
    p.add_argument("-o", "--out-csv", required=True)

    p = sub.add_parser("diversity", help="pairwise chromosome-distance matrices")
    p.add_argument("--run-log", required=True)
    p.add_argument("--mesh-b", required=True)
    p.add_argument("-o", "--out-prefix", required=True)
    p.add_argument("--generations", default="first,last",
                   help="comma-separated generation indices, or first/last")
    _add_config_flags(p)
    return parser


def _add_config_flags(parser):
    parser.add_argument("--config", default=None, help="key=value config file")
    for field in dataclasses.fields(RunConfig):
        flag = "--" + field.name.replace("_", "-")
        caster = int if field.type == "int" else float
        parser.add_argument(flag, type=caster, default=None)


def resolve_config(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    for field in dataclasses.fields(RunConfig):
        value = getattr(args, field.name, None)
        if value is not None:
            caster = int if field.type == "int" else float
            setattr(cfg, field.name, caster(value))
    return cfg.validate()


def cmd_landmarks(args):
    cfg = resolve_config(args)
    mesh, basis = prepare_mesh(load_mesh(args.mesh), cfg,
                               os.environ.get("GENMATCH_CACHE_DIR"))
    lset = landmark_set(mesh, basis, cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    with open(os.path.join(args.out_dir, "landmarks.json"), "w") as fh:
        fh.write(lset.to_json())
    colors = np.full((mesh.n_vertices, 3), 180, dtype=np.uint8)
    for lm in lset.landmarks:
        colors[lm.vertex] = CATEGORY_COLORS[lm.category]
    save_ply(os.path.join(args.out_dir, "landmarks.ply"),
             mesh.vertices, mesh.faces, colors)
    print(f"wrote {len(lset)} landmarks to {args.out_dir}")
    return 0


def cmd_match(args):
    cfg = resolve_config(args)
    mesh_a = load_mesh(args.mesh_a)
    mesh_b = load_mesh(args.mesh_b)
    os.makedirs(args.out_dir, exist_ok=True)
    written = []

    def out(name):
        path = os.path.join(args.out_dir, name)
        written.append(path)
        return path

    try:
        ctx, best, maps, log = run_match(mesh_a, mesh_b, cfg,
                                         os.environ.get("GENMATCH_CACHE_DIR"))
        c_12, c_21, p_12, p_21 = maps

        pairs = ctx.vertex_match(best)
        match_doc = {
            "pairs": [
                {"source_vertex": s, "target_vertex": t,
                 "category": ctx.lm_1.landmarks[i].category}
                for (i, _), (s, t) in zip(
                    ((i, t) for i, t in enumerate(best) if t != -1), pairs)
            ],
            "best_e_fit": log[-1]["best_e_fit"],
            "generations": log[-1]["generation"],
        }
        with open(out("match.json"), "w") as fh:
            json.dump(match_doc, fh, indent=2)
        fmap.save_fmap(out("C12.txt"), c_12)
        fmap.save_fmap(out("C21.txt"), c_21)
        fmap.save_vertexmap(out("P12.txt"), p_12)
        fmap.save_vertexmap(out("P21.txt"), p_21)
        with open(out("run_log.jsonl"), "w") as fh:
            for entry in log:
                fh.write(json.dumps(entry) + "\n")
        with open(out("config.txt"), "w") as fh:
            fh.write(cfg.to_text())
        _write_transfer_plys(ctx, c_12, out)
        plotting.save_convergence_plot(out("convergence.png"), log)
    except Exception:
        for path in written:
            if os.path.isfile(path):
                os.remove(path)
        raise
    print(f"match with {len(pairs)} pairs, E_fit={log[-1]['best_e_fit']:.6g}, "
          f"outputs in {args.out_dir}")
    return 0


def _write_transfer_plys(ctx, c_12, out):
    """Color a smooth function on the target mesh and its pull-back on the
    source mesh through the functional map."""
    fit = ctx.fit_ctx
    m1, m2 = fit.mesh_1, fit.mesh_2
    func_2 = fit.basis_2.eigenfunctions[:, 1]
    coeffs = fit.basis_2.pinv(fit.k_s) @ func_2
    func_1 = fit.basis_1.phi(fit.k_t) @ (c_12.matrix @ coeffs)
    save_ply(out("transfer_target.ply"), m2.vertices, m2.faces,
             plotting.scalar_to_rgb(func_2))
    save_ply(out("transfer_source.ply"), m1.vertices, m1.faces,
             plotting.scalar_to_rgb(func_1))


def _read_pairs(path):
    pairs = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#")[0].strip()
            if not line:
                continue
            s, t = line.split()
            pairs.append((int(s), int(t)))
    if not pairs:
        raise GenmatchError(f"no vertex pairs in {path}")
    return pairs


def cmd_eval(args):
    mesh_b = normalize_area(load_mesh(args.mesh_b))
    vmap = fmap.load_vertexmap(args.vertexmap)
    gt = _read_pairs(args.ground_truth)
    sym = _read_pairs(args.symmetric_gt) if args.symmetric_gt else None
    errors = evaluation.geodesic_errors(vmap, mesh_b, gt, sym)
    curve = evaluation.error_curve(errors)
    with open(args.out_csv, "w") as fh:
        fh.write(curve.to_csv())
    plotting.save_curve_plot(os.path.splitext(args.out_csv)[0] + ".png", curve)
    print(f"mean error {errors.mean():.6g}, curve written to {args.out_csv}")
    return 0


def _select_generations(spec_text, count):
    indices = []
    for token in spec_text.split(","):
        token = token.strip()
        if token == "first":
            indices.append(0)
        elif token == "last":
            indices.append(count - 1)
        else:
            idx = int(token)
            indices.append(idx if idx >= 0 else count + idx)
    for idx in indices:
        if not 0 <= idx < count:
            raise GenmatchError(f"generation index {idx} out of range")
    return indices


def cmd_diversity(args):
    cfg = resolve_config(args)
    entries = []
    with open(args.run_log) as fh:
        for line in fh:
            if line.strip():
                entries.append(json.loads(line))
    if not entries or "population" not in entries[0]:
        raise GenmatchError("run log is malformed or lacks population snapshots")
    mesh_b, basis_b = prepare_mesh(load_mesh(args.mesh_b), cfg,
                                   os.environ.get("GENMATCH_CACHE_DIR"))
    lm_2 = landmark_set(mesh_b, basis_b, cfg)
    for idx in _select_generations(args.generations, len(entries)):
        entry = entries[idx]
        chroms = [tuple(g) for g in entry["population"]]
        matrix = evaluation.distance_matrix(chroms, lm_2.pairwise)
        gen = entry["generation"]
        csv_path = f"{args.out_prefix}_gen{gen}.csv"
        with open(csv_path, "w") as fh:
            fh.write(evaluation.matrix_to_csv(matrix))
        plotting.save_distance_heatmap(f"{args.out_prefix}_gen{gen}.png", matrix,
                                       title=f"generation {gen}")
        off = matrix[np.triu_indices(len(chroms), k=1)] if len(chroms) > 1 else [0.0]
        print(f"generation {gen}: {len(chroms)} chromosomes, "
              f"mean pairwise distance {np.mean(off):.6g}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"landmarks": cmd_landmarks, "match": cmd_match,
                "eval": cmd_eval, "diversity": cmd_diversity}
    try:
        return handlers[args.command](args)
    except (MeshError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GenmatchError as exc:
        code = 1 if isinstance(exc, PipelineError) else 2
        print(f"error: {exc}", file=sys.stderr)
        return code
    except Exception as exc:  # pipeline failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
