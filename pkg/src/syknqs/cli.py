"""Command-line entry point: ``syknqs {ed,train,sweep,compress,entropy}``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .compress import COMPRESSION_COLUMNS, compression_scan
from .config import ConfigError, ExperimentConfig
from .ed import bipartite_entropy, ground_state_key, load_ground_state, page_value, save_ground_state
from .harness import RECORD_COLUMNS, Problem, build_hamiltonian, build_problem, record_rows, scaling_sweep, train
from .models import save_couplings, sample_syk_couplings
from .nqs import load_params, num_params, save_params

log = logging.getLogger("syknqs")


class MissingRecord(RuntimeError):
    pass


@contextmanager
def _atomic(path: Path, suffix: str = ""):
    """Yield a temporary path that replaces ``path`` on success."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=suffix)
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _append_text(path: Path, text: str) -> None:
    old = path.read_text() if path.exists() else ""
    with _atomic(path) as tmp:
        tmp.write_text(old + text)


def _append_csv(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf)
    if not path.exists():
        w.writerow(header)
    w.writerows(rows)
    _append_text(path, buf.getvalue())


def _append_jsonl(path: Path, rows: list[dict]) -> None:
    _append_text(path, "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows))


def _save_npz(path: Path, saver) -> None:
    with _atomic(path, suffix=".npz") as tmp:
        saver(tmp)


def _record(cfg: ExperimentConfig, command: str, **fields) -> dict:
    return {"command": command, "code_version": __version__, "config": cfg.to_dict(), **fields}


def _gs_path(cfg: ExperimentConfig, model: str, seed, L: int) -> Path:
    return cfg.output_dir / f"{ground_state_key(model, seed, L)}.npz"


def _problem_from_record(cfg: ExperimentConfig) -> Problem:
    """Rebuild the Hamiltonian and attach the ground state persisted by ``ed``."""
    model, L, seed = cfg.model, cfg.L, cfg.coupling_seed()
    path = _gs_path(cfg, model, seed, L)
    if not path.exists():
        raise MissingRecord(f"ground-state record {path} not found; run `syknqs ed` first")
    sol, meta = load_ground_state(path)
    if (meta["model"], meta["L"]) != (model, L):
        raise MissingRecord(f"{path} holds {meta['model']} L={meta['L']}; rerun `syknqs ed`")
    basis, H = build_hamiltonian(model, L, seed)
    return Problem(model, L, seed, basis, H, sol)


def _run_tag(cfg: ExperimentConfig) -> str:
    return (f"{cfg.model}_L{cfg.L}_seed{cfg.coupling_seed()}_a{cfg['alpha']}_m{cfg['mu']}"
            f"_{cfg['activation']}_{cfg['loss']}_init{cfg.init_seed()}")


# ------------------------------------------------------------------ commands

def cmd_ed(cfg: ExperimentConfig) -> dict:
    model, L, seed = cfg.model, cfg.L, cfg.coupling_seed()
    problem = build_problem(model, L, seed, lanczos_seed=cfg.lanczos_seed())
    out = cfg.output_dir
    path = _gs_path(cfg, model, seed, L)
    _save_npz(path, lambda p: save_ground_state(problem.gs, p, model, seed, L))
    if model == "syk":
        _save_npz(out / f"couplings_L{L}_seed{seed}.npz",
                  lambda p: save_couplings(sample_syk_couplings(L, seed), p))
    rec = _record(cfg, "ed", energy=problem.gs.energy, dim_h=problem.dim, residual=problem.gs.residual,
                  record=path.name)
    _append_jsonl(out / "ed.jsonl", [rec])
    print(f"E_GS = {problem.gs.energy:.12f}")
    print(f"dim H = {problem.dim}")
    return rec


def cmd_train(cfg: ExperimentConfig) -> dict:
    problem = _problem_from_record(cfg)
    arch = cfg.architecture()
    settings = cfg.train_settings()
    init_seed = cfg.init_seed()
    tag = _run_tag(cfg)
    record = train(problem.objective(settings.loss), arch, init_seed, settings,
                   config={"model": problem.model, "L": problem.L, "coupling_seed": problem.coupling_seed,
                           "n_par": num_params(arch), "dim_h": problem.dim})
    out = cfg.output_dir
    lineage = {"coupling_seed": problem.coupling_seed, "init_seed": init_seed, "master_seed": cfg["seed"]}
    _save_npz(out / f"ckpt_{tag}.npz", lambda p: save_params(record.best_params, p, lineage))
    _save_npz(out / f"traj_{tag}.npz", lambda p: np.savez(p, steps=record.steps, delta_e=record.delta_e,
                                                           overlap=record.overlap))
    rec = _record(cfg, "train", **record.summary(), checkpoint=f"ckpt_{tag}.npz")
    _append_jsonl(out / "train.jsonl", [rec])
    _append_csv(out / "train.csv", RECORD_COLUMNS,
                [[problem.L, cfg["alpha"], init_seed, repr(record.best_delta_e), record.n_steps,
                  record.verdict, num_params(arch), problem.dim]])
    print(f"{tag}: best delta_E = {record.best_delta_e:.6e} at step {record.best_step} ({record.verdict})")
    return rec


def cmd_compress(cfg: ExperimentConfig) -> dict:
    path = cfg.output_dir / f"ckpt_{_run_tag(cfg)}.npz"
    if not path.exists():
        raise MissingRecord(f"checkpoint {path} not found; run `syknqs train` first")
    params, _ = load_params(path)
    problem = _problem_from_record(cfg)
    reports = compression_scan(params, cfg["rel_thresholds"], problem.objective("voe"))
    rows = [[repr(r.rel_threshold), repr(r.q), repr(r.delta_e_before), repr(r.delta_e_after),
             ";".join(map(str, r.ranks))] for r in reports]
    _append_csv(cfg.output_dir / "compress.csv", COMPRESSION_COLUMNS, rows)
    rec = _record(cfg, "compress", checkpoint=path.name,
                  reports=[dict(zip(COMPRESSION_COLUMNS, row)) for row in rows])
    _append_jsonl(cfg.output_dir / "compress.jsonl", [rec])
    for row in rows:
        print(" ".join(str(x) for x in row))
    return rec


def cmd_sweep(cfg: ExperimentConfig) -> dict:
    model = cfg.model
    seed = cfg.coupling_seed()
    problems = [build_problem(model, L, seed, lanczos_seed=cfg.lanczos_seed()) for L in cfg.L_list]
    axis = cfg["axis"]
    fixed = {"mu": cfg["mu"]} if axis == "alpha" else {"alpha": cfg["alpha"]}
    fixed["activation"] = cfg["activation"]
    results = scaling_sweep(problems, axis, cfg["grid"], cfg.init_seeds(), cfg.train_settings(),
                            fixed=fixed, n_jobs=int(cfg["n_jobs"]))
    rows = record_rows(results)
    out = cfg.output_dir
    _append_csv(out / "sweep.csv", RECORD_COLUMNS, rows)
    summary = [{"L": r.L, "axis": r.axis, "critical_value": r.value_min, "n_par": r.n_par,
                "dim_h": r.dim_h, "unbounded": r.unbounded, "grid": r.grid, "points": r.stats()}
               for r in results]
    rec = _record(cfg, "sweep", results=summary)
    _append_jsonl(out / "sweep.jsonl", [rec])
    for s in summary:
        print(f"L={s['L']} {axis}_min={s['critical_value']} N_par={s['n_par']} dim_H={s['dim_h']}")
    return rec


def cmd_entropy(cfg: ExperimentConfig) -> dict:
    model = cfg.model
    seeds = cfg.coupling_seeds() if model == "syk" else [None]
    rows = []
    for L in cfg.L_list:
        for seed in seeds:
            problem = build_problem(model, L, seed, lanczos_seed=cfg.lanczos_seed())
            rows.append([L, seed, repr(bipartite_entropy(problem.gs.vector, problem.basis)), repr(page_value(L))])
    out = cfg.output_dir
    _append_csv(out / "entropy.csv", ["L", "seed", "S_bipartite", "S_page"], rows)
    rec = _record(cfg, "entropy", rows=rows)
    _append_jsonl(out / "entropy.jsonl", [rec])
    for row in rows:
        print(" ".join(str(x) for x in row))
    return rec


COMMANDS = {"ed": cmd_ed, "train": cmd_train, "sweep": cmd_sweep, "compress": cmd_compress,
            "entropy": cmd_entropy}


def _parse_set(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="syknqs", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("-c", "--config", help="JSON config file")
        p.add_argument("--model", choices=["syk", "heisenberg"])
        p.add_argument("--L", type=int)
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--output-dir")
        p.add_argument("--jobs", type=int, dest="n_jobs")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override any config field (value parsed as JSON)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = {k: v for k, v in (("model", args.model), ("L", args.L), ("seed", args.seed),
                                       ("output_dir", args.output_dir), ("n_jobs", args.n_jobs))
                     if v is not None}
        overrides.update(_parse_set(args.set))
        if args.config:
            cfg = ExperimentConfig.from_file(args.config, overrides)
        else:
            cfg = ExperimentConfig(overrides)
        COMMANDS[args.command](cfg)
    except (ConfigError, MissingRecord) as exc:
        print(f"syknqs {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
