"""Command-line front end: ``bipartite classify|gen|measure|decompose|batch``."""
import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .classify import FLAG_ORDER, classify
from .errors import BadNormalization, NumericalError, ValidationError
from .measures import discord_a, discord_b, gmqd_a, gmqd_b, min_a, min_b
from .sppt import extract_separable_ensemble, find_ssppt_basis
from .states import (
    load_state,
    make_circulant,
    make_cq,
    make_example1,
    make_example3,
    make_product,
    make_pure_schmidt,
    make_qc,
    matrix_from_json,
    random_density,
    random_state,
    random_unitary,
    save_state,
    state_to_json,
    ssppt_random,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2
SCHMIDT_INPUT_SLACK = 1e-3
CSV_COLUMNS = ("file", "dim_a", "dim_b") + FLAG_ORDER + ("separability", "reason")
FAMILIES = ("product", "cq", "qc", "circulant", "example1", "example3", "pure-schmidt", "random", "ssppt-random")
MEASURES = {
    "min_a": min_a,
    "min_b": min_b,
    "gmqd_a": gmqd_a,
    "gmqd_b": gmqd_b,
    "discord_a": discord_a,
    "discord_b": discord_b,
}


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _matrix_arg(text):
    """A matrix given inline as JSON or as a path to a JSON file."""
    p = Path(text)
    raw = json.loads(p.read_text() if p.is_file() else text)
    arr = np.asarray(raw)
    if arr.ndim == 3:
        return matrix_from_json(raw)
    return arr.astype(np.complex128)


def _generate(args):
    rng = np.random.default_rng(args.seed)
    fam = args.family
    if fam == "product":
        return make_product(random_density(args.dim_a, rng), random_density(args.dim_b, rng))
    if fam in ("cq", "qc"):
        n_cl, n_q = (args.dim_a, args.dim_b) if fam == "cq" else (args.dim_b, args.dim_a)
        weights = rng.dirichlet(np.ones(n_cl))
        kets = random_unitary(n_cl, rng)
        sigmas = [random_density(n_q, rng) for _ in range(n_cl)]
        return (make_cq if fam == "cq" else make_qc)(weights, kets, sigmas)
    if fam == "circulant":
        return make_circulant(args.a11, args.a22, args.b11, args.b22, complex(args.a12), complex(args.b12))
    if fam == "example1":
        return make_example1(_matrix_arg(args.rho11), _matrix_arg(args.d), _matrix_arg(args.t))
    if fam == "example3":
        return make_example3(args.a, args.b, args.c, args.dd, complex(args.e), complex(args.f), complex(args.g))
    if fam == "pure-schmidt":
        lam = np.asarray(_floats(args.l))
        norm = np.linalg.norm(lam)
        # rounded inputs such as 0.7071 are renormalized; anything further off is rejected
        if abs(norm - 1.0) > SCHMIDT_INPUT_SLACK:
            raise BadNormalization(f"Schmidt coefficients have norm {norm:.6g}")
        lam = lam / norm
        return make_pure_schmidt(lam)[1]
    if fam == "random":
        return random_state(args.dim_a, args.dim_b, args.rank, args.seed)
    return ssppt_random(args.dim_a, args.dim_b, args.seed, args.side)


def cmd_gen(args):
    s = _generate(args)
    if args.output:
        save_state(s, args.output)
    else:
        sys.stdout.write(state_to_json(s))
    return EXIT_OK


def _summary_line(path, rep):
    flags = " ".join(f"{k}={rep.flags[k]}" for k in FLAG_ORDER)
    return f"{path}: {rep.dim_a}x{rep.dim_b} {flags} separability={rep.separability}"


def cmd_classify(args):
    s = load_state(args.file)
    rep = classify(s, tol=args.tol, measures=args.measures, seed=args.seed)
    if args.json:
        print(rep.to_json())
        return EXIT_OK
    print(_summary_line(args.file, rep))
    if rep.measures:
        for k, v in rep.measures.items():
            print(f"  {k} = {v['value']:.12g} ({v['certificate']})")
    for w in rep.warnings:
        print(f"  warning: {w}")
    for strict, weak in rep.hard_violations:
        print(f"  hard violation: {strict} holds but {weak} fails")
    return EXIT_OK


def cmd_measure(args):
    s = load_state(args.file)
    chosen = [k for k in MEASURES if getattr(args, k)]
    if not chosen:
        raise ValidationError("choose at least one measure")
    kw = {"seed": args.seed}
    if args.restarts is not None:
        kw["restarts"] = args.restarts
    for name in chosen:
        r = MEASURES[name](s, **kw)
        print(f"{name} = {r.value:.12g} ({r.certificate}, iterations={r.iterations}, seed={r.seed})")
    return EXIT_OK


def cmd_decompose(args):
    s = load_state(args.file)
    _, ssppt = find_ssppt_basis(s, args.side)
    basis = ssppt.factor.index_basis if ssppt.factor is not None else None
    ens = extract_separable_ensemble(s, args.side, index_basis=basis)
    Path(args.output).write_text(ens.to_json())
    print(f"{len(ens.terms)} terms, reconstruction residual {ens.residual:.3e}")
    return EXIT_OK


def cmd_batch(args):
    files = sorted(Path(args.dir).glob("*.json"))
    status = EXIT_OK
    with open(args.report, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for f in files:
            try:
                rep = classify(load_state(f), tol=args.tol)
            except ValidationError as exc:
                print(f"{f.name}: {exc}", file=sys.stderr)
                status = max(status, EXIT_VALIDATION)
                continue
            w.writerow(
                [f.name, rep.dim_a, rep.dim_b]
                + [rep.flags[k] for k in FLAG_ORDER]
                + [rep.separability.verdict, rep.separability.reason or ""]
            )
    print(f"{len(files)} files classified into {args.report}")
    return status


def build_parser():
    p = argparse.ArgumentParser(prog="bipartite", description="Structure and correlation analysis of bipartite density matrices.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="run every structure test on a state file")
    c.add_argument("file")
    c.add_argument("--json", action="store_true", help="emit the full report as JSON")
    c.add_argument("--measures", action="store_true", help="also compute MiN, GMQD and discord")
    c.add_argument("--tol", type=float, default=1e-8)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_classify)

    g = sub.add_parser("gen", help="write a state of a named family")
    g.add_argument("family", choices=FAMILIES)
    g.add_argument("-o", "--output")
    g.add_argument("--dim-a", type=int, default=2)
    g.add_argument("--dim-b", type=int, default=2)
    g.add_argument("--rank", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--side", choices=("a", "b"), default="b")
    for name in ("a11", "a22", "b11", "b22"):
        g.add_argument(f"--{name}", type=float, default=0.25)
    g.add_argument("--a12", default="0")
    g.add_argument("--b12", default="0")
    g.add_argument("--a", type=float, default=1 / 6)
    g.add_argument("--b", type=float, default=1 / 6)
    g.add_argument("--c", type=float, default=1 / 6)
    g.add_argument("--d", dest="dd", type=float, default=1 / 6)
    for name in ("e", "f", "g"):
        g.add_argument(f"--{name}", default="0")
    g.add_argument("--rho11", help="example1 leading block (JSON or file)")
    g.add_argument("--dmat", dest="d", help="example1 contraction D (JSON or file)")
    g.add_argument("--t", help="example1 contraction T (JSON or file)")
    g.add_argument("--l", default="1", help="comma-separated Schmidt coefficients")
    g.set_defaults(func=cmd_gen)

    m = sub.add_parser("measure", help="compute correlation measures")
    m.add_argument("file")
    for name in MEASURES:
        m.add_argument("--" + name.replace("_", "-"), dest=name, action="store_true")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--restarts", type=int)
    m.set_defaults(func=cmd_measure)

    d = sub.add_parser("decompose", help="write a product-state ensemble of an SSPPT state")
    d.add_argument("file")
    d.add_argument("--side", choices=("a", "b"), default="b")
    d.add_argument("-o", "--output", required=True)
    d.set_defaults(func=cmd_decompose)

    b = sub.add_parser("batch", help="classify every *.json state in a directory")
    b.add_argument("dir")
    b.add_argument("--report", required=True)
    b.add_argument("--tol", type=float, default=1e-8)
    b.set_defaults(func=cmd_batch)
    return p


def cli_main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
