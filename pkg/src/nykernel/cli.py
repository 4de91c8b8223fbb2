"""Command line front end.

Exit codes: 0 on success, 2 on invalid input, 3 on numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .classifiers import one_vs_rest_train
from .config import TrainConfig
from .datasets import GENERATORS, generate
from .errors import NumericalError, ValidationError
from .harness import CLASSIFIERS, _fit, crossval, load_spec, scaling_bench, select_landmarks
from .landmarks import smss
from .proximity import LabeledDataset, nystrom_extend, nystrom_factorize

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def _dataset(args) -> LabeledDataset:
    return LabeledDataset(io.read_labels(args.labels), kernel_matrix=io.read_kernel(args.kernel))


def cmd_gen(args):
    data = generate(args.dataset, args.n, args.seed)
    stem = Path(args.out)
    stem.parent.mkdir(parents=True, exist_ok=True)
    kpath = stem.with_suffix(".nykb" if args.binary else ".nyk")
    io.write_kernel(kpath, data.block(), binary=args.binary)
    io.write_labels(stem.with_suffix(".labels"), data.labels)
    print(f"wrote {kpath} and {stem.with_suffix('.labels')} (n={data.n})")


def cmd_landmarks(args):
    data = _dataset(args)
    report = select_landmarks(data, args.method, args.eps, args.m, args.seed)
    if args.out:
        io.write_landmarks(args.out, report)
    print(f"{report.method}: {report.count} landmarks")
    if not args.out:
        print(" ".join(str(int(i)) for i in report.indices))


def cmd_train(args):
    data = _dataset(args)
    cfg = TrainConfig(max_iters=args.max_iters, rng_seed=args.seed)
    if args.classifier.startswith("ny-"):
        if args.landmarks:
            idx = io.read_landmarks(args.landmarks).indices
        else:
            idx = select_landmarks(data, "meb", args.eps, None, args.seed).indices
        source = nystrom_factorize(data, idx)
    else:
        source = data.block()
    model = one_vs_rest_train(lambda y: _fit(args.classifier, source, y, cfg), data.labels)
    io.write_model(args.out, model)
    print(f"trained {args.classifier} on n={data.n}, wrote {args.out}")


def cmd_predict(args):
    model = io.read_model(args.model)
    rows = io.read_matrix(args.rows)
    labels, scores = model.predict(rows), model.class_scores(rows)
    out = sys.stdout if args.out is None else open(args.out, "w")
    try:
        for lab, sc in zip(labels, scores):
            out.write(f"{int(lab)} " + " ".join(repr(float(v)) for v in sc) + "\n")
    finally:
        if args.out is not None:
            out.close()


def cmd_crossval(args):
    spec = load_spec(args.spec)
    if args.out:
        spec.output = args.out
    report = crossval(spec)
    print(report.to_json() if args.json else report.to_text(), end="")


def cmd_smss(args):
    data = _dataset(args)
    idx = io.read_landmarks(args.landmarks).indices
    F = nystrom_factorize(data, idx)
    print(repr(float(smss(F, data.block(), data.labels))))


def cmd_extend(args):
    data = _dataset(args)
    idx = io.read_landmarks(args.landmarks).indices
    F = nystrom_factorize(data, idx)
    rows = np.atleast_2d(nystrom_extend(F, io.read_matrix(args.rows)))
    text = "".join(" ".join(repr(float(v)) for v in row) + "\n" for row in rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")


def cmd_bench(args):
    sizes = [int(s) for s in args.sizes.split(",")]
    res = scaling_bench(args.classifier, sizes, args.m, args.seed, args.repeats)
    text = res.to_text()
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nykernel", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def kernel_args(sp):
        sp.add_argument("--kernel", required=True, help="NYK1 or NYKB kernel file")
        sp.add_argument("--labels", required=True, help="label file, one integer per line")

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    g.add_argument("dataset", choices=sorted(GENERATORS))
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output stem (.nyk/.nykb and .labels)")
    g.add_argument("--binary", action="store_true", help="write NYKB instead of NYK1")
    g.set_defaults(func=cmd_gen)

    lm = sub.add_parser("landmarks", help="select Nyström landmarks")
    lm.add_argument("method", choices=("meb", "kmeans", "random"))
    kernel_args(lm)
    lm.add_argument("--eps", type=float, default=0.01)
    lm.add_argument("--m", type=int, default=None)
    lm.add_argument("--seed", type=int, default=0)
    lm.add_argument("--out", default=None)
    lm.set_defaults(func=cmd_landmarks)

    t = sub.add_parser("train", help="train a classifier")
    t.add_argument("classifier", choices=CLASSIFIERS)
    kernel_args(t)
    t.add_argument("--landmarks", default=None, help="landmark file (Nyström variants)")
    t.add_argument("--eps", type=float, default=0.01)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--max-iters", type=int, default=500)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    pr = sub.add_parser("predict", help="score kernel rows with a saved model")
    pr.add_argument("--model", required=True)
    pr.add_argument("--rows", required=True,
                    help="test kernel rows against the training points (or the landmarks)")
    pr.add_argument("--out", default=None)
    pr.set_defaults(func=cmd_predict)

    cv = sub.add_parser("crossval", help="run a cross-validation experiment")
    cv.add_argument("--spec", required=True)
    cv.add_argument("--out", default=None, help="report stem (overrides the spec file)")
    cv.add_argument("--json", action="store_true")
    cv.set_defaults(func=cmd_crossval)

    s = sub.add_parser("smss", help="supervised matrix similarity score of a landmark set")
    kernel_args(s)
    s.add_argument("--landmarks", required=True)
    s.set_defaults(func=cmd_smss)

    ex = sub.add_parser("extend", help="approximate kernel rows of test points")
    kernel_args(ex)
    ex.add_argument("--landmarks", required=True)
    ex.add_argument("--rows", required=True, help="test kernel values against the landmarks")
    ex.add_argument("--out", default=None)
    ex.set_defaults(func=cmd_extend)

    b = sub.add_parser("bench-scaling", help="training time against N")
    b.add_argument("--classifier", choices=CLASSIFIERS, default="ny-ikfd")
    b.add_argument("--sizes", default="1000,2000,4000,8000")
    b.add_argument("--m", type=int, default=64)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
