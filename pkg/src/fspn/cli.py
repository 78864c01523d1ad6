"""Command-line entry point: ``fspn <subcommand> ...``.

Results go to stdout (or ``--out``), diagnostics to stderr, and every run
writes a JSON manifest (``--manifest``, default ``<out>.manifest.json`` or
``fspn-<subcommand>.manifest.json``). Exit status: 0 success, 1 usage error,
2 data or model error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field

from . import __version__
from .compile import BayesNetError, bn_to_fspn, load_bn
from .data_io import DataError, SyntheticSpec, generate_synthetic, load_benchmark, load_csv, save_csv, \
    synthetic_true_joint
from .evalharness import avg_rdc_score, empirical_joint, kl_divergence, scaling_benchmark
from .inference import InferenceError, infer_evidence, infer_marginal, log_likelihood
from .learning import LearnConfig, learn_fspn
from .model import ModelError, load, save, stats, validate
from .query import QueryError, parse_queries

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

class UsageError(Exception):
    pass

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)

def num(x: float) -> str:
    return f"{x:.12g}"

@dataclass
class RunManifest:
    subcommand: str
    argv: list[str]
    config: dict | None = None
    seed: int | None = None
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    seconds: float = 0.0
    status: int = EXIT_OK
    version: str = __version__
    python: str = platform.python_version()

    def add_input(self, path: str) -> None:
        h = hashlib.sha256()
        if os.path.isdir(path):
            for name in sorted(os.listdir(path)):
                full = os.path.join(path, name)
                if os.path.isfile(full):
                    with open(full, "rb") as f:
                        h.update(name.encode() + b"\0" + f.read())
        else:
            with open(path, "rb") as f:
                h.update(f.read())
        self.inputs[path] = "sha256:" + h.hexdigest()

def _config(args, manifest: RunManifest) -> LearnConfig:
    cfg = LearnConfig()
    if getattr(args, "config", None):
        manifest.add_input(args.config)
        with open(args.config, encoding="utf-8") as f:
            cfg = LearnConfig.from_text(f.read())
    if getattr(args, "seed", None) is not None:
        cfg = cfg.replace(seed=args.seed)
    manifest.config = cfg.to_dict()
    manifest.seed = cfg.seed
    return cfg

def _load_model(path, manifest: RunManifest, check: bool = True):
    manifest.add_input(path)
    return load(path, check)

def _load_data(path, manifest: RunManifest, like=None):
    manifest.add_input(path)
    return load_csv(path, like=like)

class _Output:
    """stdout, or a file when ``--out`` is given."""

    def __init__(self, path, manifest):
        self.path = path
        self.manifest = manifest

    def __enter__(self):
        if self.path:
            self.f = open(self.path, "w", encoding="utf-8")
            self.manifest.outputs.append(self.path)
            return self.f
        return sys.stdout

    def __exit__(self, *exc):
        if self.path:
            self.f.close()

# -- subcommands ---------------------------------------------------------------

def cmd_learn(args, manifest):
    cfg = _config(args, manifest)
    data = _load_data(args.data, manifest)
    model = learn_fspn(data, cfg)
    save(model, args.out)
    manifest.outputs.append(args.out)
    s = stats(model)
    print(f"learned {s.n_nodes} nodes ({s.n_factorize} factorize, {s.n_multileaf} multi-leaf) -> {args.out}",
          file=sys.stderr)

def cmd_infer(args, manifest):
    model = _load_model(args.model, manifest)
    if os.path.exists(args.query):
        manifest.add_input(args.query)
        with open(args.query, encoding="utf-8") as f:
            text = f.read()
    else:
        text = args.query
    queries = parse_queries(text, model.variables)
    with _Output(args.out, manifest) as out:
        if args.format == "csv":
            out.write("query,probability\n")
        for i, q in enumerate(queries):
            p = infer_marginal(model, q.event) if q.evidence is None else infer_evidence(model, q.event, q.evidence)
            out.write(f"{i},{num(p)}\n" if args.format == "csv" else num(p) + "\n")

def cmd_eval_ll(args, manifest):
    if args.benchmark:
        if not args.name:
            raise UsageError("--benchmark needs --name")
        manifest.add_input(args.benchmark)
        train, valid, test = load_benchmark(args.benchmark, args.name)
        cfg = _config(args, manifest)
        t0 = time.perf_counter()
        model = learn_fspn(train, cfg)
        learn_s = time.perf_counter() - t0
        if args.save_model:
            save(model, args.save_model)
            manifest.outputs.append(args.save_model)
        rows = [("train", log_likelihood(model, train)[1]), ("valid", log_likelihood(model, valid)[1]),
                ("test", log_likelihood(model, test)[1])]
        with _Output(args.out, manifest) as out:
            if args.format == "csv":
                out.write("dataset,split,avg_ll,n_nodes,learn_seconds\n")
                for split, ll in rows:
                    out.write(f"{args.name},{split},{num(ll)},{stats(model).n_nodes},{num(learn_s)}\n")
            else:
                for split, ll in rows:
                    out.write(f"{split} {num(ll)}\n")
        return
    if not (args.model and args.data):
        raise UsageError("eval-ll needs --model and --data, or --benchmark and --name")
    model = _load_model(args.model, manifest)
    data = _load_data(args.data, manifest, like=model.variables)
    per_row, avg = log_likelihood(model, data)
    with _Output(args.out, manifest) as out:
        if args.format == "csv":
            out.write("row,log_likelihood\n")
            for i, x in enumerate(per_row):
                out.write(f"{i},{num(x)}\n")
            out.write(f"average,{num(avg)}\n")
        else:
            for x in per_row:
                out.write(num(x) + "\n")
            out.write(f"average {num(avg)}\n")

def cmd_eval_kl(args, manifest):
    model = _load_model(args.model, manifest)
    cfg = _config(args, manifest)
    if args.spec:
        manifest.add_input(args.spec)
        with open(args.spec, encoding="utf-8") as f:
            spec = SyntheticSpec.from_json(f.read())
        truth = synthetic_true_joint(spec)
        source = "synthetic"
        sample = generate_synthetic(spec)
    elif args.data:
        sample = _load_data(args.data, manifest, like=model.variables)
        truth = empirical_joint(sample)
        source = "empirical"
    else:
        raise UsageError("eval-kl needs --spec (synthetic truth) or --data (empirical truth)")
    kl = kl_divergence(truth, model)
    rdc_score = avg_rdc_score(sample, cfg) if sample.n_cols >= 2 else float("nan")
    with _Output(args.out, manifest) as out:
        if args.format == "csv":
            out.write("source,avg_rdc,kl,n_nodes\n")
            out.write(f"{source},{num(rdc_score)},{num(kl)},{stats(model).n_nodes}\n")
        else:
            out.write(f"kl {num(kl)}\navg_rdc {num(rdc_score)}\n")

def cmd_convert_bn(args, manifest):
    manifest.add_input(args.inp)
    model = bn_to_fspn(load_bn(args.inp))
    save(model, args.out)
    manifest.outputs.append(args.out)

def cmd_gen_data(args, manifest):
    if args.spec:
        manifest.add_input(args.spec)
        with open(args.spec, encoding="utf-8") as f:
            spec = SyntheticSpec.from_json(f.read())
    else:
        if args.rows is None or args.vars is None:
            raise UsageError("gen-data needs --spec or --rows and --vars")
        domains = [int(x) for x in args.domains.split(",")] if args.domains else [4] * args.vars
        if len(domains) == 1:
            domains = domains * args.vars
        groups = json.loads(args.groups) if args.groups else [list(range(args.vars))]
        spec = SyntheticSpec(args.rows, args.vars, domains, groups, args.noise, seed=args.seed or 0,
                             latent_card=args.latent_card)
    if args.seed is not None:
        spec.seed = args.seed
    manifest.seed = spec.seed
    save_csv(generate_synthetic(spec), args.out)
    with open(args.out + ".spec.json", "w", encoding="utf-8") as f:
        f.write(spec.to_json() + "\n")
    manifest.outputs += [args.out, args.out + ".spec.json"]

def cmd_validate(args, manifest):
    try:
        model = _load_model(args.model, manifest, check=False)
        problems = validate(model)
    except ModelError as e:
        problems = [str(e)]
    if problems:
        for p in problems:
            print(p)
        manifest.status = EXIT_DATA
        return EXIT_DATA
    print("ok")

def cmd_stats(args, manifest):
    s = asdict(stats(_load_model(args.model, manifest)))
    with _Output(args.out, manifest) as out:
        if args.format == "csv":
            out.write(",".join(s) + "\n" + ",".join(str(v) for v in s.values()) + "\n")
        else:
            for k, v in s.items():
                out.write(f"{k} {v}\n")

def cmd_bench(args, manifest):
    sizes = [int(x) for x in args.sizes.split(",")]
    seed = args.seed or 0
    manifest.seed = seed
    res = scaling_benchmark(sizes, args.events, seed)
    with _Output(args.out, manifest) as out:
        if args.format == "csv":
            out.write("n_nodes,median_ms\n")
            for n, t in res.rows():
                out.write(f"{n},{num(t * 1e3)}\n")
        else:
            for n, t in res.rows():
                out.write(f"{n} {num(t * 1e3)}\n")
    slope = "absent" if res.slope is None else f"{num(res.slope)} (r2 {num(res.r2)})"
    print(f"log-log slope {slope}", file=sys.stderr)

# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fspn", description="Factorize-sum-split-product networks")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(fn=fn)
        sp.add_argument("--manifest", help="where to write the run manifest")
        return sp

    sp = add("learn", cmd_learn, "learn a model from a CSV file")
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--config")
    sp.add_argument("--seed", type=int)

    sp = add("infer", cmd_infer, "answer range / evidence queries")
    sp.add_argument("--model", required=True)
    sp.add_argument("--query", required=True, help="query file, or query text if no such file exists")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("text", "csv"), default="text")

    sp = add("eval-ll", cmd_eval_ll, "average log-likelihood of a dataset or benchmark")
    sp.add_argument("--model")
    sp.add_argument("--data")
    sp.add_argument("--benchmark", help="directory holding <name>.{ts,valid,test}.data")
    sp.add_argument("--name")
    sp.add_argument("--config")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--save-model")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("text", "csv"), default="text")

    sp = add("eval-kl", cmd_eval_kl, "KL divergence from a true joint to a model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--spec", help="synthetic spec JSON: exact true joint")
    sp.add_argument("--data", help="CSV: empirical joint as truth")
    sp.add_argument("--config")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("text", "csv"), default="text")

    sp = add("convert-bn", cmd_convert_bn, "compile a Bayesian network text file")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--out", required=True)

    sp = add("gen-data", cmd_gen_data, "generate synthetic grouped data")
    sp.add_argument("--out", required=True)
    sp.add_argument("--spec")
    sp.add_argument("--rows", type=int)
    sp.add_argument("--vars", type=int)
    sp.add_argument("--domains", help="comma-separated cardinalities (one value = all)")
    sp.add_argument("--groups", help="JSON list of variable-index lists")
    sp.add_argument("--noise", type=float, default=0.1)
    sp.add_argument("--latent-card", type=int)
    sp.add_argument("--seed", type=int)

    sp = add("validate", cmd_validate, "check model invariants")
    sp.add_argument("--model", required=True)

    sp = add("stats", cmd_stats, "model size statistics")
    sp.add_argument("--model", required=True)
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("text", "csv"), default="text")

    sp = add("bench", cmd_bench, "inference latency vs. model size")
    sp.add_argument("--sizes", default="100,1000,10000")
    sp.add_argument("--events", type=int, default=100)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("text", "csv"), default="text")
    return p

def _manifest_path(args) -> str:
    if args.manifest:
        return args.manifest
    out = getattr(args, "out", None)
    return f"{out}.manifest.json" if out else f"fspn-{args.command}.manifest.json"

def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise UsageError("missing subcommand")
    except UsageError as e:
        print(f"fspn: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    manifest = RunManifest(args.command, argv)
    t0 = time.perf_counter()
    try:
        status = args.fn(args, manifest) or EXIT_OK
    except UsageError as e:
        print(f"fspn {args.command}: usage error: {e}", file=sys.stderr)
        status = EXIT_USAGE
    except (OSError, DataError, ModelError, InferenceError, QueryError, BayesNetError, ValueError) as e:
        print(f"fspn {args.command}: error: {e}", file=sys.stderr)
        status = EXIT_DATA
    manifest.seconds = time.perf_counter() - t0
    manifest.status = status
    try:
        with open(_manifest_path(args), "w", encoding="utf-8") as f:
            json.dump(asdict(manifest), f, indent=1, allow_nan=False, default=str)
            f.write("\n")
    except OSError as e:
        print(f"fspn: could not write manifest: {e}", file=sys.stderr)
    return status

if __name__ == "__main__":
    sys.exit(main())
