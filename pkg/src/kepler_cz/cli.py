"""``kepler-cz`` command-line front end.

Every command emits ``{command, config, rows, diagnostics}`` as JSON, or the
rows as CSV.  Exit codes: 0 success, 1 usage, 2 domain precondition,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .catalog import FamilyId, OrbitRecord, circular_energies, circular_period, collision_period
from .core import IntegratorConfig, PhasePoint
from .errors import DomainError, KeplerCZError, NonGenericEnergyError, VerificationFailure
from .index import CrossingSettings, closed_form_index, indexed_catalog, rs_family
from .ledger import compare_with_reference
from .moduli import (
    a3_morse_data,
    a3_value,
    bifurcation_schedule,
    classify_point,
    l3_morse_data,
    l3_value,
    level_set_sample,
    moduli_point,
)
from .numeric_index import numeric_cz
from .verification import SUITES, run_suite

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_VERIFY = 0, 1, 2, 3

ORBIT_KINDS = ("retrograde", "direct", "collision+", "collision-")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str = ""
    jacobi: float | None = None
    covers: int = 3
    kmax: int = 11
    cap: int = 10
    rtol: float = 1e-10
    atol: float = 1e-10
    seed: int = 0
    format: str = "json"
    output: str | None = None
    orbit: str | None = None
    cover: int = 1
    family: str | None = None
    numeric: bool = False
    suite: str | None = None
    energy: float | None = None
    state: list[float] | None = None
    level: float | None = None
    samples: int = 10
    extra: dict = field(default_factory=dict)

    def validate(self):
        for name in ("covers", "kmax", "cover", "samples"):
            if getattr(self, name) < 1:
                raise UsageError(f"--{name} must be at least 1")
        if self.cap < 0:
            raise UsageError("--cap must be non-negative")
        if not (self.rtol > 0 and self.atol > 0):
            raise UsageError("tolerances must be positive")
        if self.format not in ("json", "csv"):
            raise UsageError("--format must be json or csv")

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(rtol=self.rtol, atol=self.atol)

    def to_dict(self):
        d = asdict(self)
        d.pop("extra")
        d.pop("output")
        return d


def threads() -> int:
    raw = os.environ.get("KEPLER_CZ_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def parse_family(text: str) -> tuple[int, int]:
    try:
        k, l = (int(s) for s in text.replace(" ", "").split(","))  # noqa: E741
    except ValueError:
        raise UsageError(f"family must be 'k,l', got {text!r}") from None
    if k < 1 or l < 1 or math.gcd(k, l) != 1:
        raise UsageError(f"family ({k},{l}) must be coprime positive integers")
    return k, l


def _fmt_float(x):
    return "%.17g" % x


# ---------------------------------------------------------------------------
# commands


def _require_jacobi(cfg):
    if cfg.jacobi is None:
        raise UsageError("--jacobi is required for this command")
    return cfg.jacobi


def _l3_sign(rec: OrbitRecord) -> str:
    return {"retrograde": "+", "direct": "-", "collision+": "0", "collision-": "0"}.get(rec.kind, "mixed")


def _catalog_row(rec: OrbitRecord) -> dict:
    return {
        "kind": rec.kind,
        "k": rec.family.k if rec.family else None,
        "l": rec.family.l if rec.family else None,
        "N": rec.cover,
        "E": rec.E,
        "period": rec.total_period,
        "index": str(rec.index),
        "L3_sign": _l3_sign(rec),
    }


def cmd_catalog(cfg: RunConfig):
    c = _require_jacobi(cfg)
    recs = indexed_catalog(c, cfg.covers, cfg.kmax)
    rows = [_catalog_row(r) for r in recs]
    diags = []
    if cfg.numeric:
        isolated = [(i, r) for i, r in enumerate(recs) if r.kind != "family"]
        icfg = cfg.integrator()
        with ThreadPoolExecutor(max_workers=threads()) as pool:
            results = list(pool.map(lambda ir: numeric_cz(ir[1], icfg), isolated))
        bad = []
        for (i, rec), got in zip(isolated, results):
            rows[i]["numeric_index"] = str(got.value)
            if got.value != rec.index:
                bad.append(rec.label)
        if bad:
            diags.append({"numeric_disagreement": bad})
            return rows, diags, EXIT_VERIFY
    return rows, diags, EXIT_OK


def _orbit_record(cfg: RunConfig) -> OrbitRecord:
    sel = cfg.orbit
    if cfg.family is not None:
        sel = f"family {cfg.family}"
    if sel is None:
        raise UsageError("choose an orbit with --orbit or --family")
    sel = sel.strip()
    if sel.startswith("family"):
        k, l = parse_family(sel[len("family") :].strip())  # noqa: E741
        fam = FamilyId(k, l)
        c = cfg.jacobi if cfg.jacobi is not None else math.nan
        return OrbitRecord("family", fam.energy, c, 2 * math.pi * l, 1, fam)
    if sel not in ORBIT_KINDS:
        raise UsageError(f"unknown orbit {sel!r}; use one of {', '.join(ORBIT_KINDS)} or 'family k,l'")
    if sel.startswith("collision"):
        c = cfg.jacobi
        if c is None:
            if cfg.numeric:
                raise UsageError("--numeric needs --jacobi")
            return OrbitRecord(sel, math.nan, math.nan, math.nan, cfg.cover)
        if not c < 0:
            raise DomainError("collision orbits need c < 0")
        return OrbitRecord(sel, c, c, collision_period(c), cfg.cover)
    c = _require_jacobi(cfg)
    if not c < -1.5:
        raise DomainError("circular orbits are catalogued below the critical energy -3/2")
    roots = circular_energies(c)
    E = roots.retrograde if sel == "retrograde" else roots.direct
    sign = "+" if sel == "retrograde" else "-"
    return OrbitRecord(sel, E, c, circular_period(E, sign), cfg.cover)


def cmd_index(cfg: RunConfig):
    rec = _orbit_record(cfg)
    closed = rs_family(rec.family.k, rec.family.l) if rec.family else closed_form_index(rec)
    row = {"orbit": rec.label, "kind": rec.kind, "N": rec.cover, "closed_form": str(closed)}
    diags = []
    code = EXIT_OK
    if cfg.numeric:
        if rec.kind == "family":
            raise UsageError("--numeric is available for isolated orbits only")
        got = numeric_cz(rec, cfg.integrator(), CrossingSettings())
        row["numeric"] = str(got.value)
        row["agree"] = got.value == closed
        diags.extend(got.audit())
        if not row["agree"]:
            code = EXIT_VERIFY
    return [row], diags, code


def cmd_moduli(cfg: RunConfig):
    rows = []
    if cfg.state is not None:
        if len(cfg.state) != 6:
            raise UsageError("--state takes q1,q2,q3,p1,p2,p3")
        E, sp = moduli_point(PhasePoint.from_array(cfg.state))
        tags = classify_point(sp)
        rows.append(
            {
                "E": E,
                "x": sp.x.tolist(),
                "y": sp.y.tolist(),
                "L3": l3_value(E, sp),
                "A3": a3_value(sp),
                "tags": list(tags),
            }
        )
        return rows, [], EXIT_OK
    if cfg.energy is None:
        raise UsageError("--energy is required (with --level, --state, or alone for critical points)")
    E = cfg.energy
    if cfg.level is not None:
        for sp in level_set_sample(E, cfg.level, cfg.samples, cfg.seed):
            rows.append({"x": sp.x.tolist(), "y": sp.y.tolist(), "L3": l3_value(E, sp)})
        return rows, [], EXIT_OK
    diags = []
    for fn_name, data in (("L3", l3_morse_data(E)), ("A3", a3_morse_data(E))):
        for cp in data:
            rows.append(
                {
                    "function": fn_name,
                    "point": cp.name,
                    "value": cp.value,
                    "index": cp.index,
                    "hessian_index": cp.hessian_index,
                }
            )
            if not cp.consistent:
                diags.append({"inconsistent_morse_index": [fn_name, cp.name]})
    return rows, diags, EXIT_VERIFY if diags else EXIT_OK


def cmd_bifurcation(cfg: RunConfig):
    if cfg.family is not None:
        fams = [parse_family(cfg.family)]
    else:
        fams = [(k, l) for k in range(2, cfg.kmax + 1) for l in range(1, k) if math.gcd(k, l) == 1]  # noqa: E741
    rows = []
    for k, l in fams:  # noqa: E741
        ev = bifurcation_schedule(k, l)
        rows.append(
            {
                "k": ev.family.k,
                "l": ev.family.l,
                "c_minus": ev.c_minus,
                "birth": f"direct^{ev.birth_cover}",
                "c_plus": ev.c_plus,
                "death": f"retrograde^{ev.death_cover}",
            }
        )
    rows.sort(key=lambda r: (r["c_minus"], r["k"], r["l"]))
    return rows, [], EXIT_OK


def cmd_ledger(cfg: RunConfig):
    c = _require_jacobi(cfg)
    rep = compare_with_reference(c, cfg.cap, cfg.extra.get("covers_explicit"), cfg.extra.get("kmax_explicit"))
    rows = [r.to_dict() for r in rep.rows]
    diags = [{"verified_up_to": rep.verified_up_to, "all_match": rep.all_match}]
    diags.append({"generators": [e.to_dict() for e in rep.entries]})
    if rep.unverified:
        diags.append({"unverified_degrees": [r.degree for r in rep.unverified]})
    return rows, diags, EXIT_VERIFY if rep.mismatches else EXIT_OK


def cmd_verify(cfg: RunConfig):
    if cfg.suite is None:
        raise UsageError("--suite is required")
    names = sorted(SUITES) if cfg.suite == "all" else [cfg.suite]
    for n in names:
        if n not in SUITES:
            raise UsageError(f"unknown suite {n!r}; choose from {', '.join(sorted(SUITES))} or all")
    rows, diags = [], []
    code = EXIT_OK
    for n in names:
        res = run_suite(n, cfg.seed)
        for p in res.properties:
            rows.append({"suite": n, "property": p.name, "passed": p.passed, "worst": p.worst, "tolerance": p.tolerance})
        if not res.passed:
            code = EXIT_VERIFY
            diags.append({"suite": n, "first_counterexample": res.first_failure.to_dict()})
    return rows, diags, code


COMMANDS = {
    "catalog": cmd_catalog,
    "index": cmd_index,
    "moduli": cmd_moduli,
    "bifurcation": cmd_bifurcation,
    "ledger": cmd_ledger,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------------------
# output


def _csv_cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_float(v + 0.0)  # no "-0"
    if v is None:
        return ""
    if isinstance(v, (list, tuple)):
        return ";".join(_csv_cell(x) for x in v)
    return str(v)


def render(cfg: RunConfig, rows, diags) -> str:
    if cfg.format == "csv":
        buf = io.StringIO()
        header = []
        for r in rows:
            for key in r:
                if key not in header:
                    header.append(key)
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_csv_cell(r.get(h)) for h in header])
        return buf.getvalue()
    doc = {"command": cfg.command, "config": cfg.to_dict(), "rows": rows, "diagnostics": diags}
    return json.dumps(doc, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    try:
        return [float(s) for s in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--output", "-o", default=None, help="write to a file instead of stdout")
    common.add_argument("--config", default=None, help="JSON file with config keys")
    common.add_argument("--rtol", type=float, default=None)
    common.add_argument("--atol", type=float, default=None)
    common.add_argument("--seed", type=int, default=None)

    p = _Parser(prog="kepler-cz", description="Periodic orbits and indices of the rotating Kepler problem.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("catalog", parents=[common], help="orbit catalog at a Jacobi energy")
    s.add_argument("--jacobi", "-c", type=float)
    s.add_argument("--covers", type=int)
    s.add_argument("--kmax", type=int)
    s.add_argument("--numeric", action="store_true", default=None, help="also compute isolated indices numerically")

    s = sub.add_parser("index", parents=[common], help="index of one orbit")
    s.add_argument("--jacobi", "-c", type=float)
    s.add_argument("--orbit", help="retrograde | direct | collision+ | collision- | 'family k,l'")
    s.add_argument("--family", help="k,l")
    s.add_argument("--cover", type=int)
    s.add_argument("--numeric", action="store_true", default=None)

    s = sub.add_parser("moduli", parents=[common], help="moduli points, level sets, critical points")
    s.add_argument("--energy", "-E", type=float)
    s.add_argument("--state", type=_floats, help="q1,q2,q3,p1,p2,p3")
    s.add_argument("--level", type=float, help="L3 value of the level set to sample")
    s.add_argument("--samples", type=int)

    s = sub.add_parser("bifurcation", parents=[common], help="birth/death energies of families")
    s.add_argument("--family", help="k,l")
    s.add_argument("--kmax", type=int)

    s = sub.add_parser("ledger", parents=[common], help="generator counts against the reference ranks")
    s.add_argument("--jacobi", "-c", type=float)
    s.add_argument("--cap", type=int)
    s.add_argument("--covers", type=int)
    s.add_argument("--kmax", type=int)

    s = sub.add_parser("verify", parents=[common], help="run a property suite")
    s.add_argument("--suite", help=f"{' | '.join(sorted(SUITES))} | all")
    return p


def make_config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    known = {f.name for f in fields(RunConfig)} - {"extra", "command"}
    if getattr(ns, "config", None):
        try:
            with open(ns.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
        data = data.get("config", data)
        for key, value in data.items():
            if key in known:
                setattr(cfg, key, value)
    for key, value in vars(ns).items():
        if key in known and value is not None:
            setattr(cfg, key, value)
    if ns.command == "ledger":
        cfg.extra["covers_explicit"] = getattr(ns, "covers", None)
        cfg.extra["kmax_explicit"] = getattr(ns, "kmax", None)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        cfg = make_config(ns)
        rows, diags, code = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"kepler-cz: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonGenericEnergyError as exc:
        print(f"kepler-cz: {exc}", file=sys.stderr)
        if exc.offenders:
            print("offenders: " + " ".join(str(f) for f in exc.offenders), file=sys.stderr)
        return EXIT_DOMAIN
    except DomainError as exc:
        print(f"kepler-cz: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except VerificationFailure as exc:
        print(f"kepler-cz: verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except KeplerCZError as exc:
        print(f"kepler-cz: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    text = render(cfg, rows, diags)
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code == EXIT_VERIFY and diags:
        print(json.dumps(diags[-1], default=_json_default), file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
