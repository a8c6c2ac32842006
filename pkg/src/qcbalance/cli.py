"""Command-line front-end.

Exit status: 0 on success, 1 on input errors, 2 when a run completes but a
balance or second-principle check fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ledger, measures, protocols
from .linalg import LinalgError
from .qstate import (
    LabeledState,
    Role,
    UnsupportedConfigurationError,
    basis_state,
    marginal,
    maximally_mixed,
    random_pure_state,
    singlet,
    two_qubit_layout,
    werner,
)

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION = 0, 1, 2
FORMATS = ("table", "json", "csv")


class InputError(Exception):
    pass


# ---------------------------------------------------------------- scenario schema

_SCHEMAS: dict[str, dict[str, tuple[type, object]]] = {
    "teleport": {
        "theta": (float, 0.0),
        "phi": (float, 0.0),
        "environment": (bool, True),
        "subspace_dim": (int, 2),
        "epsilon": (float, ledger.DEFAULT_EPSILON),
        "trials": (int, ledger.DEFAULT_TRIALS),
        "annotate_split": (bool, False),
    },
    "send": {
        "mode": (str, "unentangled"),
        "annotate_split": (bool, False),
    },
    "bbpssw": {
        "fidelity": (float, 0.8),
        "rounds": (int, 1),
    },
    "distill_report": {
        "fidelity": (float, 0.8),
        "rounds": (int, 8),
        "w_p": (float, None),
    },
    "measures": {
        "state": (str, "werner"),
        "fidelity": (float, 0.8),
    },
    "balance_sweep": {
        "count": (int, 500),
        "max_per_side": (int, 4),
    },
    "sweep": {
        "target": (str, "bbpssw"),
        "param": (str, "fidelity"),
        "grid": (list, []),
        "rounds": (int, 1),
    },
}

_SWEEPABLE = {"bbpssw": ("fidelity", "rounds"), "distill_report": ("fidelity", "rounds")}


@dataclass
class ScenarioSpec:
    protocol: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    output: str = "table"

    def validated(self) -> "ScenarioSpec":
        if self.protocol not in _SCHEMAS:
            raise InputError(f"unknown protocol {self.protocol!r}")
        if self.output not in FORMATS:
            raise InputError(f"unknown output format {self.output!r}")
        schema = _SCHEMAS[self.protocol]
        unknown = sorted(set(self.params) - set(schema))
        if unknown:
            raise InputError(f"unknown parameter(s) for {self.protocol}: {', '.join(unknown)}")
        params = {}
        for key, (kind, default) in schema.items():
            value = self.params.get(key, default)
            if value is not None:
                value = _coerce(key, value, kind)
            params[key] = value
        return ScenarioSpec(self.protocol, params, int(self.seed), self.output)


def _coerce(key, value, kind):
    try:
        if kind is bool:
            if isinstance(value, str):
                if value.lower() in ("true", "1", "yes"):
                    return True
                if value.lower() in ("false", "0", "no"):
                    return False
                raise ValueError(value)
            return bool(value)
        if kind is list:
            return [float(v) for v in value]
        if kind is int and isinstance(value, float) and not value.is_integer():
            raise ValueError(value)
        return kind(value)
    except (TypeError, ValueError):
        raise InputError(f"parameter {key!r} expects {kind.__name__}, got {value!r}") from None


def load_scenario(path: str) -> ScenarioSpec:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read scenario {path}: {exc}") from None
    if not isinstance(data, dict) or "protocol" not in data:
        raise InputError("scenario must be a JSON object with a 'protocol' field")
    extra = set(data) - {"protocol", "params", "seed", "output"}
    if extra:
        raise InputError(f"unknown scenario field(s): {', '.join(sorted(extra))}")
    protocol = {"distill": "distill_report"}.get(data["protocol"], data["protocol"])
    return ScenarioSpec(protocol, data.get("params", {}), data.get("seed", 0), data.get("output", "table"))


# ---------------------------------------------------------------- formatting

def fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return str(x).lower() if isinstance(x, bool) else ""
    if isinstance(x, (float, np.floating)):
        s = f"{float(x):.12g}"
        return "0" if s == "-0" else s
    return str(x)


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        v = float(f"{float(x):.12g}")
        return 0.0 if v == 0 else v
    if isinstance(x, np.integer):
        return int(x)
    return x


@dataclass
class Report:
    title: str
    rows: list[dict]
    ok: bool = True
    notes: list[str] = field(default_factory=list)
    single: bool = False

    def render(self, output: str) -> str:
        if output == "json":
            body = self.rows[0] if self.single else self.rows
            return json.dumps(_clean(body), indent=2) + "\n"
        if output == "csv":
            return to_csv(self.rows, self._columns())
        return self._table()

    def _columns(self) -> list[str]:
        cols: list[str] = []
        for row in self.rows:
            for k in row:
                if k not in cols:
                    cols.append(k)
        return cols

    def _table(self) -> str:
        out = [self.title]
        if self.single and self.rows:
            width = max(len(k) for k in self.rows[0])
            out += [f"  {k.ljust(width)}  {fmt(v)}" for k, v in self.rows[0].items()]
        elif self.rows:
            cols = self._columns()
            cells = [[fmt(r.get(c)) for c in cols] for r in self.rows]
            widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
            out.append("  " + "  ".join(c.rjust(w) for c, w in zip(cols, widths)))
            out += ["  " + "  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
        out += self.notes
        return "\n".join(out) + "\n"


def to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _bar(value: float, scale: float = 20.0) -> str:
    return "#" * int(round(max(0.0, value) * scale))


# ---------------------------------------------------------------- runners

def _ledger_report(t, led: ledger.BalanceLedger, annotate: bool) -> Report:
    row = led.as_dict()
    if annotate:
        roles = [t.initial.layout.qubit(label).role for st in t.transmissions for label in st.labels]
        row["w_p_s_role"] = float(sum(r is Role.S for r in roles))
        row["w_p_m_role"] = float(sum(r is Role.M for r in roles))
    notes = [
        f"balance: (E_in={fmt(led.e_in)}) + (W_p={fmt(led.w_p)}) = "
        f"(E_out={fmt(led.e_out)}) + (W_l={fmt(led.w_l)})   residual {fmt(led.residual)}"
    ]
    if not led.balance_ok:
        notes.append("VIOLATION: information balance does not close")
    if not led.second_principle_ok:
        notes.append("VIOLATION: entanglement grew by more than the qubits sent")
    if not led.conservation_ok:
        notes.append("VIOLATION: I_A + I_B + 2E changed under local operations")
    return Report(led.protocol, [row], ok=led.ok, notes=notes, single=True)


def run_teleport(p: dict, seed: int) -> Report:
    theta, phi = p["theta"], p["phi"]
    psi = np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])
    t = protocols.teleport(psi, environment=p["environment"])
    led = ledger.check_balance(
        t, trials=p["trials"], epsilon=p["epsilon"], seed=seed, subspace_dim=p["subspace_dim"]
    )
    rep = _ledger_report(t, led, p["annotate_split"])
    out = marginal(t.final, ["S_B"]).density
    rep.rows[0]["output_fidelity"] = float(np.vdot(psi, out @ psi).real)
    return rep


def run_send(p: dict, seed: int) -> Report:
    t = protocols.send_qubit(p["mode"])
    return _ledger_report(t, ledger.check_balance(t, seed=seed), p["annotate_split"])


def run_bbpssw(p: dict, seed: int) -> Report:
    f, rounds = p["fidelity"], p["rounds"]
    traj = protocols.bbpssw_iterate(f, rounds)
    rows = [
        {"round": r.round, "fidelity": r.fidelity, "p_keep": r.p_keep, "yield": r.surviving_fraction}
        for r in traj
    ]
    # closed-system check of the first round
    led = ledger.check_balance(protocols.bbpssw_step(werner(f)).transcript)
    notes = [f"round-1 closed-system balance residual {fmt(led.residual)}"]
    if not led.ok:
        notes.append("VIOLATION: recurrence round does not balance")
    return Report(f"bbpssw F0={fmt(f)}", rows, ok=led.ok, notes=notes)


def run_distill(p: dict, seed: int) -> Report:
    rho = werner(p["fidelity"])
    rep = protocols.distillation_report(rho, max_rounds=p["rounds"], w_p=p["w_p"])
    row = rep.as_dict()
    notes = [
        "E_D and E_bound are estimates (recurrence then hashing), not exact values",
        f"  in : E_F   {_bar(rep.e_f):<22}{fmt(rep.e_f)}",
        f"       Delta {_bar(rep.delta):<22}{fmt(rep.delta)}",
        f"       W_p   {_bar(rep.w_p):<22}{fmt(rep.w_p)}",
        f"  out: E_D   {_bar(rep.e_d):<22}{fmt(rep.e_d)}",
        f"       Delta {_bar(rep.delta):<22}{fmt(rep.delta)}",
        f"       E_bnd {_bar(rep.e_bound):<22}{fmt(rep.e_bound)}",
    ]
    return Report(f"distillation ledger (shape {rep.shape})", [row], notes=notes, single=True)


def _named_state(name: str, f: float, seed: int) -> LabeledState:
    lay = two_qubit_layout()
    if name == "werner":
        return werner(f, lay)
    if name == "singlet":
        return singlet(lay)
    if name == "product":
        return basis_state(lay)
    if name == "mixed":
        return maximally_mixed(lay)
    if name == "random_pure":
        return random_pure_state(2, seed=seed, layout=lay)
    raise InputError(f"unknown state {name!r}")


def run_measures(p: dict, seed: int) -> Report:
    s = _named_state(p["state"], p["fidelity"], seed)
    rec = measures.gibbs_helmholtz(s)
    row = rec.as_dict()
    row["concurrence"] = measures.concurrence(s)
    row["negativity"] = measures.negativity(s)
    row["ppt"] = measures.is_ppt(s)
    notes = [
        "E_D is a bracket [lower, upper]; E_bound follows by subtraction",
        f"  E_F        {_bar(rec.e_f):<22}{fmt(rec.e_f)}",
        f"  E_D   low  {_bar(rec.e_d_lower):<22}{fmt(rec.e_d_lower)}",
        f"        up   {_bar(rec.e_d_upper):<22}{fmt(rec.e_d_upper)}",
        f"  E_bnd low  {_bar(rec.e_bound_lower):<22}{fmt(rec.e_bound_lower)}",
        f"        up   {_bar(rec.e_bound_upper):<22}{fmt(rec.e_bound_upper)}",
    ]
    return Report(f"gibbs-helmholtz record ({p['state']})", [row], notes=notes, single=True)


def run_balance_sweep(p: dict, seed: int) -> Report:
    worst, worst_gap, ok = 0.0, -math.inf, True
    for k in range(p["count"]):
        led = ledger.check_balance(protocols.random_transcript(seed + k, p["max_per_side"]))
        worst = max(worst, abs(led.residual))
        worst_gap = max(worst_gap, led.e_out - led.e_in - led.w_p)
        ok &= led.ok
    row = {"transcripts": p["count"], "max_abs_residual": worst, "max_entanglement_gain_minus_w_p": worst_gap, "ok": ok}
    return Report("random transcript balance sweep", [row], ok=ok, single=True)


def sweep(target: str, param: str, grid, rounds: int = 1) -> list[dict]:
    """One row per grid point, in grid order."""
    if target not in _SWEEPABLE:
        raise InputError(f"cannot sweep protocol {target!r}")
    if param not in _SWEEPABLE[target]:
        raise InputError(f"{param!r} is not a numeric parameter of {target}")
    rows = []
    for x in grid:
        f = float(x) if param == "fidelity" else 0.8
        n = int(x) if param == "rounds" else rounds
        if target == "bbpssw":
            last = protocols.bbpssw_iterate(f, n)[-1]
            rows.append({
                "fidelity": f, "rounds": n, "fidelity_out": last.fidelity,
                "p_keep": last.p_keep, "yield": last.surviving_fraction,
            })
        else:
            rho = werner(f)
            rec = measures.gibbs_helmholtz(rho, max_rounds=n)
            rep = protocols.distillation_report(rho, max_rounds=n)
            rows.append({
                "fidelity": f, "rounds": n, "e_f": rec.e_f,
                "e_d_lower": rec.e_d_lower, "e_d_upper": rec.e_d_upper,
                "e_bound_lower": rec.e_bound_lower, "e_bound_upper": rec.e_bound_upper,
                "e_d_estimate": rep.e_d, "e_bound_estimate": rep.e_bound,
            })
    return rows


_SWEEP_COLUMNS = {
    "bbpssw": ["fidelity", "rounds", "fidelity_out", "p_keep", "yield"],
    "distill_report": [
        "fidelity", "rounds", "e_f", "e_d_lower", "e_d_upper",
        "e_bound_lower", "e_bound_upper", "e_d_estimate", "e_bound_estimate",
    ],
}


def run_sweep(p: dict, seed: int) -> Report:
    target = {"distill": "distill_report"}.get(p["target"], p["target"])
    rows = sweep(target, p["param"], p["grid"], p["rounds"])
    rep = Report(f"sweep {target} over {p['param']}", rows)
    rep.columns = _SWEEP_COLUMNS[target]
    return rep


RUNNERS = {
    "teleport": run_teleport,
    "send": run_send,
    "bbpssw": run_bbpssw,
    "distill_report": run_distill,
    "measures": run_measures,
    "balance_sweep": run_balance_sweep,
    "sweep": run_sweep,
}


def run(spec: ScenarioSpec, out=None) -> int:
    """Execute a scenario and write its report; returns the exit status."""
    out = out or sys.stdout
    spec = spec.validated()
    rep = RUNNERS[spec.protocol](spec.params, spec.seed)
    if spec.protocol == "sweep" and spec.output != "json":
        out.write(to_csv(rep.rows, rep.columns))
    else:
        out.write(rep.render(spec.output))
    return EXIT_OK if rep.ok else EXIT_VIOLATION


# ---------------------------------------------------------------- argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def parse_grid(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        try:
            start, stop, step = (float(x) for x in text.split(":"))
        except ValueError:
            raise InputError(f"bad grid {text!r}; use start:stop:step") from None
        if step <= 0:
            raise InputError("grid step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(max(n, 0))]
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad grid {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS)
    common.add_argument("--scenario", default=argparse.SUPPRESS, help="JSON scenario file")

    parser = _Parser(prog="qcbalance", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("teleport", parents=[common], help="teleportation balance")
    p.add_argument("--theta", type=float)
    p.add_argument("--phi", type=float)
    p.add_argument("--no-environment", dest="environment", action="store_false", default=None)
    p.add_argument("--subspace-dim", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--annotate-split", action="store_true", default=None)

    p = sub.add_parser("send", parents=[common], help="send one qubit")
    p.add_argument("--mode", choices=("unentangled", "entangled_half"))
    p.add_argument("--annotate-split", action="store_true", default=None)

    p = sub.add_parser("bbpssw", parents=[common], help="recurrence trajectory")
    p.add_argument("--fidelity", type=float)
    p.add_argument("--rounds", type=int)

    p = sub.add_parser("distill", parents=[common], help="distillation ledger")
    p.add_argument("--fidelity", type=float)
    p.add_argument("--rounds", type=int)
    p.add_argument("--w-p", dest="w_p", type=float)

    p = sub.add_parser("measures", parents=[common], help="entanglement measures")
    p.add_argument("--state", choices=("werner", "singlet", "product", "mixed", "random_pure"))
    p.add_argument("--fidelity", type=float)

    p = sub.add_parser("sweep", parents=[common], help="CSV sweep over a numeric parameter")
    p.add_argument("target", choices=("bbpssw", "distill_report", "distill"))
    p.add_argument("--param", required=True)
    p.add_argument("--grid", default="", help="start:stop:step or comma-separated values")
    p.add_argument("--rounds", type=int)
    return parser


_COMMANDS = {"distill": "distill_report"}
_NOT_PARAMS = {"command", "seed", "format", "scenario"}


def spec_from_args(ns: argparse.Namespace) -> ScenarioSpec:
    if getattr(ns, "scenario", None):
        spec = load_scenario(ns.scenario)
        if hasattr(ns, "seed"):
            spec.seed = ns.seed
        if hasattr(ns, "format"):
            spec.output = ns.format
        return spec
    if not ns.command:
        raise InputError("a subcommand or --scenario is required")
    params = {k: v for k, v in vars(ns).items() if k not in _NOT_PARAMS and v is not None}
    protocol = _COMMANDS.get(ns.command, ns.command)
    if protocol == "sweep":
        params["grid"] = parse_grid(params.get("grid", ""))
    return ScenarioSpec(protocol, params, getattr(ns, "seed", 0), getattr(ns, "format", "table"))


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return run(spec_from_args(ns))
    except (InputError, LinalgError, UnsupportedConfigurationError, ValueError, KeyError) as exc:
        print(f"qcbalance: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
