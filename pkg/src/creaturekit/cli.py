"""Command-line front end.

Every invocation prints one JSON RunReport:
``{"command": [...], "result": ..., "checks": {...}, "seed": n}``.
Exit codes: 0 success, 1 property or audit failure, 2 invalid input,
3 instance cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import audit, hall, measured, oracles, systems
from .core import Family, HSpec, dumps
from .creatures import FiniteCandidate, explicit_creature, fc_leq_witness, replay
from .errors import CapExceeded, CreatureKitError, InvalidInput, PropertyFailure


def jsonable(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else [x.numerator, x.denominator]
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (set, frozenset)):
        return [jsonable(v) for v in sorted(x)]
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "to_json"):
        return x.to_json()
    return x


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _load(args):
    if getattr(args, "input", None):
        try:
            text = Path(args.input).read_text()
        except OSError as exc:
            raise InvalidInput(f"cannot read {args.input}: {exc}") from None
    else:
        text = sys.stdin.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"input is not JSON: {exc}") from None


def _json_arg(raw: str):
    """A JSON literal, or the path of a file holding one."""
    p = Path(raw)
    if not raw.lstrip().startswith(("{", "[")) and p.exists():
        raw = p.read_text()
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"bad JSON argument: {exc}") from None


def _family(obj) -> Family:
    if not isinstance(obj, dict) or "sizes" not in obj:
        raise InvalidInput('family input needs "sizes" and "delta"')
    hspec = HSpec.from_json(obj)
    d = Family.from_json(obj, hspec)
    for f in d:
        f.validate(hspec)
    return d


class _Explicit:
    """Stand-in system for creatures given by their val relation."""

    kind = "EXPLICIT"
    really_finitary = False

    def __init__(self, hspec: HSpec):
        self.hspec = hspec


def _system(obj):
    if isinstance(obj, str):
        obj = _json_arg(obj)
    if isinstance(obj, dict) and obj.get("kind") == "EXPLICIT":
        return _Explicit(HSpec.from_json(obj))
    return systems.system_from_json(obj)


def _creature(system, obj):
    if isinstance(system, _Explicit):
        p = obj.get("payload", {})
        nor = p.get("nor", 0)
        nor = Fraction(*nor) if isinstance(nor, list) else nor
        return explicit_creature(system.hspec, obj["m_dn"], obj["m_up"], p["val"], nor)
    return systems.creature_from_json(system, obj)


def _candidate(system, obj) -> FiniteCandidate:
    if not isinstance(obj, dict) or "w" not in obj:
        raise InvalidInput('candidate JSON must look like {"w": [...], "creatures": [...]}')
    cs = tuple(_creature(system, c) for c in obj.get("creatures", []))
    return FiniteCandidate(tuple(system.hspec.check_sequence(obj["w"])), cs)


def _creature_json(t) -> dict:
    out = t.to_json()
    out["nor"] = t.nor
    out["pre_norm"] = jsonable(t.pre_norm)
    return out


# -- handlers: each returns (result, checks, ok) ----------------------------------


def cmd_norms(args, obj):
    d = _family(obj)
    checks = {}
    which = args.cmd
    if which == "hall":
        rep = hall.norm_report(d)
        result = rep.to_json()
        values = {"hn": rep.hn, "hn_plus": rep.hn_plus, "HN": rep.HN}
        checks["chain"] = 1 <= rep.hn <= rep.hn_plus <= rep.HN
    elif which == "hn":
        values = {"hn": hall.hn(d)}
        result = dict(values)
    else:
        v, sel = hall.hn_plus_matching(d)
        values = {"hn_plus": hall.hn_plus(d)}
        result = dict(values, selector=sel.to_json())
        checks["matching_route_agrees"] = v == values["hn_plus"]
    if args.oracle:
        brute = {"hn": oracles.hn_bruteforce, "hn_plus": oracles.hn_plus_bruteforce, "HN": oracles.HN_bruteforce}
        found = {k: brute[k](d) for k in values}
        checks["oracle"] = found
        checks["oracle_agrees"] = found == values
    return result, checks, all(v for k, v in checks.items() if isinstance(v, bool))


def cmd_pos(args, obj):
    system = _system(obj["system"])
    c = _candidate(system, obj)
    result = {"pos": sorted(list(v) for v in c.pos())}
    checks = {}
    if args.oracle:
        brute = oracles.pos_bruteforce(c.w, c.creatures)
        checks["oracle_agrees"] = brute == c.pos()
    return result, checks, all(checks.values())


def cmd_fc_validate(args, obj):
    system = _system(obj["system"])
    c = _candidate(system, obj)
    c.validate()
    return {"valid": True, "top": c.top, "pos_size": len(c.pos())}, {}, True


def cmd_fc_leq(args, obj):
    system = _system(obj["system"])
    c0 = _candidate(system, obj["c0"]).validate()
    c1 = _candidate(system, obj["c1"]).validate()
    res = fc_leq_witness(c0, c1, system, budget=obj.get("budget", 6))
    checks = {}
    if res.found:
        end = replay(c0, res.chain, system)
        checks["replay_reaches_c1"] = end == c1
        checks["POS_shrinks"] = c1.POS() <= c0.POS()
    return res.to_json(), checks, res.found and all(checks.values())


def cmd_nor(args, obj):
    system = _system(args.system if args.system else obj["system"])
    t = _creature(system, _json_arg(args.payload) if args.payload else obj["creature"])
    return _creature_json(t), {}, True


def cmd_link(args, obj):
    system = _system(obj["system"])
    t0, t1 = _creature(system, obj["t0"]), _creature(system, obj["t1"])
    k = obj.get("k", args.k)
    s = systems.link(system, t0, t1, k)
    checks = {"common_refinement": system.sigma_member(s, [t0]) and system.sigma_member(s, [t1])}
    return _creature_json(s), checks, all(checks.values())


def cmd_cut(args, obj):
    system = _system(obj["system"])
    t = _creature(system, obj["t"])
    res = systems.cut(t, obj["m"] if "m" in obj else args.m)
    out = res.to_json()
    out["s0"]["nor"], out["s1"]["nor"] = res.s0.nor, res.s1.nor
    return out, {"alpha": res.alpha, "beta": res.beta, "gamma": res.gamma}, res.ok


def cmd_escape(args, obj):
    system = _system(obj["system"])
    s, t = _creature(system, obj["s"]), _creature(system, obj["t"])
    v = systems.escape_value(s, t, obj.get("u", []))
    checks = {"in_t": t.accepts(v[: t.m_dn], v), "not_in_s": not s.accepts(v[: s.m_dn], v)}
    return {"v": list(v)}, checks, all(checks.values())


def cmd_dual(args, obj):
    base = _system(obj["system"])
    t_star = _creature(base, obj["t_star"])
    t = _creature(base, obj["t"])
    c = systems.dual_creature(t, t_star)
    result = {"defined": c is not systems.UNDEFINED}
    if c is not systems.UNDEFINED:
        result["creature"] = _creature_json(c)
    checks = {}
    if obj.get("additivity"):
        checks["additivity"] = systems.additivity_audit(t_star)
    return result, checks, all(v["ok"] for v in checks.values())


def cmd_mt_mu(args, obj):
    tree = measured.MeasuredTree.from_json(obj)
    mu = measured.mu_F(tree)
    checks = {}
    if args.oracle:
        checks["oracle_agrees"] = oracles.mu_F_fronts(tree) == mu
    return {"mu_F": jsonable(mu)}, checks, all(checks.values())


LEMMAS = {
    "mixcos": measured.check_subadditive,
    "cl11": measured.check_bonferroni,
    "mixlem": measured.check_compatibility,
}


def cmd_mt_check(args, obj):
    trees_json = obj.get("trees") if isinstance(obj, dict) else obj
    if not isinstance(trees_json, list) or not trees_json:
        raise InvalidInput('mt-check input must look like {"trees": [tree, ...]}')
    trees = [measured.MeasuredTree.from_json(t) for t in trees_json]
    rep = LEMMAS[args.lemma](trees)
    return jsonable(rep), {"holds": rep["ok"]}, rep["ok"]


def cmd_audit(args, obj):
    what = args.what
    if what == "edrf-hlinked":
        rep = systems.edrf_hlinked_audit(args.N)
        return jsonable(rep), {"ok": rep["ok"]}, rep["ok"]
    if what == "cohen":
        system = _system(args.system if args.system else obj["system"])
        rep = systems.cohen_audit(system, args.level)
        return jsonable(rep), {"ok": rep["ok"]}, rep["ok"]
    if what == "norming1":
        rep = audit.audit_norming1(audit.NormingSystem1.from_json(obj))
    elif what == "norming2":
        rep = audit.audit_norming2(audit.NormingSystem2.from_json(obj))
    else:
        ss = audit.SournessSystem.from_json(obj)
        rep = audit.audit_sourness(ss)
        if args.heuristic:
            window = obj.get("window") or {}
            E = {int(n): v for n, v in (window.get("E") or {}).items()}
            out = rep.to_json()
            out["heuristic"] = audit.heuristic_sourness_window(ss, window.get("k0", 0), E)
            return out, {"prefix_valid": rep.ok}, rep.ok
    return rep.to_json(), {"prefix_valid": rep.ok}, rep.ok


def cmd_gen(args, obj):
    ell = audit.ell_schedule(args.kmax)
    if args.sizes:
        sizes = tuple(int(x) for x in args.sizes.split(","))
    else:
        sizes = tuple(2 ** (k + 1) + 1 for k in range(args.kmax) for _ in range(ell[k], ell[k + 1]))
    ss = audit.gen_edrf_sourness(args.kmax, HSpec(sizes))
    rep = audit.audit_sourness(ss)
    return ss.to_json(), {"prefix_valid": rep.ok, "ell": ell}, rep.ok


def cmd_gcheck(args, obj):
    kind, fc, hspec, n_dn, n_up, r = audit.gcheck_from_json(obj)
    kind = args.kind or kind
    member = audit.g_check(kind, fc, hspec, n_dn, n_up, r)
    result = {"kind": kind.upper(), "member": member}
    if kind.upper() == "CMZ":
        result["ratio"] = jsonable(audit.cmz_ratio(fc, hspec, n_up))
        result["bound"] = jsonable(audit.cmz_bound(r))
    return result, {}, True


HANDLERS = {
    "hn": cmd_norms, "hnplus": cmd_norms, "hall": cmd_norms,
    "pos": cmd_pos, "fc-validate": cmd_fc_validate, "fc-leq": cmd_fc_leq,
    "nor": cmd_nor, "link": cmd_link, "cut": cmd_cut, "escape": cmd_escape, "dual": cmd_dual,
    "mt-mu": cmd_mt_mu, "mt-check": cmd_mt_check,
    "audit": cmd_audit, "gen": cmd_gen, "gcheck": cmd_gcheck,
}
NEEDS_INPUT = set(HANDLERS) - {"gen"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="input", help="read JSON from FILE instead of stdin")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--pretty", action="store_true")
    common.add_argument("--echo-input", action="store_true", help="include the canonicalized input in the report")
    common.add_argument("--timing", action="store_true", help="add wall-clock seconds to the report")

    p = argparse.ArgumentParser(prog="creaturekit", description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True)
    for name in ("hn", "hnplus", "hall", "pos"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--oracle", action="store_true", help="cross-check against brute force")
    sub.add_parser("fc-validate", parents=[common])
    sub.add_parser("fc-leq", parents=[common])
    sp = sub.add_parser("nor", parents=[common])
    sp.add_argument("--system", help="system JSON literal or file")
    sp.add_argument("--payload", help="creature JSON literal or file")
    sp = sub.add_parser("link", parents=[common])
    sp.add_argument("--k", type=int, default=None, help="h-linking threshold")
    sp = sub.add_parser("cut", parents=[common])
    sp.add_argument("--m", type=int, default=None)
    sub.add_parser("escape", parents=[common])
    sub.add_parser("dual", parents=[common])
    sp = sub.add_parser("mt-mu", parents=[common])
    sp.add_argument("--oracle", action="store_true")
    sp = sub.add_parser("mt-check", parents=[common])
    sp.add_argument("--lemma", choices=sorted(LEMMAS), required=True)
    sp = sub.add_parser("audit", parents=[common])
    sp.add_argument("what", choices=["norming1", "norming2", "sourness", "edrf-hlinked", "cohen"])
    sp.add_argument("--N", type=int, default=16)
    sp.add_argument("--system", help="system JSON literal or file (cohen)")
    sp.add_argument("--level", type=int, default=0)
    sp.add_argument("--heuristic", action="store_true", help="non-authoritative window audit (sourness)")
    sp = sub.add_parser("gen", parents=[common])
    sp.add_argument("what", choices=["sourness"])
    sp.add_argument("--kmax", type=int, required=True)
    sp.add_argument("--sizes", help="comma-separated alphabet sizes (default: smallest that work)")
    sp = sub.add_parser("gcheck", parents=[common])
    sp.add_argument("--kind", choices=["um", "cmz"])
    return p


def _needs_stdin(args) -> bool:
    if args.cmd not in NEEDS_INPUT:
        return False
    if args.cmd == "audit" and args.what in ("edrf-hlinked",):
        return False
    if args.cmd == "audit" and args.what == "cohen" and args.system:
        return False
    if args.cmd == "nor" and args.system and args.payload:
        return False
    return True


def dispatch(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    report = {"command": argv, "seed": args.seed}
    start = time.perf_counter()
    code = 0
    try:
        obj = _load(args) if _needs_stdin(args) else None
        if args.echo_input:
            report["input"] = json.loads(canonical(obj))
        try:
            result, checks, ok = HANDLERS[args.cmd](args, obj)
        except (KeyError, TypeError, AttributeError) as exc:
            raise InvalidInput(f"malformed input: {exc!r}") from None
        report["result"] = jsonable(result)
        report["checks"] = jsonable(checks)
        code = 0 if ok else 1
    except PropertyFailure as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc), "witness": jsonable(exc.witness)}
        code = exc.exit_code
    except CreatureKitError as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = exc.exit_code
    except RecursionError:
        report["error"] = {"type": "CapExceeded", "message": "instance too deep"}
        code = CapExceeded.exit_code
    if args.timing:
        report["timing"] = round(time.perf_counter() - start, 6)
    report["exit"] = code
    out.write(dumps(report, pretty=args.pretty) + "\n")
    return code


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
