"""Session language and command dispatch.

A session file declares one ring, then ideals, extensions, witnesses and
chains over it; commands run one computation and emit a canonical JSON
report. Exit codes: 0 success, 2 parse error, 3 algebra precondition
error, 4 out-of-scope computation.
"""

import argparse
import json
import os
import sys
import time

from .errors import OutOfScopeError, ParseError, PreconditionError, SplincalError
from .frobenius import (
    QuotientRing,
    SplittingWitness,
    configurable_verify_threads,
    enumerate_compatible,
    fedder_fpure,
    frobenius_closure,
    star_closure,
)
from .groebner import Ideal
from .poly import MonomialOrder, GREVLEX, LEX, PolyRing
from .splinter import (
    FiniteExtension,
    contract_ideal,
    default_sample_family,
    ideal_trace_sample,
    splinter_report,
    trace_chain,
    trace_ideal,
    verify_generically_etale,
)

COMMANDS = (
    "fpure",
    "compatible",
    "star",
    "frobclosure",
    "trace",
    "idealtrace",
    "contract",
    "etale",
    "chain",
    "splinter",
)


class Session:
    def __init__(self):
        self.ring_name = None
        self.qring = None
        self.order_name = "grevlex"
        self.ideals = {}
        self.extensions = {}
        self.witness_decls = {}
        self.chains = {}
        self.decl_order = {"ideal": [], "extension": [], "witness": [], "chain": []}

    def names(self):
        out = set()
        if self.ring_name:
            out.add(self.ring_name)
        for group in (self.ideals, self.extensions, self.witness_decls, self.chains):
            out |= set(group)
        return out

    def resolve_witness(self, name):
        decl = self.witness_decls[name]
        if decl == "auto":
            fed = fedder_fpure(self.qring)
            if not fed.fpure:
                raise PreconditionError(
                    "auto witness requested but the ring is not F-pure",
                    code="NOT_FPURE",
                )
            return fed.witness
        return SplittingWitness(self.qring, decl, provenance="user")

    def first_witness(self):
        if self.decl_order["witness"]:
            return self.resolve_witness(self.decl_order["witness"][0])
        fed = fedder_fpure(self.qring)
        if not fed.fpure:
            raise PreconditionError(
                "no witness declared and the ring is not F-pure", code="NOT_FPURE"
            )
        return fed.witness

    def __eq__(self, other):
        if not isinstance(other, Session):
            return NotImplemented
        if (self.ring_name, self.order_name) != (other.ring_name, other.order_name):
            return False
        if (self.qring is None) != (other.qring is None):
            return False
        if self.qring is not None and self.qring.key() != other.qring.key():
            return False
        if self.decl_order != other.decl_order:
            return False
        for n in self.ideals:
            theirs = other.ideals.get(n)
            if theirs is None or self.ideals[n].gens != theirs.gens:
                return False
        for n in self.extensions:
            a, b = self.extensions[n], other.extensions.get(n)
            if b is None or a.adjoined != b.adjoined or a.relations != b.relations:
                return False
        for n in self.witness_decls:
            if self.witness_decls[n] != other.witness_decls.get(n):
                return False
        return self.chains == other.chains


def _split_top(text, sep=","):
    parts = []
    depth = 0
    cur = []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced parentheses")
        if ch == sep and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise ParseError("unbalanced parentheses")
    last = "".join(cur).strip()
    if last or parts:
        parts.append(last)
    return parts


def _expect_wrapped(text, head, line):
    text = text.strip()
    if not text.startswith(head + "(") or not text.endswith(")"):
        raise ParseError(f"expected {head}(...)", line=line)
    return text[len(head) + 1 : -1]


def _parse_ring_line(session, rest, line):
    # <name> = poly(p=..; vars=..; order=..) / ideal(...)
    if "=" not in rest:
        raise ParseError("malformed ring declaration", line=line)
    name, rhs = rest.split("=", 1)
    name = name.strip()
    if not name.isidentifier():
        raise ParseError(f"bad ring name {name!r}", line=line)
    if "/" not in rhs:
        raise ParseError("ring declaration needs '/ ideal(...)'", line=line)
    polypart, idealpart = rhs.split("/", 1)
    body = _expect_wrapped(polypart, "poly", line)
    fields = {}
    for item in body.split(";"):
        if "=" not in item:
            raise ParseError(f"malformed ring field {item.strip()!r}", line=line)
        k, v = item.split("=", 1)
        fields[k.strip()] = v.strip()
    missing = {"p", "vars", "order"} - set(fields)
    if missing:
        raise ParseError(f"ring declaration missing {sorted(missing)}", line=line)
    try:
        p = int(fields["p"])
    except ValueError:
        raise ParseError(f"characteristic {fields['p']!r} is not an integer", line=line)
    variables = [v.strip() for v in fields["vars"].split(",") if v.strip()]
    if not variables or not all(v.isidentifier() for v in variables):
        raise ParseError("bad variable list", line=line)
    if fields["order"] == "grevlex":
        order = MonomialOrder(GREVLEX)
    elif fields["order"] == "lex":
        order = MonomialOrder(LEX)
    else:
        raise ParseError(f"unknown order {fields['order']!r}", line=line)
    try:
        ring = PolyRing(p, variables, order)
    except PreconditionError as exc:
        raise ParseError(str(exc), line=line)
    gens_text = _expect_wrapped(idealpart, "ideal", line)
    gens = []
    for g in _split_top(gens_text):
        if g:
            gens.append(_parse_poly_at(ring, g, line))
    session.ring_name = name
    session.order_name = fields["order"]
    try:
        session.qring = QuotientRing(ring, Ideal(ring, gens or [ring.zero()]))
    except PreconditionError:
        raise
    return session


def _parse_poly_at(ring, text, line):
    try:
        return ring.parse(text)
    except ParseError as exc:
        raise ParseError(f"{exc} in {text!r}", line=line, col=exc.col)


def _require_ring(session, name, line):
    if session.qring is None:
        raise ParseError("no ring declared yet", line=line)
    if name != session.ring_name:
        raise ParseError(f"unknown ring {name!r}", line=line)


def _fresh_name(session, name, line):
    if not name.isidentifier():
        raise ParseError(f"bad name {name!r}", line=line)
    if name in session.names():
        raise ParseError(f"duplicate name {name!r}", line=line)


def parse_session(text):
    session = Session()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stmt = raw.split("#", 1)[0].strip()
        if not stmt:
            continue
        if " " not in stmt:
            raise ParseError(f"malformed declaration {stmt!r}", line=lineno)
        kind, rest = stmt.split(None, 1)
        if kind == "ring":
            if session.qring is not None:
                raise ParseError("only one ring per session", line=lineno)
            _parse_ring_line(session, rest, lineno)
            continue
        if kind == "ideal":
            m = rest.split("=", 1)
            if len(m) != 2 or " in " not in m[0]:
                raise ParseError("malformed ideal declaration", line=lineno)
            name, ring_name = (s.strip() for s in m[0].split(" in ", 1))
            _fresh_name(session, name, lineno)
            _require_ring(session, ring_name, lineno)
            body = m[1].strip()
            if not (body.startswith("(") and body.endswith(")")):
                raise ParseError("ideal generators must be parenthesized", line=lineno)
            ring = session.qring.ring
            gens = []
            for g in _split_top(body[1:-1]):
                if g:
                    gens.append(_parse_poly_at(ring, g, lineno))
            gens.sort(key=lambda f: f.canonical_key(), reverse=True)
            session.ideals[name] = Ideal(ring, gens or [ring.zero()])
            session.decl_order["ideal"].append(name)
            continue
        if kind == "extension":
            m = rest.split("=", 1)
            if len(m) != 2 or " over " not in m[0]:
                raise ParseError("malformed extension declaration", line=lineno)
            name, ring_name = (s.strip() for s in m[0].split(" over ", 1))
            _fresh_name(session, name, lineno)
            _require_ring(session, ring_name, lineno)
            rhs = m[1]
            if "/" not in rhs:
                raise ParseError("extension needs '/ relations(...)'", line=lineno)
            adjpart, relpart = rhs.split("/", 1)
            adj_body = _expect_wrapped(adjpart, "adjoin", lineno)
            adjoined = [v.strip() for v in adj_body.split(",") if v.strip()]
            if not adjoined or not all(v.isidentifier() for v in adjoined):
                raise ParseError("bad adjoined variable list", line=lineno)
            rel_body = _expect_wrapped(relpart, "relations", lineno)
            try:
                ext = FiniteExtension(session.qring, adjoined, [], name=name)
            except PreconditionError as exc:
                raise ParseError(str(exc), line=lineno)
            rels = []
            for r in _split_top(rel_body):
                if r:
                    rels.append(_parse_poly_at(ext.ring, r, lineno))
            rels.sort(key=lambda f: f.canonical_key(), reverse=True)
            session.extensions[name] = FiniteExtension(
                session.qring, adjoined, rels, name=name
            )
            session.decl_order["extension"].append(name)
            continue
        if kind == "witness":
            m = rest.split("=", 1)
            if len(m) != 2 or " in " not in m[0]:
                raise ParseError("malformed witness declaration", line=lineno)
            name, ring_name = (s.strip() for s in m[0].split(" in ", 1))
            _fresh_name(session, name, lineno)
            _require_ring(session, ring_name, lineno)
            body = m[1].strip()
            if body == "auto":
                session.witness_decls[name] = "auto"
            else:
                expr = _expect_wrapped(body, "poly", lineno)
                session.witness_decls[name] = _parse_poly_at(
                    session.qring.ring, expr, lineno
                )
            session.decl_order["witness"].append(name)
            continue
        if kind == "chain":
            m = rest.split("=", 1)
            if len(m) != 2 or " over " not in m[0]:
                raise ParseError("malformed chain declaration", line=lineno)
            name, ring_name = (s.strip() for s in m[0].split(" over ", 1))
            _fresh_name(session, name, lineno)
            _require_ring(session, ring_name, lineno)
            body = m[1].strip()
            if not (body.startswith("(") and body.endswith(")")):
                raise ParseError("chain members must be parenthesized", line=lineno)
            members = [v.strip() for v in body[1:-1].split(",") if v.strip()]
            for member in members:
                if member not in session.extensions:
                    raise ParseError(f"unknown extension {member!r}", line=lineno)
            session.chains[name] = tuple(members)
            session.decl_order["chain"].append(name)
            continue
        raise ParseError(f"unknown declaration kind {kind!r}", line=lineno)
    if session.qring is None:
        raise ParseError("session declares no ring", line=1)
    return session


def print_canonical(obj):
    """Deterministic canonical text for polynomials, ideals, chains, sessions."""
    from .poly import Polynomial

    if isinstance(obj, Polynomial):
        return str(obj)
    if isinstance(obj, Ideal):
        return "(" + ", ".join(obj.key()) + ")"
    if isinstance(obj, Session):
        return print_session(obj)
    if isinstance(obj, (tuple, list)):
        return "chain(" + ", ".join(str(x) for x in obj) + ")"
    return str(obj)


def print_session(session):
    ring = session.qring.ring
    lines = []
    gens = ", ".join(str(g) for g in session.qring.defining.gens)
    lines.append(
        f"ring {session.ring_name} = poly(p={ring.p}; "
        f"vars={','.join(ring.variables)}; order={session.order_name}) / ideal({gens})"
    )
    for name in session.decl_order["ideal"]:
        body = ", ".join(str(g) for g in session.ideals[name].gens)
        lines.append(f"ideal {name} in {session.ring_name} = ({body})")
    for name in session.decl_order["extension"]:
        ext = session.extensions[name]
        rels = ", ".join(str(r) for r in ext.relations)
        lines.append(
            f"extension {name} over {session.ring_name} = "
            f"adjoin({', '.join(ext.adjoined)}) / relations({rels})"
        )
    for name in session.decl_order["witness"]:
        decl = session.witness_decls[name]
        body = "auto" if decl == "auto" else f"poly({decl})"
        lines.append(f"witness {name} in {session.ring_name} = {body}")
    for name in session.decl_order["chain"]:
        body = ", ".join(session.chains[name])
        lines.append(f"chain {name} over {session.ring_name} = ({body})")
    return "\n".join(lines) + "\n"


def _ideal_payload(I):
    return list(I.key())


def _trace_report_payload(report):
    payload = {
        "fpure": report.fpure,
        "verdict": report.verdict,
        "extensions": list(report.extensions),
        "traces": [_ideal_payload(t) for t in report.traces],
        "splits": list(report.splits),
        "stabilized_at": report.stabilized_at,
        "obstruction": _ideal_payload(report.obstruction) if report.obstruction else None,
        "radical_flag": report.radical_flag,
        "compatible_flags": dict(report.compatible_flags),
        "sample_containment": report.sample_containment,
        "notes": list(report.notes),
        "warnings": list(report.warnings),
    }
    return payload


def _get_target(session, args, kinds):
    name = args.target
    if name is None:
        if "ring" in kinds:
            return "ring", session.ring_name
        raise PreconditionError("--target is required for this command")
    if "ideal" in kinds and name in session.ideals:
        return "ideal", name
    if "extension" in kinds and name in session.extensions:
        return "extension", name
    if "chain" in kinds and name in session.chains:
        return "chain", name
    if "witness" in kinds and name in session.witness_decls:
        return "witness", name
    if "ring" in kinds and name == session.ring_name:
        return "ring", name
    raise PreconditionError(f"unknown target {name!r}", code="UNKNOWN_TARGET")


def _family(session, args):
    if not args.family:
        return None
    out = []
    for name in args.family.split(","):
        name = name.strip()
        if name not in session.ideals:
            raise PreconditionError(f"unknown ideal {name!r}", code="UNKNOWN_TARGET")
        out.append(session.ideals[name])
    return out


def run_command(session, command, args):
    qring = session.qring
    if command == "fpure":
        _get_target(session, args, ("ring",))
        fed = fedder_fpure(qring)
        return {
            "fpure": fed.fpure,
            "witness": str(fed.witness.u) if fed.witness else None,
        }
    if command == "compatible":
        _get_target(session, args, ("ring",))
        witness = session.first_witness()
        lattice = enumerate_compatible(witness, qring)
        return {
            "witness": str(witness.u),
            "size": lattice.size(),
            "ideals": [_ideal_payload(I) for I in lattice.ideals],
            "edges": lattice.edges,
            "prime_flags": lattice.prime_flags,
            "coheights": lattice.coheights,
            "complete": lattice.complete,
            "binomial_bound_ok": lattice.binomial_bound_ok(),
            "warnings": lattice.warnings,
        }
    if command == "star":
        kind, name = _get_target(session, args, ("ideal",))
        witness = session.first_witness()
        closed = star_closure(witness, session.ideals[name])
        return {
            "witness": str(witness.u),
            "ideal": _ideal_payload(session.ideals[name]),
            "star": _ideal_payload(closed),
        }
    if command == "frobclosure":
        kind, name = _get_target(session, args, ("ideal",))
        out = frobenius_closure(qring, session.ideals[name], e_max=args.emax)
        return {
            "ideal": _ideal_payload(session.ideals[name]),
            "closure": _ideal_payload(out.closure),
            "stabilized_at": out.stabilized_at,
            "levels": [_ideal_payload(l) for l in out.levels],
        }
    if command == "trace":
        kind, name = _get_target(session, args, ("extension",))
        ext = session.extensions[name]
        tau = trace_ideal(ext)
        return {
            "extension": name,
            "trace": _ideal_payload(tau),
            "split": tau.is_unit(),
        }
    if command == "idealtrace":
        kind, name = _get_target(session, args, ("extension",))
        ext = session.extensions[name]
        family = _family(session, args) or default_sample_family(qring)
        sample, warnings = ideal_trace_sample(ext, family)
        return {
            "extension": name,
            "family": [_ideal_payload(I) for I in family],
            "sample": _ideal_payload(sample),
            "warnings": warnings,
        }
    if command == "contract":
        kind, name = _get_target(session, args, ("extension",))
        ext = session.extensions[name]
        family = _family(session, args)
        if not family:
            raise PreconditionError("contract requires --family with ideal names")
        out = {}
        for fam_name, I in zip(args.family.split(","), family):
            out[fam_name.strip()] = _ideal_payload(contract_ideal(ext, I))
        return {"extension": name, "contractions": out}
    if command == "etale":
        kind, name = _get_target(session, args, ("extension",))
        cert = verify_generically_etale(session.extensions[name])
        return {
            "extension": name,
            "verdict": cert.verdict,
            "determinant": str(cert.determinant) if cert.determinant else None,
            "relation_choice": list(cert.relation_choice),
        }
    if command == "chain":
        kind, name = _get_target(session, args, ("chain",))
        chain = [session.extensions[n] for n in session.chains[name]]
        report = trace_chain(qring, chain)
        return _trace_report_payload(report)
    if command == "splinter":
        kind, name = _get_target(session, args, ("chain",))
        chain = [session.extensions[n] for n in session.chains[name]]
        witnesses = []
        for wname in session.decl_order["witness"]:
            witnesses.append(session.resolve_witness(wname))
        report = splinter_report(qring, chain, witnesses)
        return _trace_report_payload(report)
    raise PreconditionError(f"unknown command {command!r}")


def _threads_from_env():
    raw = os.environ.get("SPLINCAL_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise PreconditionError(f"SPLINCAL_THREADS={raw!r} is not an integer")
    if n < 1:
        raise PreconditionError("SPLINCAL_THREADS must be a positive integer")
    return n


def build_parser():
    parser = argparse.ArgumentParser(prog="splincal")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--session", required=True)
    parser.add_argument("--target", default=None)
    parser.add_argument("--emax", type=int, default=4)
    parser.add_argument("--family", default=None)
    parser.add_argument("--json", dest="json_out", required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    report = {"command": args.command}
    code = 0
    try:
        configurable_verify_threads(_threads_from_env())
        with open(args.session, "r", encoding="utf-8") as fh:
            text = fh.read()
        session = parse_session(text)
        report["inputs"] = {
            "session": print_session(session),
            "target": args.target,
            "emax": args.emax,
            "family": args.family,
        }
        report["result"] = run_command(session, args.command, args)
        report["warnings"] = report["result"].pop("warnings", [])
    except ParseError as exc:
        report["error"] = {
            "code": exc.code,
            "message": str(exc),
            "line": exc.line,
            "col": exc.col,
        }
        code = exc.exit_code
    except OutOfScopeError as exc:
        report["error"] = {"code": exc.code, "message": str(exc)}
        code = exc.exit_code
    except PreconditionError as exc:
        report["error"] = {"code": exc.code, "message": str(exc)}
        code = exc.exit_code
    except OSError as exc:
        report["error"] = {"code": "IO_ERROR", "message": str(exc)}
        code = 3
    except SplincalError as exc:
        report["error"] = {"code": exc.code, "message": str(exc)}
        code = exc.exit_code
    report["wall_time_ms"] = round((time.perf_counter() - started) * 1000.0, 3)
    payload = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.json_out == "-":
        sys.stdout.write(payload)
    else:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    return code


if __name__ == "__main__":
    sys.exit(main())
