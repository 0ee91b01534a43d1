"""Textual FHE-op programs: parsing, hint-reuse reordering and a reference interpreter.

One statement per line::

    keys = KEYGEN()
    x = ENC(m0)            # m0 names an external plaintext input
    y = FROT(x, steps=3)
    z = FMUL(x, y)
    out = DEC(z)

Plaintext operand positions (``ENC`` and the second argument of ``ADDCP`` /
``MULTCP``) may name external inputs; every other name must be assigned by an
earlier statement, and no name is assigned twice.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

CT, PT, KEYS = "ct", "pt", "keys"

# op -> (positional operand types, allowed attributes, result type)
SIGNATURES: dict[str, tuple[tuple[str, ...], tuple[str, ...], str]] = {
    "KEYGEN": ((), (), KEYS),
    "ENC": ((PT,), ("level",), CT),
    "DEC": ((CT,), (), PT),
    "FADD": ((CT, CT), (), CT),
    "ADDCP": ((CT, PT), (), CT),
    "MULTCP": ((CT, PT), (), CT),
    "FMUL": ((CT, CT), (), CT),
    "FROT": ((CT,), ("steps",), CT),
    "FBOT": ((CT,), (), CT),
}
KS_BEARING = ("FMUL", "FROT", "FBOT")

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_STMT = re.compile(r"^(\s*)([A-Za-z_]\w*)(\s*)=(\s*)([A-Za-z_]\w*)\s*\((.*)\)\s*$")


class ProgramError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Statement:
    target: str
    op: str
    args: tuple[str, ...]
    attrs: tuple[tuple[str, int], ...] = ()
    line: int = field(default=0, compare=False)

    def attr(self, name: str, default=None):
        return dict(self.attrs).get(name, default)

    @property
    def hint(self) -> str | None:
        """Name of the key-switching hint this statement consumes, if any."""
        if self.op == "FMUL":
            return "relin"
        if self.op == "FROT":
            steps = int(self.attr("steps", 1))
            return f"rot{steps}" if steps else None
        if self.op == "FBOT":
            return "fbot"
        return None

    def to_text(self) -> str:
        parts = list(self.args) + [f"{k}={v}" for k, v in self.attrs]
        return f"{self.target} = {self.op}({', '.join(parts)})"


@dataclass(frozen=True)
class OpProgram:
    statements: tuple[Statement, ...] = ()
    inputs: tuple[str, ...] = ()
    header: tuple[str, ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.statements)

    def histogram(self) -> dict[str, int]:
        return dict(sorted(Counter(s.op for s in self.statements).items()))

    def producers(self) -> dict[str, int]:
        return {s.target: i for i, s in enumerate(self.statements)}

    def dependencies(self) -> list[tuple[int, ...]]:
        """Statement indices each statement reads from."""
        prod = self.producers()
        return [tuple(sorted({prod[a] for a in s.args if a in prod})) for s in self.statements]

    def to_text(self) -> str:
        return "".join(s.to_text() + "\n" for s in self.statements)


def _split_args(body: str, line: int, offset: int) -> list[tuple[str, int]]:
    """Split on commas; return (token, 1-based column) pairs."""
    out, start = [], 0
    for i, ch in enumerate(body + ","):
        if ch == ",":
            raw = body[start:i]
            tok = raw.strip()
            col = offset + start + (len(raw) - len(raw.lstrip())) + 1
            if not tok:
                if body.strip() == "" and not out:
                    return []
                raise ProgramError("empty argument", line, col)
            out.append((tok, col))
            start = i + 1
    return out


def parse_program(text: str) -> OpProgram:
    stmts: list[Statement] = []
    types: dict[str, str] = {}
    inputs: list[str] = []
    header: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        code = raw.split("#", 1)[0]
        if "#" in raw and not code.strip():
            header.append(raw.split("#", 1)[1].strip())
        if not code.strip():
            continue
        m = _STMT.match(code)
        if not m:
            col = len(code) - len(code.lstrip()) + 1
            raise ProgramError("expected 'name = OP(args)'", lineno, col)
        target, op = m.group(2), m.group(5)
        op_col = m.start(5) + 1
        if op not in SIGNATURES:
            raise ProgramError(f"unknown operation {op!r}", lineno, op_col)
        if target in types:
            raise ProgramError(f"{target!r} is assigned more than once", lineno, m.start(2) + 1)
        if target in inputs:
            raise ProgramError(f"{target!r} is used before its definition", lineno, m.start(2) + 1)
        operand_types, allowed, result = SIGNATURES[op]
        args, attrs = [], []
        for tok, col in _split_args(m.group(6), lineno, m.start(6)):
            if "=" in tok:
                key, val = (t.strip() for t in tok.split("=", 1))
                if key not in allowed:
                    raise ProgramError(f"{op} takes no attribute {key!r}", lineno, col)
                try:
                    attrs.append((key, int(val, 0)))
                except ValueError:
                    raise ProgramError(f"attribute {key!r} needs an integer", lineno, col) from None
                continue
            if attrs:
                raise ProgramError("positional argument after attribute", lineno, col)
            if not _IDENT.fullmatch(tok):
                raise ProgramError(f"bad operand {tok!r}", lineno, col)
            args.append((tok, col))
        if len(args) != len(operand_types):
            raise ProgramError(f"{op} takes {len(operand_types)} operand(s), got {len(args)}", lineno, op_col)
        for (name, col), want in zip(args, operand_types):
            have = types.get(name)
            if have is None:
                if want == PT:
                    if name not in inputs:
                        inputs.append(name)
                    continue
                raise ProgramError(f"{name!r} is used before its definition", lineno, col)
            if have != want:
                raise ProgramError(f"{name!r} is a {have}, {op} expects a {want}", lineno, col)
        types[target] = result
        stmts.append(Statement(target, op, tuple(a for a, _ in args), tuple(attrs), lineno))
    return OpProgram(tuple(stmts), tuple(inputs), tuple(header))


def load_program(path) -> OpProgram:
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read())


def declared_histogram(program: OpProgram) -> dict[str, int] | None:
    """The ``histogram: OP=n ...`` line from a trace header, if present."""
    for line in program.header:
        if line.lower().startswith("histogram:"):
            pairs = line.split(":", 1)[1].split()
            return dict(sorted((k, int(v)) for k, v in (p.split("=") for p in pairs)))
    return None


def reorder_for_hint_reuse(p: OpProgram) -> OpProgram:
    """Dependency-preserving stable reorder that keeps ops sharing a KS hint together.

    Greedy: among ready statements (all producers emitted), prefer the earliest
    one that uses the most recently emitted hint, otherwise the earliest.
    """
    deps = p.dependencies()
    n = len(p.statements)
    emitted = [False] * n
    order: list[int] = []
    last_hint = None
    for _ in range(n):
        ready = [i for i in range(n) if not emitted[i] and all(emitted[d] for d in deps[i])]
        pick = ready[0]
        if last_hint is not None:
            for i in ready:
                if p.statements[i].hint == last_hint:
                    pick = i
                    break
        emitted[pick] = True
        order.append(pick)
        h = p.statements[pick].hint
        if h is not None:
            last_hint = h
    return OpProgram(tuple(p.statements[i] for i in order), p.inputs, p.header)


def hint_runs(p: OpProgram) -> int:
    """Number of hint loads a one-hint streaming buffer needs for ``p``."""
    loads, last = 0, None
    for s in p.statements:
        h = s.hint
        if h is not None and h != last:
            loads += 1
        if h is not None:
            last = h
    return loads


def interpret(p: OpProgram, params, inputs: dict, seed: int = 0) -> dict:
    """Run ``p`` through the functional scheme; returns decoded ``DEC`` outputs.

    Randomness is derived per statement from ``(seed, target)`` so any valid
    reordering produces bit-identical results.
    """
    import hashlib

    import numpy as np

    from .. import fheops as fo

    def rng_for(name: str):
        h = hashlib.sha256(f"{seed}:{name}".encode()).digest()
        return fo.FheRng(int.from_bytes(h[:8], "little"))

    keys = None
    hints: dict = {}
    env: dict = {}
    out: dict = {}

    def need_keys():
        nonlocal keys
        if keys is None:
            keys = fo.keygen(params, rng_for("__keys__"))
        return keys

    def plaintext(name, level):
        v = env.get(name)
        if v is None:
            v = np.asarray(inputs[name], dtype=np.complex128)
        return fo.encode(params, v, level=level)

    for s in p.statements:
        if s.op == "KEYGEN":
            env[s.target] = need_keys()
            continue
        sk, pk = need_keys()
        a = [env.get(x) for x in s.args]
        if s.op == "ENC":
            level = s.attr("level", params.k)
            env[s.target] = fo.encrypt(params, pk, plaintext(s.args[0], level), rng_for(s.target))
        elif s.op == "DEC":
            env[s.target] = out[s.target] = fo.decrypt_values(params, sk, a[0])
        elif s.op == "FADD":
            env[s.target] = fo.fadd(params, a[0], a[1])
        elif s.op == "ADDCP":
            pt = fo.encode(params, _values(env, inputs, s.args[1]), scale=a[0].scale, level=a[0].level)
            env[s.target] = fo.addcp(params, a[0], pt)
        elif s.op == "MULTCP":
            pt = fo.encode(params, _values(env, inputs, s.args[1]), level=a[0].level)
            env[s.target] = fo.multcp(params, a[0], pt)
        elif s.op == "FMUL":
            if "relin" not in hints:
                hints["relin"] = fo.relin_hint(params, sk, rng_for("__relin__"))
            env[s.target] = fo.fmul(params, a[0], a[1], hints["relin"])
        elif s.op == "FROT":
            steps = int(s.attr("steps", 1))
            key = f"rot{steps % params.slots}"
            if steps % params.slots and key not in hints:
                hints[key] = fo.rotation_hint(params, sk, steps, rng_for("__" + key + "__"))
            env[s.target] = fo.frot(params, a[0], steps, hints.get(key))
        else:
            raise ValueError(f"{s.op} has no functional implementation")
    return out


def _values(env, inputs, name):
    import numpy as np

    v = env.get(name)
    return np.asarray(v if v is not None else inputs[name], dtype=np.complex128)
