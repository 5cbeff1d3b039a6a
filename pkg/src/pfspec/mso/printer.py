"""Text rendering that parses back to the same tree."""

from __future__ import annotations

from . import ast as A

_OPS = {A.And: "&", A.Or: "|", A.Implies: "->", A.Iff: "<->"}


def _cell(c: A.Cell) -> str:
    return ",".join(("" if pos else "~") + name for name, pos in c)


def _wrap(phi: A.Formula) -> str:
    s = to_text(phi)
    if isinstance(phi, A.BINARY + A.QUANTIFIERS):
        return f"({s})"
    return s


def to_text(phi: A.Formula) -> str:
    if isinstance(phi, A.Const):
        return "true" if phi.value else "false"
    if isinstance(phi, A.OrphanEmpty):
        return "OrphanEmpty"
    if isinstance(phi, A.Edge):
        return f"E({phi.src},{phi.dst})"
    if isinstance(phi, A.Eq):
        return f"{phi.left} = {phi.right}"
    if isinstance(phi, A.Color):
        return f"{phi.name}({phi.arg})"
    if isinstance(phi, A.Orphan):
        return f"Orphan({phi.arg})"
    if isinstance(phi, A.Member):
        return f"{phi.elem} in {phi.setvar}"
    if isinstance(phi, A.CellZero):
        return f"Zero[{_cell(phi.cell)}]"
    if isinstance(phi, A.CellAtomic):
        return f"Atomic[{_cell(phi.cell)}]"
    if isinstance(phi, A.CellOrphan):
        return f"Orphan[{_cell(phi.cell)}]"
    if isinstance(phi, A.CellEdge):
        return f"E[{_cell(phi.src)}; {_cell(phi.dst)}]"
    if isinstance(phi, A.CellColor):
        return f"Color[{phi.name}; {_cell(phi.cell)}]"
    if isinstance(phi, A.Not):
        return "~" + _wrap(phi.body)
    if isinstance(phi, A.BINARY):
        # &, | and <-> associate to the left, -> to the right
        left = to_text(phi.left) if type(phi.left) is type(phi) and not isinstance(phi, A.Implies) else _wrap(phi.left)
        right = to_text(phi.right) if type(phi.right) is type(phi) and isinstance(phi, A.Implies) else _wrap(phi.right)
        return f"{left} {_OPS[type(phi)]} {right}"
    if isinstance(phi, A.QUANTIFIERS):
        set_q = A.is_set_var(phi.var)
        word = ("Forall" if set_q else "forall") if isinstance(phi, A.Forall) else ("Exists" if set_q else "exists")
        return f"{word} {phi.var}. {to_text(phi.body)}"
    raise TypeError(f"not a formula: {phi!r}")
