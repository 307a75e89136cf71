"""
Exportación de un `LinearProgram` al formato de texto CPLEX LP (`--dump-lp`).
"""
import re
from pathlib import Path
from typing import Iterable, List, Tuple, Union

import numpy as np

from src.domain.models.linear_program import LinearProgram, RowKind, Sense, VarId

TERMS_PER_LINE = 8


def variable_name(var: VarId) -> str:
    """("mu", 3, 1) -> mu_3_1; caracteres no admitidos pasan a '_'."""
    parts = var if isinstance(var, tuple) else (var,)
    name = re.sub(r"[^A-Za-z0-9_.]", "_", "_".join(str(p) for p in parts))
    return name if name[:1].isalpha() else f"v_{name}"


def _number(value) -> str:
    value = float(value)
    return str(int(value)) if value.is_integer() else repr(value)


def _expression(terms: Iterable[Tuple[VarId, float]], placeholder: str) -> List[str]:
    tokens = []
    for k, (var, coef) in enumerate(terms):
        coef = float(coef)
        sign = "-" if coef < 0 else "+"
        magnitude = abs(coef)
        body = variable_name(var) if magnitude == 1 else f"{_number(magnitude)} {variable_name(var)}"
        tokens.append((f"- {body}" if sign == "-" else body) if k == 0 else f"{sign} {body}")
    if not tokens:
        tokens = [f"0 {placeholder}"]
    return [" ".join(tokens[i:i + TERMS_PER_LINE]) for i in range(0, len(tokens), TERMS_PER_LINE)]


def format_lp(lp: LinearProgram) -> str:
    lines = [f"\\ {lp.name}", "Maximize" if lp.sense == Sense.MAXIMIZE else "Minimize"]
    placeholder = variable_name(next(iter(lp.variables))) if lp.variables else "x"
    objective = _expression(lp.objective.items(), placeholder)
    lines.append(f" obj: {objective[0]}")
    lines += [f"   {chunk}" for chunk in objective[1:]]

    lines.append("Subject To")
    for r, row in enumerate(lp.rows):
        chunks = _expression(row.coeffs, placeholder)
        op = "=" if row.kind == RowKind.EQ else ">="
        name = variable_name(row.name) if row.name else f"c{r}"
        lines.append(f" {name}_{r}: {chunks[0]}" if len(chunks) > 1 else f" {name}_{r}: {chunks[0]} {op} {_number(row.rhs)}")
        for k, chunk in enumerate(chunks[1:], start=1):
            tail = f" {op} {_number(row.rhs)}" if k == len(chunks) - 1 else ""
            lines.append(f"   {chunk}{tail}")

    lines.append("Bounds")
    for var, (lower, upper) in lp.variables.items():
        name = variable_name(var)
        if np.isinf(lower) and np.isinf(upper):
            lines.append(f" {name} free")
        elif lower == upper:
            lines.append(f" {name} = {_number(lower)}")
        elif np.isinf(upper):
            if lower != 0:
                lines.append(f" {name} >= {_number(lower)}")
        else:
            low = "-inf" if np.isinf(lower) else _number(lower)
            lines.append(f" {low} <= {name} <= {_number(upper)}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def write_lp(lp: LinearProgram, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_lp(lp), encoding="utf-8")
    return path
