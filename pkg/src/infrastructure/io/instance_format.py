"""
Formato de texto por líneas para instancias de energía.

    nodes <n>
    grid <H> <W>                 (opcional)
    labels <s> <K_s>
    f0 <v>
    unary <s> <i> <v>
    edge <s> <t>
    pair <s> <t> <i> <j> <v>

Las entradas no indicadas valen 0. Las líneas vacías y las que empiezan por
`#` se ignoran. Un `pair` escrito en la orientación inversa de su arista se
traspone.
"""
import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from src.domain.entities.energy_instance import EnergyInstance
from src.domain.exceptions import InstanceError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def format_value(value: float) -> str:
    """Entero sin decimales si lo es (sin -0) y repr de float en otro caso."""
    value = float(value)
    if not np.isfinite(value):
        raise InstanceError(f"Coste no finito: {value}.")
    if value.is_integer():
        return str(int(value))
    return repr(value)


def _int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise InstanceError(f"Línea {lineno}: se esperaba un entero y se encontró '{token}'.") from None


def _float(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise InstanceError(f"Línea {lineno}: valor numérico inválido '{token}'.") from None
    if not np.isfinite(value):
        raise InstanceError(f"Línea {lineno}: coste no finito.")
    return value


ARITY = {"nodes": 1, "grid": 2, "labels": 2, "f0": 1, "unary": 3, "edge": 2, "pair": 5}


def parse_instance(text: str) -> EnergyInstance:
    """
    Construye una instancia a partir del texto del formato.

    Raises:
        InstanceError: Ante cualquier línea mal formada o referencia inválida
    """
    n = None
    grid = None
    counts: Dict[int, int] = {}
    f0 = 0.0
    unary_entries: List[Tuple[int, int, float, int]] = []
    edges: List[Tuple[int, int]] = []
    pair_entries: List[Tuple[int, int, int, int, float, int]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, *args = line.split()
        if keyword not in ARITY:
            raise InstanceError(f"Línea {lineno}: palabra clave desconocida '{keyword}'.")
        if len(args) != ARITY[keyword]:
            raise InstanceError(f"Línea {lineno}: '{keyword}' espera {ARITY[keyword]} argumentos.")
        if keyword == "nodes":
            if n is not None:
                raise InstanceError(f"Línea {lineno}: 'nodes' repetido.")
            n = _int(args[0], lineno)
        elif keyword == "grid":
            grid = (_int(args[0], lineno), _int(args[1], lineno))
        elif keyword == "labels":
            counts[_int(args[0], lineno)] = _int(args[1], lineno)
        elif keyword == "f0":
            f0 = _float(args[0], lineno)
        elif keyword == "unary":
            unary_entries.append((_int(args[0], lineno), _int(args[1], lineno), _float(args[2], lineno), lineno))
        elif keyword == "edge":
            edges.append((_int(args[0], lineno), _int(args[1], lineno)))
        else:
            s, t, i, j = (_int(a, lineno) for a in args[:4])
            pair_entries.append((s, t, i, j, _float(args[4], lineno), lineno))

    if n is None:
        raise InstanceError("Falta la cabecera 'nodes <n>'.")
    if n < 1:
        raise InstanceError("La instancia necesita al menos un nodo.")
    missing = [s for s in range(n) if s not in counts]
    if missing or any(s >= n or s < 0 for s in counts):
        raise InstanceError(f"Declaración 'labels' ausente o fuera de rango (nodos sin etiquetas: {missing[:5]}).")
    if grid is not None and grid[0] * grid[1] != n:
        raise InstanceError(f"La rejilla {grid[0]}x{grid[1]} no tiene {n} nodos.")

    label_counts = tuple(counts[s] for s in range(n))
    unary = [np.zeros(k) for k in label_counts]
    for s, i, v, lineno in unary_entries:
        if not (0 <= s < n and 0 <= i < label_counts[s]):
            raise InstanceError(f"Línea {lineno}: unario ({s}, {i}) fuera de rango.")
        unary[s][i] = v
    for s, t in edges:
        if not (0 <= s < n and 0 <= t < n):
            raise InstanceError(f"Arista ({s}, {t}) con nodos inexistentes.")
    pairwise = [np.zeros((label_counts[s], label_counts[t])) for s, t in edges]
    index = {e: k for k, e in enumerate(edges)}
    for s, t, i, j, v, lineno in pair_entries:
        if (s, t) in index:
            eid, a, b = index[(s, t)], i, j
        elif (t, s) in index:
            eid, a, b = index[(t, s)], j, i
        else:
            raise InstanceError(f"Línea {lineno}: 'pair' sobre una arista no declarada ({s}, {t}).")
        table = pairwise[eid]
        if not (0 <= a < table.shape[0] and 0 <= b < table.shape[1]):
            raise InstanceError(f"Línea {lineno}: entrada por pares fuera de rango.")
        table[a, b] = v

    return EnergyInstance(
        label_counts=label_counts,
        unary=tuple(unary),
        edges=tuple(edges),
        pairwise=tuple(pairwise),
        f0=f0,
        grid=grid,
    )


def format_instance(instance: EnergyInstance) -> str:
    """Texto canónico de la instancia (solo se escriben las entradas no nulas)."""
    lines = [f"nodes {instance.n_nodes}"]
    if instance.grid:
        lines.append(f"grid {instance.grid[0]} {instance.grid[1]}")
    lines += [f"labels {s} {k}" for s, k in enumerate(instance.label_counts)]
    lines.append(f"f0 {format_value(instance.f0)}")
    for s, u in enumerate(instance.unary):
        lines += [f"unary {s} {i} {format_value(v)}" for i, v in enumerate(u) if v != 0]
    lines += [f"edge {s} {t}" for s, t in instance.edges]
    for (s, t), table in zip(instance.edges, instance.pairwise):
        for i, j in zip(*np.nonzero(table)):
            lines.append(f"pair {s} {t} {i} {j} {format_value(table[i, j])}")
    return "\n".join(lines) + "\n"


def read_instance(path: PathLike) -> EnergyInstance:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InstanceError(f"No se pudo leer la instancia {path}: {exc}") from exc
    instance = parse_instance(text)
    logger.debug("Instancia %s: %d nodos, %d aristas", path, instance.n_nodes, instance.n_edges)
    return instance


def write_instance(instance: EnergyInstance, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_instance(instance), encoding="utf-8")
    return path
