"""
Formato de texto para aplicaciones por píxel y etiquetados.

    map <s> <i> <p_s(i)>      entradas no indicadas: identidad
    label <s> <x_s>           un etiquetado completo (una línea por nodo)
"""
from pathlib import Path
from typing import Dict, Sequence, Tuple, Union

from src.domain.entities.energy_instance import Labeling
from src.domain.entities.pixelwise_mapping import PixelwiseMapping
from src.domain.exceptions import InstanceError, MappingError

PathLike = Union[str, Path]


def _rows(text: str, keyword: str, arity: int):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] != keyword or len(tokens) != arity + 1:
            raise InstanceError(f"Línea {lineno}: se esperaba '{keyword}' con {arity} enteros.")
        try:
            yield lineno, tuple(int(v) for v in tokens[1:])
        except ValueError:
            raise InstanceError(f"Línea {lineno}: entero inválido.") from None


def parse_mapping(text: str, label_counts: Sequence[int]) -> PixelwiseMapping:
    """
    Raises:
        InstanceError: Línea mal formada
        MappingError: Entrada fuera de rango, repetida o aplicación no idempotente
    """
    entries: Dict[Tuple[int, int], int] = {}
    for lineno, (s, i, v) in _rows(text, "map", 3):
        if (s, i) in entries and entries[(s, i)] != v:
            raise MappingError(f"Línea {lineno}: entrada ({s}, {i}) repetida con otro valor.")
        entries[(s, i)] = v
    return PixelwiseMapping.from_entries(label_counts, entries)


def format_mapping(p: PixelwiseMapping) -> str:
    lines = [f"map {s} {i} {p(s, i)}" for s, i in p.moved()]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_labeling(text: str, n_nodes: int) -> Labeling:
    values: Dict[int, int] = {}
    for lineno, (s, v) in _rows(text, "label", 2):
        if s in values:
            raise InstanceError(f"Línea {lineno}: nodo {s} repetido.")
        values[s] = v
    if sorted(values) != list(range(n_nodes)):
        raise InstanceError(f"El etiquetado debe cubrir exactamente los nodos 0..{n_nodes - 1}.")
    return tuple(values[s] for s in range(n_nodes))


def format_labeling(x: Sequence[int]) -> str:
    return "".join(f"label {s} {int(v)}\n" for s, v in enumerate(x))


def read_mapping(path: PathLike, label_counts: Sequence[int]) -> PixelwiseMapping:
    return parse_mapping(_read(path), label_counts)


def read_labeling(path: PathLike, n_nodes: int) -> Labeling:
    return parse_labeling(_read(path), n_nodes)


def write_mapping(p: PixelwiseMapping, path: PathLike) -> Path:
    return _write(path, format_mapping(p))


def write_labeling(x: Sequence[int], path: PathLike) -> Path:
    return _write(path, format_labeling(x))


def _read(path: PathLike) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InstanceError(f"No se pudo leer {path}: {exc}") from exc


def _write(path: PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path
