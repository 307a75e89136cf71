"""
DTOs de configuración de una ejecución de la línea de comandos.
"""
import re
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from src.config.settings import settings
from src.domain.entities.gen_spec import Family, GenSpec
from src.domain.models.solver_context import SolverContext, Tolerances

METHODS = ("dee1", "dee2", "l1", "eps-l1", "a2ou", "maximprove", "window", "dee2+l1", "l1-sweep")
Command = Literal["gen", "solve", "persist", "bench", "verify"]

_SHAPE = re.compile(r"^(\d+)x(\d+)$")
_Y = re.compile(r"^(from-lp|uniform:\d+|file:.+)$")


def parse_shape(value: str) -> Tuple[int, int]:
    """'HxW' -> (H, W); 'S' equivale a 'SxS'."""
    value = value.strip().lower()
    if value.isdigit():
        return int(value), int(value)
    match = _SHAPE.match(value)
    if not match:
        raise ValueError(f"Forma '{value}' inválida, se esperaba HxW.")
    return int(match.group(1)), int(match.group(2))


class ToleranceConfig(BaseModel):
    """Tolerancias numéricas (por defecto, las de `settings`)."""
    feas: float = Field(settings.TAU_FEAS, gt=0, description="Factibilidad primal")
    gap: float = Field(settings.TAU_GAP, gt=0, description="Salto primal-dual relativo")
    supp: float = Field(settings.TAU_SUPP, gt=0, description="Umbral de soporte")
    verify: float = Field(settings.TAU_VERIFY, gt=0, description="Valor mínimo aceptado del LP de verificación")
    integrality: float = Field(settings.TAU_INT, gt=0, description="Distancia a {0,1} de xi")
    strict_eps_factor: float = Field(settings.STRICT_EPS_FACTOR, gt=0, description="Factor del eps estricto por defecto")

    def to_tolerances(self) -> Tolerances:
        return Tolerances(**self.model_dump())


class RunConfig(BaseModel):
    """
    DTO con todos los parámetros de un subcomando.

    `grid`, `window` y los rangos de semillas se guardan ya interpretados.
    """
    command: Command = Field(..., description="Subcomando")
    method: List[str] = Field(default_factory=lambda: ["l1"], description="Métodos de persistencia")
    instance: Optional[str] = Field(None, description="Ruta de la instancia de entrada")
    output: Optional[str] = Field(None, description="Ruta de salida (archivo o directorio)")
    mapping: Optional[str] = Field(None, description="Archivo de aplicación para `verify`")
    mode: Literal["weak", "strict"] = Field("weak", description="Modo de verify, dee1, dee2 y l1-sweep")

    seeds: List[int] = Field(default_factory=lambda: [0], description="Semillas del generador")
    grid: Tuple[int, int] = Field((10, 10), description="Dimensiones de la rejilla (H, W)")
    labels: int = Field(3, ge=2, description="Número de etiquetas K")
    conn: Literal[4, 8] = Field(4, description="Conectividad de la rejilla")
    family: Family = Field(Family.POTTS, description="Familia de costes por pares")
    potts_per_edge: bool = Field(False, description="Un gamma por arista en lugar de por etiqueta")

    eps: Optional[float] = Field(None, gt=0, description="Margen estricto (por defecto proporcional a max|f|)")
    y: str = Field("from-lp", description="Etiquetado de prueba: from-lp, uniform:<k> o file:<ruta>")
    window: Optional[Tuple[int, int]] = Field(None, description="Tamaño de ventana (alto, ancho)")
    stride: Optional[int] = Field(None, ge=1, description="Paso entre ventanas")
    radius: Optional[int] = Field(None, ge=0, description="Radio de las ventanas BFS en grafos sin rejilla")
    sweeps: int = Field(1, ge=1, description="Barridos de ventanas")
    window_dee: bool = Field(False, description="Paso DEE1 antes de cada barrido de ventanas")
    budget: int = Field(settings.WINDOW_BUDGET, ge=1, description="Presupuesto de variables/restricciones por ventana")
    history: Optional[str] = Field(None, description="CSV con las etiquetas restantes tras cada ventana")

    cap: int = Field(settings.ENUM_CAP, ge=1, description="Límite de estados del oráculo")
    backend: Literal["auto", "simplex", "highs"] = Field(settings.LP_BACKEND, description="Backend LP")
    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)
    jobs: int = Field(settings.JOBS, description="Trabajos paralelos de joblib (-1 = todos)")
    dump_lp: Optional[str] = Field(None, description="Archivo donde exportar el LP en formato CPLEX")
    certify: bool = Field(False, description="Certificar contra el oráculo exacto")
    min_gap: Optional[float] = Field(None, ge=0, description="Filtra instancias con salto de integralidad menor")
    timing: bool = Field(False, description="Registrar tiempos reales en `wall_ms`")
    track: bool = Field(False, description="Registrar el benchmark en MLflow")

    class Config:
        json_schema_extra = {
            "example": {
                "command": "persist",
                "method": ["l1"],
                "instance": "results/instance_0.txt",
                "output": "results/certificate_0.json",
                "y": "from-lp",
            }
        }

    @field_validator("method")
    @classmethod
    def _known_methods(cls, value: List[str]) -> List[str]:
        unknown = [m for m in value if m not in METHODS]
        if unknown:
            raise ValueError(f"Métodos desconocidos: {unknown}; disponibles: {', '.join(METHODS)}")
        if not value:
            raise ValueError("Se necesita al menos un método.")
        return value

    @field_validator("y")
    @classmethod
    def _y_spec(cls, value: str) -> str:
        if not _Y.match(value):
            raise ValueError("--y debe ser from-lp, uniform:<k> o file:<ruta>.")
        return value

    @field_validator("jobs")
    @classmethod
    def _jobs(cls, value: int) -> int:
        if value == 0 or value < -1:
            raise ValueError("--jobs debe ser positivo o -1.")
        return value

    @model_validator(mode="after")
    def _consistent(self) -> "RunConfig":
        if self.grid[0] < 1 or self.grid[1] < 1:
            raise ValueError("La rejilla necesita dimensiones positivas.")
        if self.command in ("solve", "persist", "verify") and not self.instance:
            raise ValueError(f"`{self.command}` necesita una instancia (--instance).")
        if self.command == "verify" and not self.mapping:
            raise ValueError("`verify` necesita una aplicación (--mapping).")
        if self.command == "bench" and not self.output:
            raise ValueError("`bench` necesita una ruta de salida (--output).")
        if "window" in self.method and self.window is None and self.radius is None:
            self.window = (8, 8)
        if self.window is not None and self.stride is None:
            self.stride = max(1, min(self.window) // 2)
        return self

    def gen_spec(self, seed: int) -> GenSpec:
        return GenSpec(
            seed=seed,
            height=self.grid[0],
            width=self.grid[1],
            labels=self.labels,
            connectivity=self.conn,
            family=self.family,
            potts_per_edge=self.potts_per_edge,
        )

    def solver_context(self) -> SolverContext:
        return SolverContext(
            backend_name=self.backend,
            tol=self.tolerances.to_tolerances(),
            enum_cap=self.cap,
            window_budget=self.budget,
        )
