"""
Línea de comandos: gen, solve, persist, bench y verify.

Códigos de salida: 0 éxito, 1 uso o entrada inválida, 2 fallo del solver,
3 fallo de certificación.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd
from pydantic import ValidationError

from src.application.dto.certificate_document import CertificateDocument
from src.application.dto.run_config import METHODS, RunConfig, parse_shape
from src.application.use_cases.benchmark_use_case import BenchmarkUseCase
from src.application.use_cases.generate_instances_use_case import GenerateInstancesUseCase
from src.application.use_cases.persistency_use_case import PersistencyUseCase
from src.application.use_cases.solve_relaxation_use_case import SolveRelaxationUseCase
from src.application.use_cases.verify_mapping_use_case import VerifyMappingUseCase
from src.config.settings import settings
from src.domain.exceptions import (
    CertificationError,
    EnumerationCapError,
    InstanceError,
    MappingError,
    SolverError,
)
from src.infrastructure.io.instance_format import read_instance, write_instance
from src.infrastructure.io.lp_export import write_lp
from src.infrastructure.io.mapping_format import read_labeling, read_mapping
from src.infrastructure.persistence.certificate_repository import CertificateRepository

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_CERTIFICATION = 3

BANNER = "=" * 60


class UsageError(Exception):
    """Error de argumentos de la línea de comandos."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_seeds(value: str) -> List[int]:
    """'7' -> [7]; '0:10' -> 0..9; '1,4,9' -> [1, 4, 9]."""
    try:
        if ":" in value:
            start, stop = value.split(":", 1)
            return list(range(int(start), int(stop)))
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Semillas inválidas: '{value}'.") from None


def _shape(value: str):
    try:
        return parse_shape(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _methods(value: str) -> List[str]:
    return [m.strip() for m in value.split(",") if m.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="persistency", description="Persistencia parcial por aplicaciones mejorantes.")
    parser.add_argument("-v", "--verbose", action="store_true", help="Logs de depuración")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("-o", "--output", help="Ruta de salida")
    common.add_argument("--backend", choices=["auto", "simplex", "highs"], default=settings.LP_BACKEND)
    common.add_argument("--cap", type=int, default=settings.ENUM_CAP, help="Límite de estados del oráculo")
    common.add_argument("--dump-lp", dest="dump_lp", help="Exporta el LP resuelto en formato CPLEX LP")
    common.add_argument("--jobs", type=int, default=settings.JOBS, help="Trabajos paralelos (-1 = todos)")
    common.add_argument("--eps", type=float, help="Margen estricto")
    common.add_argument("--mode", choices=["weak", "strict"], default="weak")
    common.add_argument("--certify", action="store_true", help="Contrasta con el oráculo exacto")
    for name, default in (
        ("feas", settings.TAU_FEAS), ("gap", settings.TAU_GAP), ("supp", settings.TAU_SUPP),
        ("verify", settings.TAU_VERIFY), ("int", settings.TAU_INT),
    ):
        common.add_argument(f"--tau-{name}", dest=f"tau_{name}", type=float, default=default)
    common.add_argument("--strict-eps-factor", type=float, default=settings.STRICT_EPS_FACTOR)

    generator = _Parser(add_help=False)
    generator.add_argument("--seed", type=parse_seeds, default=[0], help="N, A:B o a,b,c")
    generator.add_argument("--grid", type=_shape, default=(10, 10), help="HxW")
    generator.add_argument("--labels", type=int, default=3, help="K")
    generator.add_argument("--conn", type=int, choices=[4, 8], default=4)
    generator.add_argument("--family", choices=["potts", "full"], default="potts")
    generator.add_argument("--potts-per-edge", action="store_true", help="Un gamma por arista")

    method = _Parser(add_help=False)
    method.add_argument("--method", type=_methods, default=["l1"], help=f"Uno o varios de {', '.join(METHODS)}")
    method.add_argument("--y", default="from-lp", help="from-lp, uniform:<k> o file:<ruta>")
    method.add_argument("--window", type=_shape, help="SxS")
    method.add_argument("--stride", type=int)
    method.add_argument("--radius", type=int, help="Radio de ventanas BFS (grafos sin rejilla)")
    method.add_argument("--sweeps", type=int, default=1)
    method.add_argument("--window-dee", action="store_true", help="DEE1 antes de cada barrido de ventanas")
    method.add_argument("--budget", type=int, default=settings.WINDOW_BUDGET)
    method.add_argument("--history", help="CSV con las etiquetas restantes tras cada ventana")

    sub.add_parser("gen", parents=[common, generator], help="Genera instancias aleatorias")
    solve = sub.add_parser("solve", parents=[common], help="Resuelve la relajación LP")
    solve.add_argument("-i", "--instance", required=True)
    persist = sub.add_parser("persist", parents=[common, method], help="Calcula persistencias")
    persist.add_argument("-i", "--instance", required=True)
    bench = sub.add_parser("bench", parents=[common, generator, method], help="Barrido de semillas")
    bench.add_argument("--min-gap", type=float, help="Solo instancias con salto de integralidad mayor")
    bench.add_argument("--timing", action="store_true", help="Tiempos reales en wall_ms")
    bench.add_argument("--track", action="store_true", help="Registra el barrido en MLflow")
    verify = sub.add_parser("verify", parents=[common], help="Verifica una aplicación")
    verify.add_argument("-i", "--instance", required=True)
    verify.add_argument("--mapping", required=True, help="Archivo con líneas map <s> <i> <p>")
    return parser


def to_config(args: argparse.Namespace) -> RunConfig:
    values = vars(args)
    data = {
        "command": args.command,
        "instance": values.get("instance"),
        "output": values.get("output"),
        "mapping": values.get("mapping"),
        "mode": args.mode,
        "eps": args.eps,
        "cap": args.cap,
        "backend": args.backend,
        "jobs": args.jobs,
        "dump_lp": args.dump_lp,
        "certify": args.certify,
        "tolerances": {
            "feas": args.tau_feas,
            "gap": args.tau_gap,
            "supp": args.tau_supp,
            "verify": args.tau_verify,
            "integrality": args.tau_int,
            "strict_eps_factor": args.strict_eps_factor,
        },
    }
    if "seed" in values:
        data.update(
            seeds=args.seed,
            grid=args.grid,
            labels=args.labels,
            conn=args.conn,
            family=args.family,
            potts_per_edge=args.potts_per_edge,
        )
    if "method" in values:
        data.update(
            method=args.method,
            y=args.y,
            window=args.window,
            stride=args.stride,
            radius=args.radius,
            sweeps=args.sweeps,
            window_dee=args.window_dee,
            budget=args.budget,
            history=args.history,
        )
    for key in ("min_gap", "timing", "track"):
        if key in values:
            data[key] = values[key]
    return RunConfig(**data)


def cmd_gen(config: RunConfig, repository: CertificateRepository) -> int:
    results = GenerateInstancesUseCase(config).execute()
    single_file = config.output and config.output.endswith(".txt") and len(results) == 1
    base = Path(config.output) if config.output else settings.RESULTS_DIR / "instances"
    print(BANNER)
    for spec, instance in results:
        path = base if single_file else base / GenerateInstancesUseCase.file_name(spec)
        write_instance(instance, path)
        print(f"seed {spec.seed}: {instance.n_nodes} nodos, {instance.n_edges} aristas -> {path}")
    print(BANNER)
    return EXIT_OK


def cmd_solve(config: RunConfig, repository: CertificateRepository) -> int:
    instance = read_instance(config.instance)
    use_case = SolveRelaxationUseCase(config)
    result = use_case.execute(instance)
    if config.dump_lp:
        write_lp(use_case.last_lp, config.dump_lp)
    print(BANNER)
    print(f"Valor LP          : {result['lp_value']:.6f}")
    print(f"Energía redondeada: {result['labeling_energy']:.6f}")
    print(f"Nodos enteros     : {result['integral_nodes']}/{result['n_nodes']}")
    if result["exact"] is not None:
        print(f"Mínimo exacto     : {result['exact']:.6f} (salto {result['gap']:.6f})")
    print(BANNER)
    if config.output:
        repository.save_text(json.dumps(result, indent=2) + "\n", config.output)
    return EXIT_OK


def cmd_persist(config: RunConfig, repository: CertificateRepository) -> int:
    instance = read_instance(config.instance)
    labeling = None
    if config.y.startswith("file:"):
        labeling = read_labeling(config.y.split(":", 1)[1], instance.n_nodes)
    use_case = PersistencyUseCase(config, labeling=labeling)
    results = use_case.execute(instance)
    documents = [
        CertificateDocument.from_certificate(cert, config.instance, oracle, use_case.ctx.tol.to_dict())
        for cert, oracle in results
    ]
    repository.save_certificates(documents, config.output or repository.resolve(None, "certificate.json"))
    if config.dump_lp and use_case.last_lp is not None:
        write_lp(use_case.last_lp, config.dump_lp)
    history = [row for cert, _ in results for row in cert.history]
    if history and config.history:
        repository.save_table(pd.DataFrame(history, columns=["step", "window", "node", "remaining"]), config.history)

    print(BANNER)
    for cert, oracle in results:
        total = sum(k - 1 for k in instance.label_counts)
        checked = "" if oracle is None else " oráculo: ok"
        print(
            f"{cert.method.value} [{cert.mode.value}] eliminadas {cert.n_eliminated}/{total} "
            f"completitud {cert.completeness:.2f}% verificación {cert.verification.value:.3g}{checked}"
        )
        for diagnostic in cert.diagnostics:
            print(f"  - {diagnostic}")
    print(BANNER)
    return EXIT_OK


def cmd_bench(config: RunConfig, repository: CertificateRepository) -> int:
    df = BenchmarkUseCase(config).execute()
    path = repository.save_table(df, config.output)
    summary = BenchmarkUseCase.summary(df)
    print(BANNER)
    print(f"{len(df)} filas -> {path}")
    for key, value in summary.items():
        print(f"  {key}: {value:.2f}%")
    print(BANNER)
    if config.track:
        from src.infrastructure.mlflow import mlflow_tracking

        params = {
            "grid": f"{config.grid[0]}x{config.grid[1]}",
            "labels": config.labels,
            "conn": config.conn,
            "family": config.family.value,
            "methods": ",".join(config.method),
            "seeds": len(config.seeds),
            "backend": config.backend,
        }
        mlflow_tracking.log_benchmark(df, params, path, run_name=f"bench-{config.family.value}-K{config.labels}")
    return EXIT_OK


def cmd_verify(config: RunConfig, repository: CertificateRepository) -> int:
    instance = read_instance(config.instance)
    p = read_mapping(config.mapping, instance.label_counts)
    use_case = VerifyMappingUseCase(config)
    report = use_case.execute(instance, p)
    if config.dump_lp:
        write_lp(use_case.last_lp, config.dump_lp)
    if config.output:
        repository.save_text(json.dumps(report.to_dict(), indent=2) + "\n", config.output)
    print(BANNER)
    print(f"Modo {report.mode.value}: valor {report.value:.6g} -> {'mejorante' if report.improving else 'NO mejorante'}")
    print(BANNER)
    return EXIT_OK if report.improving else EXIT_CERTIFICATION


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "persist": cmd_persist,
    "bench": cmd_bench,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Punto de entrada; devuelve el código de salida."""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    try:
        config = to_config(args)
        return COMMANDS[config.command](config, CertificateRepository())
    except (ValidationError, InstanceError, MappingError, EnumerationCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"error del solver: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except CertificationError as exc:
        print(f"error de certificación: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION


if __name__ == "__main__":
    sys.exit(main())
