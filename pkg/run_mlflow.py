#!/usr/bin/env python
"""
Utilidades de MLflow para el benchmark de persistencia.

    python run_mlflow.py ui                      # servidor sobre MLRUNS_DIR
    python run_mlflow.py log results/bench.csv   # registra un CSV de `bench`
"""

# -------------------------------------------------------
# 1. Configurar runtime ANTES de cualquier otro import
# -------------------------------------------------------
from src.config.runtime import configure_runtime
configure_runtime()

# -------------------------------------------------------
# 2. Imports estándar
# -------------------------------------------------------
import argparse
import subprocess
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd

# -------------------------------------------------------
# 3. Configuración del proyecto
# -------------------------------------------------------
from src.application.use_cases.benchmark_use_case import COLUMNS
from src.config.settings import settings
from src.infrastructure.mlflow import mlflow_tracking

HOST = "127.0.0.1"
PORT = "5000"


def run_mlflow_server(host: str = HOST, port: str = PORT) -> int:
    print("=" * 60)
    print("Servidor de MLflow para benchmarks de persistencia")
    print("=" * 60)
    print(f"Experimento  : {settings.MLFLOW_EXPERIMENT_NAME}")
    print(f"Backend store: {settings.MLRUNS_DIR}")
    print(f"UI           : http://{host}:{port}")
    print("=" * 60 + "\n")

    settings.ensure_directories()

    cmd = [
        sys.executable, "-m", "mlflow", "server",
        "--host", host,
        "--port", str(port),
        "--backend-store-uri", f"file:{settings.MLRUNS_DIR}",
        "--default-artifact-root", f"file:{settings.MLRUNS_DIR}",
    ]

    try:
        subprocess.run(cmd, check=True)
    except KeyboardInterrupt:
        print("\nServidor MLflow detenido.")
    except subprocess.CalledProcessError as e:
        print("\nError al iniciar MLflow:", e)
        return 1
    return 0


def log_bench_csv(path: str, run_name: Optional[str] = None) -> int:
    """
    Registra en MLflow un CSV ya generado por `persistency bench`.

    Los parámetros (familia, K, conectividad, métodos, semillas) se leen de
    las columnas del propio CSV.
    """
    csv = Path(path)
    if not csv.exists():
        print(f"Error: no existe {csv}", file=sys.stderr)
        return 1
    df = pd.read_csv(csv)
    missing = [c for c in COLUMNS if c not in df.columns]
    if missing:
        print(f"Error: {csv} no es un CSV de benchmark (faltan {', '.join(missing)})", file=sys.stderr)
        return 1
    params = mlflow_tracking.benchmark_params(df)
    mlflow_tracking.log_benchmark(df, params, csv, run_name=run_name or f"csv-{csv.stem}")
    print(f"{len(df)} filas de {csv} registradas en '{settings.MLFLOW_EXPERIMENT_NAME}'")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="MLflow para el benchmark de persistencia")
    sub = parser.add_subparsers(dest="command")
    ui = sub.add_parser("ui", help="Lanza el servidor de MLflow")
    ui.add_argument("--host", default=HOST)
    ui.add_argument("--port", default=PORT)
    log = sub.add_parser("log", help="Registra un CSV de `bench`")
    log.add_argument("csv")
    log.add_argument("--run-name")
    args = parser.parse_args(argv)

    if args.command == "log":
        return log_bench_csv(args.csv, args.run_name)
    if args.command == "ui":
        return run_mlflow_server(args.host, args.port)
    return run_mlflow_server()


if __name__ == "__main__":
    sys.exit(main())
