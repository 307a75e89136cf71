#!/usr/bin/env python
"""
Script de entrada de la línea de comandos de persistencia parcial.

Ejemplos:
    python run_persistency.py gen --seed 0:10 --grid 6x6 --labels 3 -o results/instances
    python run_persistency.py persist -i results/instances/potts_6x6_K3_c4_s0.txt --method l1,dee1
    python run_persistency.py bench --seed 0:100 --method dee1,l1,dee2+l1 -o results/bench.csv
"""

# -------------------------------------------------------
# 1. Configurar runtime ANTES de cualquier otro import
# -------------------------------------------------------
from src.config.runtime import configure_runtime
configure_runtime()

# -------------------------------------------------------
# 2. Imports estándar
# -------------------------------------------------------
import sys

# -------------------------------------------------------
# 3. Línea de comandos del proyecto
# -------------------------------------------------------
from src.infrastructure.cli.main import main


if __name__ == "__main__":
    sys.exit(main())
