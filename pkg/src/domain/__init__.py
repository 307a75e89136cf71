# Capa de dominio


