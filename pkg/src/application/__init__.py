# Capa de aplicación


