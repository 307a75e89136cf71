# Capa de infraestructura


