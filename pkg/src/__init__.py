# Paquete principal del proyecto


