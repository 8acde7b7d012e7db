"""Optional Prometheus instrumentation for simulation runs"""
