"""Backend selection for the hot loops.

The compiled extension is used when it was built; otherwise the numpy/pure
Python twins in ``_pykernels`` take over. Both produce identical numbers.
"""
try:
    from gambler import _ckernels as _impl

    BACKEND = "cython"
except ImportError:  # extension not built
    from gambler import _pykernels as _impl

    BACKEND = "python"

lattice_values = _impl.lattice_values
bellman_backup = _impl.bellman_backup
qlearn_run = _impl.qlearn_run
simulate_run = _impl.simulate_run


def backend_module(name):
    """Return the kernel module for ``"python"`` or ``"cython"``."""
    if name == "python":
        from gambler import _pykernels

        return _pykernels
    if name == "cython":
        from gambler import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
