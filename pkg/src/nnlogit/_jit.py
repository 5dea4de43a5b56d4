"""Optional numba import.

When numba is missing ``njit`` degrades to a no-op decorator so the kernel
module stays importable (and slow).
"""

try:
    from numba import njit as _njit

    NUMBA_AVAILABLE = True

    def njit(*args, **kwargs):
        return _njit(*args, **kwargs)

except ImportError:  # pragma: no cover
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
