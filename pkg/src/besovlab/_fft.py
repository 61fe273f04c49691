"""Thin wrapper over :mod:`scipy.fft` with a process-wide worker cap.

The cap defaults to the ``BESOVLAB_THREADS`` environment variable (1 when
unset). pocketfft splits work along independent 1-d transforms, so the
result does not depend on the number of workers.
"""
import os
from contextlib import contextmanager

import scipy.fft as _sfft

_workers = None


def get_threads():
    global _workers
    if _workers is None:
        raw = os.environ.get("BESOVLAB_THREADS", "1")
        try:
            _workers = max(1, int(raw))
        except ValueError:
            _workers = 1
    return _workers


def set_threads(n):
    """Set the worker cap used by every transform in the package."""
    global _workers
    n = int(n)
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _workers = n


@contextmanager
def threads(n):
    prev = get_threads()
    set_threads(n)
    try:
        yield
    finally:
        set_threads(prev)


def fftn(a, axes=None):
    return _sfft.fftn(a, axes=axes, workers=get_threads())


def ifftn(a, axes=None):
    return _sfft.ifftn(a, axes=axes, workers=get_threads())


def fft(a, axis=-1):
    return _sfft.fft(a, axis=axis, workers=get_threads())


def ifft(a, axis=-1):
    return _sfft.ifft(a, axis=axis, workers=get_threads())


def rfftn(a):
    return _sfft.rfftn(a, workers=get_threads())


def irfftn(a, shape):
    return _sfft.irfftn(a, s=shape, workers=get_threads())
