"""Kernel backend selection.

The compiled extension is used when it imported cleanly; otherwise the
numpy fallback takes over transparently.  Setting the environment
variable ``WARNSIFT_KERNELS=python`` forces the fallback, which the
equivalence tests and benchmarks rely on.

Both backends fill caller-allocated arrays:

``lstm_forward(zx, wh, h_out, c_out, gates)``
    One forward recurrent sweep over ``zx = x @ W_x + b`` of shape
    (T, 4H); writes hidden states, cell states and activated gates.

``lstm_backward(wh, h_all, c_all, gates, dh_up, dz_out, dwh_out)``
    Backpropagation through the sweep; writes the gradient wrt the
    pre-activations (from which input-side gradients are matmuls) and
    accumulates the recurrent weight gradient.
"""

from __future__ import annotations

import os

from . import kernels_py

BACKEND = "python"
lstm_forward = kernels_py.lstm_forward
lstm_backward = kernels_py.lstm_backward

if os.environ.get("WARNSIFT_KERNELS", "").lower() != "python":
    try:
        from . import _core

        lstm_forward = _core.lstm_forward
        lstm_backward = _core.lstm_backward
        BACKEND = "compiled"
    except ImportError:
        pass

__all__ = ["BACKEND", "lstm_backward", "lstm_forward"]
