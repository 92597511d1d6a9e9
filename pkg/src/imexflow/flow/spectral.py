"""Fourier pseudo-spectral grids on periodic boxes.

Fields are stored as real-to-complex FFT coefficients normalised as
amplitudes (``norm="forward"``). Nyquist modes are kept at zero so that
first derivatives are exact and Hermitian symmetry is preserved. Vector
fields carry the component index as the leading axis.
"""
from __future__ import annotations

import numpy as np
import scipy.fft as fft

__all__ = ["SpectralGrid"]


class SpectralGrid:
    """Periodic box of ``shape`` points with side ``lengths`` starting at ``origin``.

    Nonlinear products are formed on a grid padded by ``dealias`` (3/2 rule)
    and truncated back.
    """

    def __init__(self, shape, lengths=None, origin=None, dealias: float = 1.5):
        self.shape = tuple(int(n) for n in shape)
        self.dim = len(self.shape)
        if self.dim not in (2, 3):
            raise ValueError("only 2D and 3D grids are supported")
        if any(n % 2 for n in self.shape):
            raise ValueError("grid sizes must be even")
        self.lengths = tuple(float(v) for v in (lengths or (1.0,) * self.dim))
        self.origin = tuple(float(v) for v in (origin or (0.0,) * self.dim))
        self.axes = tuple(range(-self.dim, 0))
        self.pad_shape = tuple(2 * int(np.ceil(dealias * n / 2 - 1e-12)) for n in self.shape)
        if any(p < n for p, n in zip(self.pad_shape, self.shape)):
            raise ValueError(f"bad dealiasing factor {dealias} for shape {self.shape}")

        ks = []
        for ax, (n, L) in enumerate(zip(self.shape, self.lengths)):
            if ax == self.dim - 1:
                idx = np.arange(n // 2 + 1, dtype=float)
            else:
                idx = np.fft.fftfreq(n, 1.0 / n)
            shp = [1] * self.dim
            shp[ax] = idx.size
            ks.append((2 * np.pi / L * idx).reshape(shp))
        self.spec_shape = tuple(k.shape[ax] for ax, k in enumerate(ks))
        mask = np.ones(self.spec_shape, dtype=bool)
        for ax, n in enumerate(self.shape):
            sl = [slice(None)] * self.dim
            sl[ax] = n // 2
            mask[tuple(sl)] = False
        self.mask = mask
        self.k = [np.where(mask, k, 0.0) for k in (np.broadcast_to(k, self.spec_shape) for k in ks)]
        self.k2 = sum(k * k for k in self.k)
        self.inv_k2 = np.zeros_like(self.k2)
        nz = self.k2 > 0
        self.inv_k2[nz] = 1.0 / self.k2[nz]
        # weights of the half spectrum in the full-spectrum inner product
        w = np.full(self.spec_shape, 2.0)
        w[..., 0] = 1.0
        self.weights = np.where(mask, w, 0.0)
        self._pad_index = self._build_pad_index()

    # -- transforms -------------------------------------------------------------
    def forward(self, u: np.ndarray) -> np.ndarray:
        return fft.rfftn(u, axes=self.axes, norm="forward") * self.mask

    def backward(self, u_hat: np.ndarray) -> np.ndarray:
        return fft.irfftn(u_hat, s=self.shape, axes=self.axes, norm="forward")

    def _build_pad_index(self):
        src, dst = [], []
        for ax, (n, p) in enumerate(zip(self.shape, self.pad_shape)):
            half = n // 2
            if ax == self.dim - 1:
                s = np.arange(half)
                d = s
            else:
                s = np.concatenate([np.arange(half), np.arange(half + 1, n)])
                d = np.concatenate([np.arange(half), np.arange(p - half + 1, p)])
            src.append(s)
            dst.append(d)
        return np.ix_(*src), np.ix_(*dst)

    def pad_backward(self, u_hat: np.ndarray) -> np.ndarray:
        """Physical values on the padded grid."""
        lead = u_hat.shape[: u_hat.ndim - self.dim]
        pad_spec = tuple(self.pad_shape[:-1]) + (self.pad_shape[-1] // 2 + 1,)
        big = np.zeros(lead + pad_spec, dtype=complex)
        src, dst = self._pad_index
        big[(Ellipsis,) + dst] = u_hat[(Ellipsis,) + src]
        return fft.irfftn(big, s=self.pad_shape, axes=self.axes, norm="forward")

    def pad_forward(self, w: np.ndarray) -> np.ndarray:
        """Truncated coefficients of a field sampled on the padded grid."""
        big = fft.rfftn(w, axes=self.axes, norm="forward")
        lead = w.shape[: w.ndim - self.dim]
        out = np.zeros(lead + self.spec_shape, dtype=complex)
        src, dst = self._pad_index
        out[(Ellipsis,) + src] = big[(Ellipsis,) + dst]
        return out

    # -- geometry ---------------------------------------------------------------
    def coords(self, padded: bool = False):
        shape = self.pad_shape if padded else self.shape
        axes = [o + L * np.arange(n) / n for o, L, n in zip(self.origin, self.lengths, shape)]
        return np.meshgrid(*axes, indexing="ij")

    @property
    def npoints(self) -> int:
        return int(np.prod(self.shape))

    # -- calculus ---------------------------------------------------------------
    def grad(self, u_hat: np.ndarray) -> np.ndarray:
        """Gradient; a trailing axis of length ``dim`` is inserted after the leading axes."""
        return np.stack([1j * k * u_hat for k in self.k], axis=u_hat.ndim - self.dim)

    def div(self, v_hat: np.ndarray) -> np.ndarray:
        return sum(1j * self.k[j] * v_hat[j] for j in range(self.dim))

    def k_dot(self, v_hat: np.ndarray) -> np.ndarray:
        return sum(self.k[j] * v_hat[j] for j in range(self.dim))

    def laplacian(self, u_hat: np.ndarray) -> np.ndarray:
        return -self.k2 * u_hat

    def inner(self, a_hat: np.ndarray, b_hat: np.ndarray) -> float:
        """Volume-mean inner product <a, b> of real fields, summed over leading axes."""
        return float(np.sum(self.weights * (a_hat.conj() * b_hat).real))

    def norm(self, a_hat: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(a_hat, a_hat), 0.0)))

    def relative_divergence(self, v_hat: np.ndarray) -> float:
        """max_k |k . v(k)| / max_k |v(k)|."""
        vmax = np.max(np.abs(v_hat))
        if vmax == 0:
            return 0.0
        return float(np.max(np.abs(self.k_dot(v_hat))) / vmax)

    def hermitian_defect(self, u_hat: np.ndarray) -> float:
        """Relative violation of coeff(-k) = conj(coeff(k)) in the k_last = 0 plane."""
        plane = u_hat[..., 0]
        lead = plane.ndim - (self.dim - 1)
        flipped = plane
        for ax in range(lead, plane.ndim):
            flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
        scale = max(np.max(np.abs(u_hat)), 1e-300)
        return float(np.max(np.abs(flipped - plane.conj())) / scale)
