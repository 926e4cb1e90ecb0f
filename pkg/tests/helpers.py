import numpy as np

from extremaps.channels import KrausChannel


def rand_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rand_hermitian(rng, n):
    a = rand_complex(rng, n, n)
    return (a + a.conj().T) / 2


def rand_channel(rng, n, s):
    return KrausChannel(tuple(rand_complex(rng, n, n) for _ in range(s)))


def rand_tp_channel(rng, n, s):
    """Kraus set with sum V V^dagger = I (blocks of a random isometry)."""
    q, _ = np.linalg.qr(rand_complex(rng, s * n, n))
    return KrausChannel(tuple(q[k * n : (k + 1) * n].conj().T for k in range(s)))


def rand_unitary(rng, n):
    q, r = np.linalg.qr(rand_complex(rng, n, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def rand_density(rng, n, rank=None):
    rank = n if rank is None else rank
    g = rand_complex(rng, n, rank)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def unitary_fidelity(u, v):
    n = u.shape[0]
    return abs(np.vdot(u.ravel(), v.ravel())) / n


def rand_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def rand_contraction_map(rng, n):
    """A with ||A|| = s < 1 and ||b|| = 1 - s; the shift points along the top direction half the time."""
    a = rng.standard_normal((n, n))
    s = rng.uniform(0.2, 0.95)
    u, sv, _ = np.linalg.svd(a)
    a = s * a / sv[0]
    if rng.random() < 0.5:
        b = (1 - s) * u[:, 0] * rng.choice([-1, 1])
    else:
        b = rng.standard_normal(n)
        b *= (1 - s) * rng.uniform(0, 1) / np.linalg.norm(b)
    return a, b


def sphere_max_oracle(a, b, samples, rng):
    """Brute-force max of ||A x + b|| over sampled unit x, then a local polish from the best sample."""
    from scipy.optimize import minimize

    n = a.shape[0]
    best, best_x = -np.inf, None
    for chunk in range(0, samples, 200_000):
        x = rng.standard_normal((min(200_000, samples - chunk), n))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        y = x @ a.T + b
        vals = np.einsum("ij,ij->i", y, y)
        k = int(np.argmax(vals))
        if np.sqrt(vals[k]) > best:
            best, best_x = float(np.sqrt(vals[k])), x[k]

    def neg(y):
        y = y / np.linalg.norm(y)
        return -np.linalg.norm(a @ y + b)

    res = minimize(neg, best_x, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
    return float(best), max(float(best), -float(res.fun))
