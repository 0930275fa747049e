"""
High-level functions used across the cwtoolkit package.

"""
import h5py
import numpy as np
from joblib import Parallel, delayed


# --- Utility functions --- #


def print_args(args, file=None):
    """Print arguments passed to argparse."""
    print("Input arguments:", file=file)
    for arg in list(vars(args).items()):
        print(arg, file=file)


def read_h5(fname, vnames):
    """Generic HDF5 reader.

    vnames : ['var1', 'var2', 'var3']
    """
    with h5py.File(fname, "r") as f:
        variables = [f[v][()] for v in vnames]

        return variables if len(vnames) > 1 else variables[0]


def save_h5(fname, vardict, mode="a"):
    """Generic HDF5 writer.

    vardict : {'name1': var1, 'name2': va2, 'name3': var3}
    """
    with h5py.File(fname, mode) as f:
        for k, v in list(vardict.items()):
            if k in f:
                del f[k]
            f[k] = np.asarray(v)


def run_jobs(func, items, njobs=1, verbose=0):
    """Map `func` over `items`, in parallel when njobs > 1.

    Results always come back in the order of `items`, so the merge is
    deterministic regardless of scheduling.
    """
    if njobs == 1:
        return [func(item) for item in items]

    return Parallel(n_jobs=njobs, verbose=verbose)(delayed(func)(item) for item in items)


def make_rng(seed):
    """Named deterministic generator (PCG64) for a 64-bit seed."""

    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


def sup_norm(a, b):
    """Sup-norm distance between two coordinate dicts.

    Keys present on one side only are compared against zero.
    """
    keys = set(a) | set(b)
    if not keys:
        return 0.0

    return max(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


def normalize(x):
    """Project a nonnegative vector onto the simplex (uniform if all zero)."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, None)
    total = x.sum()
    if total <= 0:
        return np.full(x.shape, 1.0 / x.size)

    return x / total
