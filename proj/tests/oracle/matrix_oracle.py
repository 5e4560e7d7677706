"""Reference values from scipy's expm for tests/test_sympl_core.cpp."""
import numpy as np
from scipy.linalg import expm

np.set_printoptions(precision=17)


def sp_matrix(a, b, c):
    return np.block([[a, b], [c, -a.T]])


a = np.array([[0.7, -1.1], [0.4, 0.3]])
b = np.array([[1.2, 0.5], [0.5, -0.8]])
c = np.array([[-0.6, 0.9], [0.9, 1.4]])
X = expm(sp_matrix(a, b, c))
print("expm(x):")
for r in X:
    print(", ".join(f"{v:.17g}" for v in r))

A = np.array([[1, 0, 1, 0], [0, -1, 0, -1], [1, 0, -1, 0], [0, -1, 0, 1]], float)
B = np.array([[0, -1, 0, 1], [-1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0]], float)
E = expm(0.1 * A + 0.2 * B)
S = E[2:, :2] @ np.linalg.inv(E[:2, :2])
print("chart of first two columns at (0.1, 0.2):")
for r in S:
    print(", ".join(f"{v:.17g}" for v in r))
print("columns:")
for r in E[:, :2]:
    print(", ".join(f"{v:.17g}" for v in r))
